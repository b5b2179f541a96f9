"""
Certificate Service
-------------------
Exhaustive single-fault certificates for protocol trees.

Every fault location on the fault-free path gets exactly one forced fault
(each Pauli letter of each channel, each measurement flip); the tree then
runs to a terminal with no further noise.  A fault-tolerant tree may
discard such a shot or correct it, but must never end with a logical error.

Usage:
    service = CertificateService(workers=4)
    report  = service.certify(gen_teleport_ls("+"))
    report.certified, report.witnesses
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import allure

from circuits.protocol_tree import ProtocolTree
from decoders.fault_enum import FaultOutcome, FaultSet
from gadgets.spec import CARDINAL_STATES, GadgetKind, GadgetSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CertificateReport:
    tree:      str
    ft:        bool
    n_faults:  int
    discarded: int
    witnesses: tuple[FaultOutcome, ...]

    @property
    def certified(self) -> bool:
        return not self.witnesses

    def __str__(self) -> str:
        head = (f"{self.tree} [{'ft' if self.ft else 'non-ft'}]: {self.n_faults} single faults, "
                f"{self.discarded} discarded, {len(self.witnesses)} logical failure(s)")
        return "\n".join([head] + [f"  {w.fault} → {w.node_id}" for w in self.witnesses])


class CertificateService:
    """
    Runs single-fault certificates on trees and on gadgets across input states.

    Usage:
        reports = CertificateService().certify_gadget(GadgetKind.PREP_VERIFIED)
    """

    def __init__(self, workers: int = 1):
        self.workers = workers

    # ──────────────────────────────────────────────────────────────────────
    # PUBLIC ACTIONS
    # ──────────────────────────────────────────────────────────────────────

    @allure.step("CERTIFICATE SERVICE: Certify '{tree}'")
    def certify(self, tree: ProtocolTree) -> CertificateReport:
        """
        Inject every single fault and collect the logical failures.

        Args:
            tree: protocol tree with an observable (SCEM is attached when it has no noise)

        Returns:
            CertificateReport: ``witnesses`` lists the faults that flip the observable
        """
        logger.info(f"🧪 CertificateService.certify() → '{tree.name}'")
        faults    = FaultSet(tree)
        outcomes  = faults.run(self.workers)
        witnesses = tuple(faults.witnesses(workers=self.workers))
        report    = CertificateReport(tree.name, tree.is_ft, len(outcomes),
                                      sum(1 for o in outcomes if not o.accepted), witnesses)
        if report.certified:
            logger.info(f"✅ {report.tree}: no single fault causes a logical error ({report.n_faults} checked)")
        elif report.ft:
            logger.error(f"❌ {report}")
        else:
            logger.info(f"⚠️ {report.tree}: {len(witnesses)} single-fault witness(es), first: {witnesses[0].fault}")
        return report

    @allure.step("CERTIFICATE SERVICE: Certify gadget '{kind}' over input states")
    def certify_gadget(self, kind: GadgetKind | str, states: tuple[str, ...] = CARDINAL_STATES,
                       **spec) -> dict[str, CertificateReport]:
        """
        Certificate of one gadget for every input state.

        Args:
            kind:   gadget kind
            states: input states (all six cardinal states by default)
            spec:   further ``GadgetSpec`` fields (strategy, repeated, options ...)

        Returns:
            dict: state → CertificateReport
        """
        return {state: self.certify(GadgetSpec(kind, state=state, **spec).build()) for state in states}
