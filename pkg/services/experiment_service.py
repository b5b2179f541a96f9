"""
Experiment Service
------------------
Business layer for Monte Carlo experiments.

Sits between the CLI / tests and the simulator packages:
  run_experiments.py, tests/ --> services/ --> gadgets/, circuits/, noise/, architectures/

Responsibilities:
  - Build the gadget tree of every requested input state and validate it noiselessly
  - Sweep the configured noise parameter, one deterministic seed per (point, state, batch)
  - Count logical failures and post-selection discards, attach Wilson intervals
  - Pool the per-state counts into a cardinal-state average
  - Never assert here: assertions belong in tests only
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import allure
import numpy as np
from scipy.stats import norm

from architectures.lowering import ArchitectureModel
from architectures.models import ARCHITECTURES
from architectures.transpiler import AuditReport, audit_schedule, transpile
from circuits.executor import execute_tree
from circuits.protocol_tree import ProtocolTree
from circuits.validation import DEFAULT_SHOTS, ValidationReport, validate_tree
from engine.errors import ValidationFailure
from gadgets.spec import GadgetKind, GadgetSpec
from noise.models import NoiseModel, ScemModel
from services.config import ExperimentConfig

logger = logging.getLogger(__name__)

AVERAGE    = "avg"
CONFIDENCE = 0.95


def wilson_interval(failures: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval of a binomial proportion (``(0, 1)`` when ``n`` is 0)."""
    if failures < 0 or failures > n:
        raise ValueError(f"❌ failures must lie in [0, n], got {failures} of {n}")
    if n == 0:
        return 0.0, 1.0
    z      = float(norm.ppf(0.5 + confidence / 2))
    phat   = failures / n
    denom  = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half   = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class PointResult:
    """Counts of one (parameter value, input state) point."""

    value:         float
    state:         str
    shots:         int
    failures:      int
    discards:      int
    wall_time:     float = 0.0
    branch_counts: dict[str, int] = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return self.shots - self.discards

    @property
    def successes(self) -> int:
        return self.accepted - self.failures

    @property
    def p_l(self) -> float:
        return self.failures / self.accepted if self.accepted else 0.0

    @property
    def fidelity(self) -> float:
        return 1.0 - self.p_l

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.accepted)

    @property
    def sigma(self) -> float:
        n = self.accepted
        return math.sqrt(self.p_l * (1 - self.p_l) / n) if n else 0.0


@dataclass(frozen=True)
class RunResult:
    """Every point of one sweep, per state in sweep order, then the pooled ``avg`` rows."""

    name:        str
    gadget:      str
    noise:       str
    parameter:   str
    config_hash: str
    seed:        int
    points:      tuple[PointResult, ...] = ()

    @property
    def states(self) -> list[str]:
        return list(dict.fromkeys(p.state for p in self.points))

    @property
    def headline(self) -> str | None:
        """The pooled average when several states ran, else the single state."""
        states = self.states
        return AVERAGE if AVERAGE in states else (states[0] if states else None)

    def for_state(self, state: str | None = None) -> list[PointResult]:
        state = state or self.headline
        return [p for p in self.points if p.state == state]

    def curve(self, state: str | None = None) -> list[tuple[float, float]]:
        """``(value, p_L)`` pairs of one state (the headline state by default)."""
        return [(p.value, p.p_l) for p in self.for_state(state)]


def pooled(points: list[PointResult], value: float) -> PointResult:
    """Counts of several states summed into one ``avg`` point."""
    branches = Counter()
    for p in points:
        branches.update(p.branch_counts)
    return PointResult(
        value         = value,
        state         = AVERAGE,
        shots         = sum(p.shots for p in points),
        failures      = sum(p.failures for p in points),
        discards      = sum(p.discards for p in points),
        wall_time     = sum(p.wall_time for p in points),
        branch_counts = _counts(branches),
    )


def _counts(counter: Counter) -> dict[str, int]:
    return {str(k): int(v) for k, v in sorted(counter.items())}


def point_seed(seed: int, *key: int) -> int:
    """Deterministic 32-bit child seed of ``seed`` for one (point, state, batch) key."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])


class ExperimentService:
    """
    Runs configured sweeps.

    Usage:
        service = ExperimentService(load_config("data/experiments/memory_scem.json"))
        result  = service.run_experiment()
        result.curve()
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self._trees: dict[str, ProtocolTree] = {}

    # ──────────────────────────────────────────────────────────────────────
    # BUILDING BLOCKS
    # ──────────────────────────────────────────────────────────────────────

    def spec(self, state: str) -> GadgetSpec:
        return self.config.gadget.to_spec(state)

    def tree(self, state: str) -> ProtocolTree:
        if state not in self._trees:
            self._trees[state] = self.spec(state).build()
        return self._trees[state]

    def noise_model(self, value: float) -> NoiseModel:
        noise = self.config.noise
        if noise.model == "scem":
            return ScemModel(value, idle=noise.idle)
        return ArchitectureModel(noise.architecture, noise.scenario, t2=value)

    # ──────────────────────────────────────────────────────────────────────
    # PUBLIC ACTIONS
    # ──────────────────────────────────────────────────────────────────────

    @allure.step("EXPERIMENT SERVICE: Validate gadget trees")
    def validate(self, shots: int | None = None) -> dict[str, ValidationReport]:
        """
        Noiseless validation of every run state's tree.

        Returns:
            dict: state → ValidationReport (never raises on findings)
        """
        reports = {}
        for state in self.config.run_states:
            tree = self.tree(state)
            logger.info(f"🧪 ExperimentService.validate() → '{tree.name}'")
            reports[state] = validate_tree(tree, shots or DEFAULT_SHOTS, seed=self.config.seed)
            if not reports[state].ok:
                logger.error(f"❌ Validation failed for '{tree.name}': {reports[state].first}")
        return reports

    @allure.step("EXPERIMENT SERVICE: Audit schedules")
    def audit(self) -> list[AuditReport]:
        """
        Transpile every node circuit of every run state on the configured
        architecture and audit the schedules (multi-channel sweeps only).

        Returns:
            list: one AuditReport per scheduled node (empty for SCEM sweeps)
        """
        noise = self.config.noise
        if noise.model != "multichannel":
            return []
        reports = []
        for state in self.config.run_states:
            schedules = transpile(self.tree(state), noise.architecture, noise.scenario)
            reports.extend(audit_schedule(schedule) for schedule in schedules.values())
        bad = [r for r in reports if not r.ok]
        logger.info(f"🧪 ExperimentService.audit() → {len(reports)} schedule(s), {len(bad)} with violations")
        return reports

    @allure.step("EXPERIMENT SERVICE: Run experiment")
    def run_experiment(self) -> RunResult:
        """
        Validate, then execute every (parameter value, state) point.

        Returns:
            RunResult: per-state points followed by the pooled average per value

        Raises:
            ValidationFailure: a tree failed noiseless validation
        """
        config = self.config
        logger.info(f"🚀 ExperimentService.run_experiment() → '{config.name}' "
                    f"{config.noise.parameter}={config.noise.points} states={config.run_states}")
        if config.validate_tree:
            for report in self.validate().values():
                if not report.ok:
                    raise ValidationFailure(report)
        if not self.tree(config.run_states[0]).is_ft:
            logger.warning(f"⚠️ Gadget '{self.spec(config.run_states[0]).name}' is not tagged fault-tolerant")

        per_state, averages = [], []
        for i, value in enumerate(config.noise.points):
            row = [self.run_point(value, state, key=(i, j)) for j, state in enumerate(config.run_states)]
            per_state.extend(row)
            if len(row) > 1:
                averages.append(pooled(row, value))

        result = RunResult(
            name        = config.name,
            gadget      = self.spec(config.run_states[0]).name if len(config.run_states) == 1 else config.gadget.kind.value,
            noise       = config.noise.tag(),
            parameter   = config.noise.parameter,
            config_hash = config.digest(),
            seed        = config.seed,
            points      = tuple(per_state + averages),
        )
        logger.info(f"✅ ExperimentService: '{config.name}' finished with {len(result.points)} point(s)")
        return result

    @allure.step("EXPERIMENT SERVICE: Run point {value} for state '{state}'")
    def run_point(self, value: float, state: str, key: tuple[int, ...] = (0, 0)) -> PointResult:
        """
        Execute one point; with ``adaptive`` the batch doubles until enough failures or the shot cap.

        Args:
            value: noise parameter (p for SCEM, T2 in seconds for multi-channel)
            state: cardinal input state
            key:   (point index, state index), keys the child seeds

        Returns:
            PointResult
        """
        config  = self.config
        tree    = self.tree(state)
        noisy   = self.noise_model(value).attach_tree(tree)
        shots   = failures = discards = 0
        batch   = config.shots
        rounds  = 0
        branches: Counter = Counter()
        started = time.perf_counter()

        while True:
            batch  = min(batch, config.max_shots - shots)
            result = execute_tree(noisy, batch, seed=point_seed(config.seed, *key, rounds), workers=config.workers)
            shots    += batch
            failures += result.failures()
            discards += result.discarded
            branches.update(result.branch_counts)
            rounds   += 1
            if not config.adaptive or failures >= config.target_failures:
                break
            if shots >= config.max_shots:
                logger.warning(f"⚠️ Shot cap {config.max_shots} reached at {value:g} ({failures} failures)")
                break
            batch = shots

        point = PointResult(value, state, shots, failures, discards, time.perf_counter() - started,
                            _counts(branches))
        logger.info(f"📊 {tree.name} @ {config.noise.parameter}={value:g}: "
                    f"p_L={point.p_l:.3e} ({failures}/{point.accepted}, discards={discards})")
        return point

    @allure.step("EXPERIMENT SERVICE: Compare architectures ({scenario}, T2={t2})")
    def compare_architectures(self, scenario: str, t2: float, state: str = "0", shots: int | None = None,
                              architectures: tuple[str, ...] = ARCHITECTURES) -> dict[str, PointResult]:
        """
        Teleported-state logical error per architecture at one scenario and T2.

        Returns:
            dict: architecture → PointResult (fidelity = 1 − p_L)
        """
        tree    = GadgetSpec(GadgetKind.TELEPORT_LS, state=state).build()
        shots   = shots or self.config.shots
        results = {}
        for i, arch in enumerate(architectures):
            noisy  = ArchitectureModel(arch, scenario, t2=t2).attach_tree(tree)
            start  = time.perf_counter()
            run    = execute_tree(noisy, shots, seed=point_seed(self.config.seed, i), workers=self.config.workers)
            results[arch] = PointResult(t2, state, shots, run.failures(), run.discarded,
                                        time.perf_counter() - start, _counts(run.branch_counts))
            logger.info(f"📊 {arch} ({scenario}, T2={t2:g} s): fidelity={results[arch].fidelity:.4f}")
        return results
