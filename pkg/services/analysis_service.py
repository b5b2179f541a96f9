"""
Analysis Service
----------------
Business layer for post-processing sweep results.

Responsibilities:
  - Fit log-log slopes of p_L(p) (fault-tolerance order of a gadget)
  - Locate the pseudo-threshold where p_L = p
  - Extrapolate p_L over code distance to a qubit footprint
  - Break gadget sections down into gate / transport / recool time on an architecture
  - Never assert here: assertions belong in tests only
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import allure
import numpy as np
from scipy.stats import linregress

from architectures.transpiler import Schedule, transpile_circuit
from circuits.circuit import Circuit
from gadgets.se_circuits import gen_se_circuit
from gadgets.state_prep import encoder_circuit
from gadgets.teleport import gen_lattice_surgery_round

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 3
SIMULATED_D    = 3
NO_FOOTPRINT   = "no finite footprint"


# ──────────────────────────────────────────────────────────────────────────────
# RESULT TYPES
# ──────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SlopeFit:
    exponent:  float
    stderr:    float
    intercept: float
    n_points:  int

    def __str__(self) -> str:
        return f"{self.exponent:.3f} ± {self.stderr:.3f} ({self.n_points} points)"


@dataclass(frozen=True)
class Footprint:
    """Qubits of one teleportation-ready block pair at the smallest sufficient distance."""

    p:            float
    target:       float
    distance:     int | None
    qubits:       int | None
    extrapolated: bool = False
    reason:       str = ""

    @property
    def finite(self) -> bool:
        return self.qubits is not None

    def __str__(self) -> str:
        if not self.finite:
            return f"p={self.p:g} target={self.target:g}: {NO_FOOTPRINT} ({self.reason})"
        flag = " (extrapolated beyond simulated d)" if self.extrapolated else ""
        return f"p={self.p:g} target={self.target:g}: d={self.distance} N={self.qubits}{flag}"


# ──────────────────────────────────────────────────────────────────────────────
# PURE HELPERS
# ──────────────────────────────────────────────────────────────────────────────

def footprint_qubits(d: int) -> int:
    """
    Two hexagonal color-code blocks with one flagged ancilla pair per
    plaquette, plus the two lattice-surgery ancillas.

        n(d) = (3d² + 1) / 4 data qubits, m(d) = (n − 1) / 2 plaquettes
        N(d) = 2 (n + 2m) + 2
    """
    if d < 3 or d % 2 == 0:
        raise ValueError(f"❌ Distance must be odd and >= 3, got {d}")
    n = (3 * d * d + 1) // 4
    m = (n - 1) // 2
    return 2 * (n + 2 * m) + 2


def _order(d: int) -> int:
    return (d + 1) // 2


class AnalysisService:
    """
    Slope fits, thresholds, footprints and architecture section breakdowns.

    Usage:
        analysis = AnalysisService()
        fit      = analysis.fit_slope(result.curve())
        n        = analysis.footprint({3: 2.1e-5}, p=1e-4, target=1e-9)
    """

    # ──────────────────────────────────────────────────────────────────────
    # PUBLIC ACTIONS
    # ──────────────────────────────────────────────────────────────────────

    @allure.step("ANALYSIS SERVICE: Fit log-log slope")
    def fit_slope(self, points: Iterable[tuple[float, float]], p_max: float | None = None) -> SlopeFit:
        """
        Least-squares fit of log p_L against log p.

        Args:
            points: (p, p_L) pairs; points with p_L = 0 carry no slope information and are dropped
            p_max:  keep only the low-p regime p ≤ p_max

        Returns:
            SlopeFit: exponent ± standard error
        """
        usable = sorted((p, pl) for p, pl in points if pl > 0 and p > 0 and (p_max is None or p <= p_max))
        if len(usable) < MIN_FIT_POINTS:
            raise ValueError(f"❌ Slope fit needs >= {MIN_FIT_POINTS} points with p_L > 0, got {len(usable)}")
        x = np.log10([p for p, _ in usable])
        y = np.log10([pl for _, pl in usable])
        fit = linregress(x, y)
        result = SlopeFit(float(fit.slope), float(fit.stderr), float(fit.intercept), len(usable))
        logger.info(f"📊 AnalysisService.fit_slope() → {result}")
        return result

    @allure.step("ANALYSIS SERVICE: Locate pseudo-threshold")
    def pseudo_threshold(self, points: Iterable[tuple[float, float]]) -> float | None:
        """
        The p at which p_L / p crosses 1, by log-log interpolation between
        the two bracketing points.  ``None`` when the sweep never crosses.
        """
        usable = sorted((p, pl) for p, pl in points if pl > 0 and p > 0)
        for (p0, l0), (p1, l1) in zip(usable, usable[1:]):
            r0, r1 = math.log(l0 / p0), math.log(l1 / p1)
            if r0 == 0:
                return p0
            if r0 < 0 <= r1:
                x0, x1 = math.log(p0), math.log(p1)
                threshold = math.exp(x0 + (x1 - x0) * (-r0) / (r1 - r0))
                logger.info(f"📊 AnalysisService.pseudo_threshold() → {threshold:.3e}")
                return threshold
        if usable and math.isclose(usable[-1][1], usable[-1][0]):
            return usable[-1][0]
        logger.warning("⚠️ AnalysisService.pseudo_threshold(): p_L/p never crosses 1 in this sweep")
        return None

    @allure.step("ANALYSIS SERVICE: Footprint at p={p}, target {target}")
    def footprint(self, curve: Mapping[int, float], p: float, target: float) -> Footprint:
        """
        Smallest distance whose extrapolated p_L meets ``target``.

        p_L(d) = A · r^k with k = (d + 1) / 2.  One simulated distance fixes
        r = (p_L / p)^(1 / (k − 1)) (A = p / r); two or more are fitted.

        Args:
            curve:  distance → measured p_L at ``p`` (after d rounds of QEC)
            p:      physical error rate of the measurement
            target: required logical error rate

        Returns:
            Footprint: ``finite`` False with a reason above threshold
        """
        if not curve:
            raise ValueError("❌ Footprint needs at least one measured distance")
        if not 0 < target < 1:
            raise ValueError(f"❌ target must lie in (0, 1), got {target}")
        ds = sorted(curve)
        d0 = ds[0]
        if curve[d0] <= target:
            result = Footprint(p, target, d0, footprint_qubits(d0))
            logger.info(f"📊 AnalysisService.footprint() → {result}")
            return result
        if curve[d0] >= p:
            return self._none(p, target, f"p_L={curve[d0]:.3g} >= p at d={d0} (above pseudo-threshold)")

        if len(ds) == 1:
            k0 = _order(d0)
            r  = (curve[d0] / p) ** (1 / (k0 - 1))
            a  = p / r
        else:
            if any(curve[d] <= 0 for d in ds):
                return self._none(p, target, "a measured distance has p_L = 0, refit with more shots")
            slope, intercept = np.polyfit([_order(d) for d in ds], np.log([curve[d] for d in ds]), 1)
            r, a = math.exp(slope), math.exp(intercept)
        if r >= 1:
            return self._none(p, target, "p_L does not decrease with distance")

        k = max(_order(d0), math.ceil(math.log(target / a) / math.log(r) - 1e-9))
        d = 2 * k - 1
        result = Footprint(p, target, d, footprint_qubits(d), extrapolated=d > ds[-1])
        if result.extrapolated:
            logger.warning(f"⚠️ Footprint extrapolated beyond simulated d={ds[-1]}: {result}")
        else:
            logger.info(f"📊 AnalysisService.footprint() → {result}")
        return result

    @allure.step("ANALYSIS SERVICE: Section breakdown on {arch} ({scenario})")
    def section_breakdown(self, arch: str, scenario: str) -> dict[str, dict[str, float]]:
        """
        Gate / transport / recool time (µs) of the three gadget sections.

        Returns:
            dict: section → {"gate", "transport", "recool", "total"}
        """
        schedules = self.section_schedules(arch, scenario)
        table = {name: schedule.breakdown() for name, schedule in schedules.items()}
        for name, row in table.items():
            logger.info(f"📊 {arch}/{scenario} {name:<18} gate={row['gate']:.1f} "
                        f"transport={row['transport']:.1f} recool={row['recool']:.1f} µs")
        return table

    def section_schedules(self, arch: str, scenario: str) -> dict[str, Schedule]:
        return {name: transpile_circuit(circuit, arch, scenario) for name, circuit in sections().items()}

    # ──────────────────────────────────────────────────────────────────────
    # PRIVATE HELPERS
    # ──────────────────────────────────────────────────────────────────────

    @staticmethod
    def _none(p: float, target: float, reason: str) -> Footprint:
        result = Footprint(p, target, None, None, reason=reason)
        logger.warning(f"⚠️ AnalysisService.footprint() → {result}")
        return result


def sections() -> dict[str, Circuit]:
    """Encoder, one flagged stabilizer sub-round, one lattice-surgery joint measurement."""
    return {
        "state_prep":       encoder_circuit("0", noiseless=False, name="state_prep"),
        "stabilizer_round": gen_se_circuit("flagged", basis="X"),
        "lattice_surgery":  gen_lattice_surgery_round(),
    }
