"""
Brute-force maximum-likelihood decoding
---------------------------------------
Validation oracle for small CSS codes.  X and Z errors are decoded
independently (independent flip model): every error with the observed
syndrome is scored by p^w (1-p)^(n-w), the weights are summed per logical
coset, and the most likely coset wins.  The returned correction is the
minimum-weight member of that coset.  Ties between cosets go to the coset
of the minimum-weight error (the identity-logical choice).
"""

from __future__ import annotations

import logging

import numpy as np

from codes.color_code import StabilizerCode
from engine.pauli_frame import PauliFrame

logger = logging.getLogger(__name__)

MAX_QUBITS = 20


def _check_size(code: StabilizerCode) -> None:
    if code.n > MAX_QUBITS:
        raise ValueError(f"❌ Brute-force decoding refused for n={code.n} > {MAX_QUBITS}")


def _all_errors(n: int) -> np.ndarray:
    return ((np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _decode_one(checks: np.ndarray, logical: np.ndarray, syndrome, p: float, errors: np.ndarray) -> frozenset[int]:
    target = np.asarray(syndrome, dtype=np.int64)
    if target.size != checks.shape[0]:
        raise ValueError(f"❌ Syndrome has {target.size} bits, code has {checks.shape[0]} checks")
    match = errors[((errors.astype(np.int64) @ checks.T.astype(np.int64)) % 2 == target).all(axis=1)]
    if match.shape[0] == 0:
        raise ValueError(f"❌ Syndrome {tuple(int(b) for b in target)} is not reachable")

    weight = match.sum(axis=1)
    n      = errors.shape[1]
    if p <= 0:
        score = (weight == weight.min()).astype(float)
    else:
        p     = min(p, 0.5)
        score = np.power(p, weight) * np.power(1 - p, n - weight)
    coset = (match.astype(np.int64) @ logical.astype(np.int64)) % 2

    # lexicographic order on supports equals descending order of the bit-reversed integer
    order    = np.lexsort((-(match * (1 << np.arange(n)[::-1])).sum(axis=1), weight))
    lightest = match[order[0]]
    base     = int(coset[order[0]])
    totals   = [float(score[coset == c].sum()) for c in (0, 1)]
    chosen   = base if totals[base] >= totals[1 - base] else 1 - base

    members = order[coset[order] == chosen]
    best    = match[members[0]] if members.size else lightest
    return frozenset(int(q) for q in np.flatnonzero(best))


def brute_force_ml_decode(code: StabilizerCode, syndromes, p: float | tuple[float, float] = 0.01) -> PauliFrame:
    """
    ``syndromes`` = (syndrome of the X errors under the Z checks, syndrome of
    the Z errors under the X checks); ``p`` is one flip rate or (p_x, p_z).
    Returns the correction as a frame.
    """
    _check_size(code)
    x_syndrome, z_syndrome = syndromes
    p_x, p_z = (p, p) if np.isscalar(p) else p
    errors   = _all_errors(code.n)

    z_logical = np.zeros(code.n, dtype=np.uint8)
    z_logical[sorted(code.z_logical)] = 1
    x_logical = np.zeros(code.n, dtype=np.uint8)
    x_logical[sorted(code.x_logical)] = 1

    fix_x = _decode_one(code.hz, z_logical, x_syndrome, p_x, errors)
    fix_z = _decode_one(code.hx, x_logical, z_syndrome, p_z, errors)
    logger.debug(f"🔧 ML decode {tuple(x_syndrome)}/{tuple(z_syndrome)} → X{sorted(fix_x)} Z{sorted(fix_z)}")
    return PauliFrame.from_supports(x_support=fix_x, z_support=fix_z)
