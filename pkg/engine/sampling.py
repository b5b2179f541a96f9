"""
Noise-site sampling
-------------------
Geometric skip sampling of the shots hit by a channel, the dense Bernoulli
oracle it is checked against, and the keyed RNG streams that make a run
independent of how shots are partitioned across workers.
"""

from __future__ import annotations

import logging
import zlib

import numpy as np

logger = logging.getLogger(__name__)

# Shots are simulated in fixed blocks; each block owns its RNG streams.
BLOCK_SIZE = 1 << 16


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise ValueError(f"❌ Probability {p} outside [0, 1]")
    return p


def key_of(name: str) -> int:
    """Stable 32-bit key for a node id or any other string."""
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one (seed, block, node, instruction ...) tuple."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) & 0xFFFFFFFF for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def sample_noise_sites(p: float, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    """
    Ascending shot indices hit by a channel of rate ``p``.

    Each shot is included independently with probability ``p``; the gaps are
    drawn as geometric skips ``floor(log(u) / log(1 - p))`` with ``u`` in (0, 1],
    so the cost is O(n_shots · p) instead of one draw per shot.
    """
    p = _check_probability(p)
    if n_shots <= 0 or p == 0.0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(n_shots, dtype=np.int64)

    log_miss = np.log1p(-p)
    expected = n_shots * p
    chunk    = int(expected + 6.0 * np.sqrt(expected) + 16)

    found    = []
    position = -1
    while True:
        u      = 1.0 - rng.random(chunk)
        skips  = np.minimum(np.floor(np.log(u) / log_miss), n_shots).astype(np.int64)
        sites  = position + np.cumsum(skips + 1)
        inside = sites[sites < n_shots]
        found.append(inside)
        if inside.size < sites.size:
            break
        position = int(sites[-1])
    return np.concatenate(found)


def sample_noise_sites_bernoulli(p: float, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    """Dense reference sampler: one uniform draw per shot."""
    p = _check_probability(p)
    if n_shots <= 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(rng.random(n_shots) < p).astype(np.int64)
