"""Shared machinery for the lower-bound searches.

Determinism contract: every random draw comes from a counter-based Philox
stream keyed by (seed, tag, indices), so results do not depend on chunk
sizes, thread counts, or evaluation order.  Estimates are running maxima and
sample index ranges are nested in the budget, which makes every estimator
monotone in its budget.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

DEFAULT_SEED = 0xC0FFEE
DEFAULT_BUDGET = 2048
BLOCK = 256  # coefficient samples per random block
ASCENT_TOL = 1e-10
MAX_SWEEPS = 200


def thread_count() -> int:
    """Worker cap from CONDGREEDY_THREADS (default 1)."""
    raw = os.environ.get("CONDGREEDY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def rng_stream(seed: int, *key) -> np.random.Generator:
    """Philox generator keyed by seed plus arbitrary (str|int) parts."""
    parts = [int(seed) & 0xFFFFFFFF]
    for part in key:
        if isinstance(part, str):
            parts.append(zlib.crc32(part.encode("utf-8")))
        else:
            parts.append(int(part) & 0xFFFFFFFF)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(parts)))


def digit_rows(start: int, stop: int, n_digits: int, base: int) -> np.ndarray:
    """Rows start..stop-1 of the base-``base`` digit table with ``n_digits``."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n_digits), dtype=np.int8)
    for j in range(n_digits):
        out[:, j] = (idx // base**j) % base
    return out


# base-5 joint coding of (coefficient, membership) per coordinate:
#   0 -> coeff  0 (membership irrelevant)
#   1 -> coeff +1, in the set        2 -> coeff +1, out
#   3 -> coeff -1, in the set        4 -> coeff -1, out
PAIR_COEF = np.array([0, 1, 1, -1, -1], dtype=np.int8)
PAIR_IN = np.array([False, True, False, True, False])


def pair_chunk(start: int, stop: int, m: int):
    digits = digit_rows(start, stop, m, 5)
    return PAIR_COEF[digits].astype(np.float64), PAIR_IN[digits]


def all_subset_masks(m: int) -> np.ndarray:
    """All 2^m membership rows as float 0/1, one subset per row."""
    idx = np.arange(2**m, dtype=np.int64)
    out = np.empty((idx.size, m), dtype=np.float64)
    for j in range(m):
        out[:, j] = (idx >> j) & 1
    return out


class TopK:
    """Running best-K (ratio, payload-rows) tracker with deterministic ties."""

    def __init__(self, k: int, width: int):
        self.k = k
        self.ratios = np.empty(0)
        self.coefs = np.empty((0, width))
        self.masks = np.empty((0, width), dtype=bool)

    def update(self, ratios, coefs, masks):
        if ratios.size == 0:
            return
        if ratios.size > self.k:
            part = np.argpartition(-ratios, self.k - 1)[: self.k]
            part = part[np.argsort(-ratios[part], kind="stable")]
            ratios, coefs, masks = ratios[part], coefs[part], masks[part]
        self.ratios = np.concatenate([self.ratios, ratios])
        self.coefs = np.vstack([self.coefs, coefs])
        self.masks = np.vstack([self.masks, masks.astype(bool)])
        order = np.argsort(-self.ratios, kind="stable")[: self.k]
        self.ratios = self.ratios[order]
        self.coefs = self.coefs[order]
        self.masks = self.masks[order]

    def best(self):
        if self.ratios.size == 0:
            return 0.0, None, None
        return float(self.ratios[0]), self.coefs[0], self.masks[0]

    def distinct_starts(self, tol: float = 1e-13):
        """Entries with pairwise-distinct ratios; trims redundant ascent seeds."""
        picked = []
        for i in range(self.ratios.size):
            if all(abs(self.ratios[i] - self.ratios[j]) > tol for j in picked):
                picked.append(i)
        return [(self.coefs[i].copy(), self.masks[i].copy()) for i in picked]


def parallel_block_max(block_fn, n_blocks: int):
    """Evaluate ``block_fn(i)`` for i in range(n_blocks) and keep the best.

    ``block_fn`` returns (ratio, payload).  Ties break toward the lowest
    block index, so the result is identical under any thread count.
    """
    if n_blocks <= 0:
        return 0.0, None
    workers = min(thread_count(), n_blocks)
    if workers == 1:
        results = [block_fn(i) for i in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(block_fn, range(n_blocks)))
    best_i = max(range(n_blocks), key=lambda i: (results[i][0], -i))
    return results[best_i]
