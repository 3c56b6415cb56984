"""Thresholding-greedy machinery.

Greedy sets of a coefficient vector, coordinate projections, and seeded
lower-bound estimators for the quasi-greedy constant
``sup ||f - S_A f|| / ||f||`` and the almost-greedy constant
``sup ||f - S_A f|| / min_{|B| <= |A|} ||f - S_B f||`` (sup over greedy A),
plus the fundamental function ``phi_m = sup_{|A| <= m} ||sum_{j in A} x_j||``
and the democracy ratio.

Estimator tiers, chosen by the basis length d:

* d <= 8   -- exhaustive sweep over the sign grid {-1,0,1}^d and every greedy
              set (for sign vectors every subset of the support is greedy);
              the budget is not consulted.
* d <= 12  -- full sign grid with canonical greedy prefixes plus a seeded
              stochastic tie resolution per sign pattern.
* d >  12  -- seeded random magnitude/sign sampling in blocks, with
              multiplicative coordinate ascent on the block winners.

All reported values are running-max lower bounds and are reproducible for a
fixed seed regardless of CONDGREEDY_THREADS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _search
from ._search import BLOCK, DEFAULT_BUDGET, DEFAULT_SEED, rng_stream
from .bases import BasisTruncation
from .conditionality import Witness
from .spaces import norms

__all__ = [
    "GreedyError",
    "GreedySetFamily",
    "greedy_sets",
    "project",
    "quasi_greedy_constant_lb",
    "almost_greedy_constant_lb",
    "fundamental_function",
    "democracy_ratio",
]

QG_EXHAUSTIVE_MAX_D = 8
QG_GRID_MAX_D = 12
AG_EXHAUSTIVE_MAX_D = 8
AG_EXACT_DENOM_MAX_D = 12
FUND_EXACT_MAX_D = 20
_TINY = 1e-12


class GreedyError(ValueError):
    """Parameter outside the supported range."""


@dataclass(frozen=True)
class GreedySetFamily:
    """Greedy sets of size m for one coefficient vector (1-based indices)."""

    coeffs: tuple
    m: int
    canonical: tuple
    all_sets: tuple | None = None

    @property
    def count(self) -> int:
        return len(self.all_sets) if self.all_sets is not None else 1


def _canonical_order(a: np.ndarray) -> np.ndarray:
    # magnitude descending, index ascending among ties
    return np.argsort(-np.abs(a), kind="stable")


def greedy_sets(coeffs, m: int, mode: str = "canonical") -> GreedySetFamily:
    """Sets A with min_{k in A} |a_k| >= max_{j not in A} |a_j|, |A| = m."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.ndim != 1:
        raise GreedyError("expected a 1-d coefficient vector")
    d = a.size
    if not (0 <= m <= d):
        raise GreedyError(f"m must lie in 0..{d}, got {m}")
    if mode not in ("canonical", "all"):
        raise GreedyError(f"mode must be 'canonical' or 'all', got {mode!r}")
    order = _canonical_order(a)
    canonical = tuple(sorted(int(i) + 1 for i in order[:m]))
    if mode == "canonical":
        return GreedySetFamily(tuple(a.tolist()), m, canonical)
    if m == 0:
        return GreedySetFamily(tuple(a.tolist()), m, canonical, ((),))
    mags = np.abs(a)
    threshold = mags[order[m - 1]]
    above = [int(i) + 1 for i in np.flatnonzero(mags > threshold)]
    ties = [int(i) + 1 for i in np.flatnonzero(mags == threshold)]
    need = m - len(above)
    all_sets = tuple(tuple(sorted(above + list(combo))) for combo in combinations(ties, need))
    return GreedySetFamily(tuple(a.tolist()), m, canonical, all_sets)


def _indices0(A, d: int) -> np.ndarray:
    idx = sorted(int(i) for i in A)
    if len(set(idx)) != len(idx):
        raise GreedyError(f"duplicate indices in {A!r}")
    if idx and (idx[0] < 1 or idx[-1] > d):
        raise GreedyError(f"indices must lie in 1..{d}")
    return np.asarray(idx, dtype=np.int64) - 1


def project(b: BasisTruncation, coeffs, A) -> np.ndarray:
    """S_A f = sum_{j in A} a_j x_j in ambient coordinates (A is 1-based)."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (b.d,):
        raise GreedyError(f"expected {b.d} coefficients")
    idx = _indices0(A, b.d)
    out = np.zeros(b.ambient_dim)
    if idx.size:
        out += b.columns[:, idx] @ a[idx]
    return out


def _is_greedy(a: np.ndarray, idx0: np.ndarray) -> bool:
    mask = np.zeros(a.size, dtype=bool)
    mask[idx0] = True
    inside = np.abs(a[mask]).min() if mask.any() else math.inf
    outside = np.abs(a[~mask]).max() if (~mask).any() else 0.0
    return inside >= outside


def _floor_witness(b: BasisTruncation) -> tuple:
    # f = x_1, A = empty: ||f - 0|| / ||f|| = 1 for any basis
    coeffs = np.zeros(b.d)
    coeffs[0] = 1.0
    return 1.0, Witness(tuple(coeffs.tolist()), (), 1.0, "quasi-greedy")


def _prefix_residual_ratios(b: BasisTruncation, rows: np.ndarray):
    """Residual ratios ||f - S_A f||/||f|| for the d+1 canonical greedy
    prefixes of each coefficient row.  Returns (ratios (n, d+1), order)."""
    n, d = rows.shape
    order = np.argsort(-np.abs(rows), axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.broadcast_to(np.arange(d), (n, d)).copy(), axis=1)
    keep = rank[:, None, :] >= np.arange(d + 1)[None, :, None]
    resid = rows[:, None, :] * keep
    resid_norms = b.synth_norms(resid.reshape(n * (d + 1), d)).reshape(n, d + 1)
    full = b.synth_norms(rows)
    ok = full > _TINY
    ratios = np.where(ok[:, None], resid_norms / np.where(ok, full, 1.0)[:, None], 0.0)
    return ratios, order


def _qg_exhaustive(b: BasisTruncation):
    """Complete sweep over sign vectors and all their greedy sets (d <= 8)."""
    d = b.d
    best, best_wit = _floor_witness(b)
    total = 5**d
    chunk = 1 << 18
    for start in range(0, total, chunk):
        coefs, inmask = _search.pair_chunk(start, min(start + chunk, total), d)
        full = b.synth_norms(coefs)
        resid = b.synth_norms(coefs * ~inmask)
        ok = full > _TINY
        ratios = np.where(ok, resid / np.where(ok, full, 1.0), 0.0)
        i = int(np.argmax(ratios))
        if ratios[i] > best + _TINY:
            best = float(ratios[i])
            A = tuple(int(j) + 1 for j in np.flatnonzero(inmask[i]))
            best_wit = Witness(tuple(coefs[i].tolist()), A, best, "quasi-greedy")
    return best, best_wit


def _qg_sign_grid(b: BasisTruncation, seed: int):
    """Full sign grid with canonical prefixes plus seeded tie subsets."""
    d = b.d
    best, best_wit = _floor_witness(b)
    total = 3**d
    chunk = 1 << 14
    signs = np.array([0.0, 1.0, -1.0])
    for ci, start in enumerate(range(0, total, chunk)):
        rows = signs[_search.digit_rows(start, min(start + chunk, total), d, 3)]
        ratios, order = _prefix_residual_ratios(b, rows)
        i, mrow = np.unravel_index(np.argmax(ratios), ratios.shape)
        if ratios[i, mrow] > best + _TINY:
            best = float(ratios[i, mrow])
            A = tuple(sorted(int(j) + 1 for j in order[i, :mrow]))
            best_wit = Witness(tuple(rows[i].tolist()), A, best, "quasi-greedy")
        # stochastic tie resolution: random sub-supports are greedy sets here
        rng = rng_stream(seed, "qg-ties", ci)
        full = b.synth_norms(rows)
        ok = full > _TINY
        for _ in range(4):
            drop = rng.random(rows.shape) < 0.5
            resid = b.synth_norms(rows * drop)
            ratios1 = np.where(ok, resid / np.where(ok, full, 1.0), 0.0)
            i = int(np.argmax(ratios1))
            if ratios1[i] > best + _TINY:
                best = float(ratios1[i])
                A = tuple(int(j) + 1 for j in np.flatnonzero(~drop[i] & (rows[i] != 0.0)))
                best_wit = Witness(tuple(rows[i].tolist()), A, best, "quasi-greedy")
    return best, best_wit


def _qg_ratio_of(b: BasisTruncation, a: np.ndarray):
    ratios, order = _prefix_residual_ratios(b, a[None, :])
    mrow = int(np.argmax(ratios[0]))
    return float(ratios[0, mrow]), tuple(sorted(int(j) + 1 for j in order[0, :mrow]))


def _qg_random_block(b: BasisTruncation, seed: int, block_i: int):
    d = b.d
    rng = rng_stream(seed, "qg", block_i)
    mags = rng.uniform(0.5, 2.0, size=(BLOCK, d))
    signs = np.where(rng.random((BLOCK, d)) < 0.5, 1.0, -1.0)
    keep = rng.random((BLOCK, d)) < 0.85
    keep[~keep.any(axis=1), 0] = True
    rows = mags * signs * keep
    # half the block: pure sign vectors with random greedy subsets
    half = BLOCK // 2
    rows[half:] = signs[half:] * keep[half:]
    ratios, order = _prefix_residual_ratios(b, rows)
    best = 0.0
    best_pair = None
    i, mrow = np.unravel_index(np.argmax(ratios), ratios.shape)
    best = float(ratios[i, mrow])
    best_pair = (rows[i].copy(), tuple(sorted(int(j) + 1 for j in order[i, :mrow])))
    full = b.synth_norms(rows[half:])
    ok = full > _TINY
    for t in range(4):
        drop = rng.random((BLOCK - half, d)) < 0.5
        resid = b.synth_norms(rows[half:] * drop)
        r1 = np.where(ok, resid / np.where(ok, full, 1.0), 0.0)
        i = int(np.argmax(r1))
        if r1[i] > best + _TINY:
            best = float(r1[i])
            A = tuple(int(j) + 1 for j in np.flatnonzero(~drop[i] & (rows[half + i] != 0.0)))
            best_pair = (rows[half + i].copy(), A)
    # multiplicative ascent on the block winner
    a, A = best_pair
    a = a.copy()
    cur, curA = _qg_ratio_of(b, a)
    if cur > best:
        best, best_pair = cur, (a.copy(), curA)
    for _ in range(_search.MAX_SWEEPS):
        improved = False
        for i in range(d):
            if a[i] == 0.0:
                continue
            for move in (0.5, 2.0):
                cand = a.copy()
                cand[i] *= move
                val, valA = _qg_ratio_of(b, cand)
                if val >= cur + _search.ASCENT_TOL:
                    a, cur, curA = cand, val, valA
                    improved = True
        if not improved:
            break
    if cur > best:
        best, best_pair = cur, (a, curA)
    return best, best_pair


def quasi_greedy_constant_lb(
    b: BasisTruncation, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED
):
    """Lower bound for the quasi-greedy constant with its witness."""
    d = b.d
    if d <= QG_EXHAUSTIVE_MAX_D:
        return _qg_exhaustive(b)
    if d <= QG_GRID_MAX_D:
        return _qg_sign_grid(b, seed)
    best, best_wit = _floor_witness(b)
    n_blocks = max(1, math.ceil(budget / BLOCK))
    val, pair = _search.parallel_block_max(
        lambda i: _qg_random_block(b, seed, i), n_blocks
    )
    if pair is not None and val > best:
        best = val
        best_wit = Witness(tuple(pair[0].tolist()), tuple(pair[1]), val, "quasi-greedy")
    return best, best_wit


# ---------------------------------------------------------------------------
# almost greedy
# ---------------------------------------------------------------------------


def _popcounts(n_bits: int) -> np.ndarray:
    idx = np.arange(1 << n_bits, dtype=np.int64)
    out = np.zeros(idx.size, dtype=np.int64)
    for j in range(n_bits):
        out += (idx >> j) & 1
    return out


def _ag_exhaustive(b: BasisTruncation):
    """Sign-grid sweep with exact denominators (d <= 8)."""
    d = b.d
    best = 1.0
    coeffs0 = np.zeros(d)
    coeffs0[0] = 1.0
    best_wit = Witness(tuple(coeffs0.tolist()), (), 1.0, "almost-greedy", b_indices=())
    mask_cache = {}
    signs = np.array([0.0, 1.0, -1.0])
    for code in range(1, 3**d):
        sig = signs[(code // 3 ** np.arange(d)) % 3]
        supp = np.flatnonzero(sig != 0.0)
        k = supp.size
        if k not in mask_cache:
            mask_cache[k] = (_search.all_subset_masks(k), _popcounts(k))
        masks, sizes = mask_cache[k]
        kept = masks * sig[supp]  # row T: coefficients restricted to T
        nrm = norms(b.space, kept @ b.columns[:, supp].T)
        # min ||f - S_B f|| over |B| <= s equals min over kept sets of size >= k - s
        by_size_desc = np.argsort(-sizes, kind="stable")
        run_min = np.minimum.accumulate(nrm[by_size_desc])
        min_for_keep = np.full(k + 1, np.inf)  # index: required kept size
        for pos, t in enumerate(sizes[by_size_desc]):
            min_for_keep[t] = min(min_for_keep[t], run_min[pos])
        for t in range(k - 1, -1, -1):
            min_for_keep[t] = min(min_for_keep[t], min_for_keep[t + 1])
        full_idx = (1 << k) - 1
        num = nrm[np.arange(1 << k) ^ full_idx]  # residual of A = complement of kept
        s = sizes  # |A| per code
        denom = min_for_keep[np.maximum(k - s, 0)]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where((denom > _TINY) & (num > _TINY), num / denom, 0.0)
        i = int(np.argmax(ratios))
        if ratios[i] > best + _TINY:
            best = float(ratios[i])
            a_bits = i
            A = tuple(int(supp[j]) + 1 for j in range(k) if (a_bits >> j) & 1)
            # witness for the minimising B
            cand = np.flatnonzero(sizes >= k - sizes[i])
            bsel = cand[int(np.argmin(nrm[cand]))]
            Bset = tuple(int(supp[j]) + 1 for j in range(k) if not ((bsel >> j) & 1))
            best_wit = Witness(tuple(sig.tolist()), A, best, "almost-greedy", b_indices=Bset)
    return best, best_wit


def _ag_random_block(b: BasisTruncation, seed: int, block_i: int, exact_denom: bool):
    d = b.d
    rng = rng_stream(seed, "ag", block_i)
    mags = rng.uniform(0.5, 2.0, size=(BLOCK, d))
    sig = np.where(rng.random((BLOCK, d)) < 0.5, 1.0, -1.0)
    rows = mags * sig
    ratios, order = _prefix_residual_ratios(b, rows)  # numerators / ||f||
    full = b.synth_norms(rows)
    resid = ratios * full[:, None]  # ||f - S_{A_m} f|| for prefixes
    if exact_denom:
        masks = _search.all_subset_masks(d)
        sizes = _popcounts(d)
    best = 0.0
    best_payload = None
    for i in range(BLOCK):
        if exact_denom:
            nrm = b.synth_norms((1.0 - masks) * rows[i])  # drop-B residuals
            by_size = np.argsort(sizes, kind="stable")
            run = np.minimum.accumulate(nrm[by_size])
            denom = np.empty(d + 1)
            seen = -1
            for pos in range(len(by_size)):
                t = sizes[by_size[pos]]
                while seen < t:
                    seen += 1
                    denom[seen] = run[pos]
            denom = np.minimum.accumulate(denom)
            bsets = None
        else:
            # candidate minimisers: greedy prefixes and seeded random subsets;
            # the realising set rides along so the witness can replay the value
            denom = np.empty(d + 1)
            bsets = [()] * (d + 1)
            run, run_set = math.inf, ()
            for t in range(d + 1):
                if resid[i, t] < run:
                    run = float(resid[i, t])
                    run_set = tuple(sorted(int(j) + 1 for j in order[i, :t]))
                denom[t] = run
                bsets[t] = run_set
            extra = rng.random((32, d)) < rng.random((32, 1))
            nrm_extra = b.synth_norms(rows[i] * ~extra)
            ssz = extra.sum(axis=1)
            for row in np.argsort(ssz, kind="stable"):
                v = float(nrm_extra[row])
                for t in range(int(ssz[row]), d + 1):
                    if v < denom[t]:
                        denom[t] = v
                        bsets[t] = tuple(int(x) + 1 for x in np.flatnonzero(extra[row]))
        for m in range(d + 1):
            if denom[m] <= _TINY or resid[i, m] <= _TINY:
                continue
            r = resid[i, m] / denom[m]
            if r > best + _TINY:
                best = float(r)
                A = tuple(sorted(int(j) + 1 for j in order[i, :m]))
                Bm = bsets[m] if bsets is not None else None
                best_payload = (rows[i].copy(), A, m, float(denom[m]), Bm)
    if best_payload is None:
        return 0.0, None
    a, A, m, dval, Bset = best_payload
    if Bset is None:
        # exact-denominator tier: recover a minimising B by enumeration
        Bset = _denominator_set(b, a, m, dval)
    return best, (a, A, Bset)


def _denominator_set(b: BasisTruncation, a: np.ndarray, m: int, target: float):
    """Find a set B, |B| <= m, with ||f - S_B f|| equal to the located minimum."""
    d = b.d
    if d <= AG_EXACT_DENOM_MAX_D:
        masks = _search.all_subset_masks(d)
        sizes = _popcounts(d)
        sel = sizes <= m
        nrm = b.synth_norms((1.0 - masks[sel]) * a)
        j = int(np.argmin(np.abs(nrm - target)))
        code = np.flatnonzero(sel)[j]
        return tuple(int(i) + 1 for i in range(d) if (code >> i) & 1)
    order = _canonical_order(a)
    for t in range(m + 1):
        keep = np.ones(d, dtype=bool)
        keep[order[:t]] = False
        if abs(float(b.synth_norms((a * keep)[None])[0]) - target) <= 1e-9 * max(1.0, target):
            return tuple(sorted(int(i) + 1 for i in order[:t]))
    return tuple(sorted(int(i) + 1 for i in order[:m]))


def almost_greedy_constant_lb(
    b: BasisTruncation, budget: int = 512, seed: int = DEFAULT_SEED
):
    """Lower bound for the almost-greedy constant with its witness.

    Denominators are minimised exactly over every candidate set for
    d <= 12 and by seeded candidate search beyond that, so each reported
    ratio is a certified lower bound for its (f, A) pair.
    """
    d = b.d
    if d <= AG_EXHAUSTIVE_MAX_D:
        return _ag_exhaustive(b)
    exact = d <= AG_EXACT_DENOM_MAX_D
    n_blocks = max(1, math.ceil(budget / BLOCK))
    val, payload = _search.parallel_block_max(
        lambda i: _ag_random_block(b, seed, i, exact), n_blocks
    )
    coeffs0 = np.zeros(d)
    coeffs0[0] = 1.0
    best, best_wit = 1.0, Witness(tuple(coeffs0.tolist()), (), 1.0, "almost-greedy", b_indices=())
    if payload is not None and val > best:
        a, A, Bset = payload
        if val == math.inf:
            return math.inf, Witness(tuple(a.tolist()), A, math.inf, "almost-greedy", b_indices=Bset)
        best, best_wit = val, Witness(tuple(a.tolist()), A, val, "almost-greedy", b_indices=Bset)
    return best, best_wit


# ---------------------------------------------------------------------------
# fundamental function and democracy
# ---------------------------------------------------------------------------


def _indicator_rows(d: int, combos) -> np.ndarray:
    combos = list(combos)
    rows = np.zeros((len(combos), d))
    for i, c in enumerate(combos):
        rows[i, list(c)] = 1.0
    return rows


def _scan_extremum(vals: np.ndarray, want_max: bool, cur: float):
    i = int(np.argmax(vals) if want_max else np.argmin(vals))
    v = float(vals[i])
    better = v > cur if want_max else v < cur
    return (v, i) if better else (cur, -1)


def _sum_norm_extremum(b: BasisTruncation, m: int, want_max: bool, exact_sizes):
    """Extremal ||sum_{j in A} x_j|| over |A| in ``exact_sizes`` (0-based sets in)."""
    best = -math.inf if want_max else math.inf
    best_set = ()
    for k in exact_sizes:
        if k == 0:
            continue
        buf = []

        def flush():
            nonlocal best, best_set, buf
            if buf:
                vals = b.synth_norms(_indicator_rows(b.d, buf))
                best, i = _scan_extremum(vals, want_max, best)
                if i >= 0:
                    best_set = buf[i]
                buf = []

        for c in combinations(range(b.d), k):
            buf.append(c)
            if len(buf) == 4096:
                flush()
        flush()
    return best, tuple(int(i) + 1 for i in best_set)


def _sum_norm_search(b: BasisTruncation, m: int, want_max: bool, budget: int, seed: int):
    d = b.d
    best = -math.inf if want_max else math.inf
    best_set0: tuple = ()
    # greedy growth (for the minimum only the final size-m set counts)
    chosen: list = []
    cur = np.zeros(b.ambient_dim)
    for _ in range(m):
        rest = [j for j in range(d) if j not in chosen]
        cand = cur[None, :] + b.columns[:, rest].T
        vals = norms(b.space, cand)
        i = int(np.argmax(vals) if want_max else np.argmin(vals))
        chosen.append(rest[i])
        cur = cand[i]
        if want_max or len(chosen) == m:
            v = float(vals[i])
            if (want_max and v > best) or (not want_max and v < best):
                best = v
                best_set0 = tuple(sorted(chosen))
    # seeded random subsets
    rng = rng_stream(seed, "fund", int(want_max), m)
    n = max(1, budget)
    sizes = rng.integers(1, m + 1, size=n) if want_max else np.full(n, m)
    rows = np.zeros((n, d))
    for i in range(n):
        rows[i, rng.permutation(d)[: sizes[i]]] = 1.0
    vals = norms(b.space, rows @ b.columns.T)
    best, i = _scan_extremum(vals, want_max, best)
    if i >= 0:
        best_set0 = tuple(int(j) for j in np.flatnonzero(rows[i]))
    return best, tuple(j + 1 for j in best_set0)


def fundamental_function(
    b: BasisTruncation,
    m: int,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> float:
    """phi_m = sup ||sum_{j in A} x_j|| over |A| <= m (exact needs d <= 20)."""
    if not (1 <= m <= b.d):
        raise GreedyError(f"m must lie in 1..{b.d}")
    if mode == "exact":
        if b.d > FUND_EXACT_MAX_D:
            raise GreedyError(f"exact mode supports d <= {FUND_EXACT_MAX_D}; use mode='search'")
        val, _ = _sum_norm_extremum(b, m, True, range(1, m + 1))
        return val
    if mode != "search":
        raise GreedyError(f"mode must be 'exact' or 'search', got {mode!r}")
    val, _ = _sum_norm_search(b, m, True, budget, seed)
    return val


def democracy_ratio(
    b: BasisTruncation,
    m: int,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    seed: int = DEFAULT_SEED,
) -> float:
    """phi_m divided by the minimal ||sum_{j in A} x_j|| over |A| = m.

    In search mode the numerator is a lower estimate and the denominator an
    upper one, so the returned value is a lower estimate of the true ratio.
    """
    if not (1 <= m <= b.d):
        raise GreedyError(f"m must lie in 1..{b.d}")
    if mode == "exact":
        if b.d > FUND_EXACT_MAX_D:
            raise GreedyError(f"exact mode supports d <= {FUND_EXACT_MAX_D}; use mode='search'")
        top, _ = _sum_norm_extremum(b, m, True, range(1, m + 1))
        low, _ = _sum_norm_extremum(b, m, False, [m])
    else:
        top, _ = _sum_norm_search(b, m, True, budget, seed)
        low, _ = _sum_norm_search(b, m, False, budget, seed)
    if low <= _TINY:
        raise GreedyError("degenerate minimal sum norm")
    return top / low
