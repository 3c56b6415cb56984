"""Conditionality constants k_m and L_m with growth-fit reporting.

L_m is the supremum of ||S_A f|| / ||f|| over vectors f supported in the
first m basis positions; since S_A f = S_{A cap [1..m]} f for such f, the
search restricts A to subsets of {1..m} without loss.  k_m takes the
supremum over |A| <= m with unrestricted support instead.

Three evaluation routes, all returning certified lower bounds with a
witness:

* ``L_m_oracle``   -- reference sweep: structured coefficient profiles at
  every support size up to m, the recipe's template pairs, the full joint
  grid over {-1,0,1} coefficients and subset membership when 5^m is small
  enough (deterministic reduced sampling otherwise), then multiplicative
  coordinate ascent on the leading candidates, each rescanned against all
  2^m subsets.  Deterministic; no user seed enters.
* ``L_m_estimate`` -- the oracle route when m is inside the guard and the
  budget covers the full grid; otherwise template evaluation plus seeded
  random sampling with ascent against a fixed family of structured sets.
* ``k_m_estimate`` -- like the estimate but with full-support samples and
  sets capped at m elements; coincides with L_d when m = d.

Estimates are reproducible for fixed (inputs, seed) under any thread
count, and never decrease when the budget grows with the seed held fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _search
from ._search import (
    BLOCK,
    DEFAULT_BUDGET,
    DEFAULT_SEED,
    TopK,
    all_subset_masks,
    pair_chunk,
    parallel_block_max,
    rng_stream,
)
from .bases import BasisTruncation, _prefix_restriction, block_offsets, interleave_positions
from .spaces import norms

__all__ = [
    "ConditionalityError",
    "Witness",
    "witness_from_doc",
    "verify_witness",
    "sa_ratio",
    "L_m_oracle",
    "L_m_estimate",
    "k_m_estimate",
    "template_pairs",
    "k_template_pairs",
    "recipe_dim",
    "interleave_pair",
    "block_embed_pair",
    "GrowthTarget",
    "GrowthReport",
    "growth_fit",
    "target_doubling",
    "lb_ladder",
]

DEFAULT_GUARD = 12
FULL_GRID_CAP = 10_000_000  # largest 5^m swept jointly; m <= 10
REDUCED_PAIRS = 131_072
ORACLE_TOPK = 6
_ORACLE_SEED = 0x0C0FFEE  # internal; keeps the reference sweep user-seed free
_TINY = 1e-12


class ConditionalityError(ValueError):
    """Parameter outside the supported range."""


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A certified ratio: coefficients, the projected set A (1-based) and the
    kind of ratio.  Projection kinds (oracle/template/random) certify
    ||S_A f||/||f||; kind quasi-greedy certifies ||f - S_A f||/||f||; kind
    almost-greedy adds the comparison set B for ||f - S_A f||/||f - S_B f||.
    """

    coeffs: tuple
    indices: tuple
    ratio: float
    kind: str
    b_indices: tuple | None = None

    def to_doc(self) -> dict:
        doc = {
            "coeffs": [float(x) for x in self.coeffs],
            "A": [int(i) for i in self.indices],
            "ratio": self.ratio,
            "kind": self.kind,
        }
        if self.b_indices is not None:
            doc["B"] = [int(i) for i in self.b_indices]
        return doc


def witness_from_doc(doc) -> Witness:
    b = doc.get("B")
    return Witness(
        tuple(float(x) for x in doc["coeffs"]),
        tuple(int(i) for i in doc["A"]),
        float(doc["ratio"]),
        str(doc["kind"]),
        None if b is None else tuple(int(i) for i in b),
    )


def _restrict(coeffs: np.ndarray, indices) -> np.ndarray:
    out = np.zeros_like(coeffs)
    idx = [int(i) - 1 for i in indices]
    if idx:
        out[idx] = coeffs[idx]
    return out


def sa_ratio(b: BasisTruncation, coeffs, indices) -> float:
    """||S_A f|| / ||f|| for f synthesised from ``coeffs``."""
    a = np.asarray(coeffs, dtype=np.float64)
    if a.shape != (b.d,):
        raise ConditionalityError(f"expected {b.d} coefficients")
    pair = np.vstack([_restrict(a, indices), a])
    num, den = b.synth_norms(pair)
    if den <= _TINY:
        raise ConditionalityError("zero vector has no projection ratio")
    return float(num) / float(den)


def verify_witness(b: BasisTruncation, w: Witness) -> float:
    """Recompute the witness ratio from scratch (same norm pipeline)."""
    a = np.asarray(w.coeffs, dtype=np.float64)
    if w.kind in ("oracle", "template", "random"):
        return sa_ratio(b, a, w.indices)
    rows = [a - _restrict(a, w.indices)]
    if w.kind == "quasi-greedy":
        rows.append(a)
    elif w.kind == "almost-greedy":
        rows.append(a - _restrict(a, w.b_indices or ()))
    else:
        raise ConditionalityError(f"unknown witness kind {w.kind!r}")
    num, den = b.synth_norms(np.vstack(rows))
    if den <= _TINY:
        raise ConditionalityError("witness denominator vanishes")
    return float(num) / float(den)


# ---------------------------------------------------------------------------
# coefficient profiles and structured sets
# ---------------------------------------------------------------------------


def _level(j: int) -> int:
    return j.bit_length() - 1


def profile_ones(m: int) -> np.ndarray:
    return np.ones(m)


def profile_alternating(m: int) -> np.ndarray:
    return (-1.0) ** np.arange(m)


def profile_alternating_half_last(m: int) -> np.ndarray:
    a = profile_alternating(m)
    a[-1] *= 0.5
    return a


def profile_dyadic_levels(m: int) -> np.ndarray:
    return np.array([2.0 ** -_level(j) for j in range(1, m + 1)])


def profile_geometric(m: int) -> np.ndarray:
    return 2.0 ** -np.arange(m, dtype=np.float64)


PROFILES = (
    profile_ones,
    profile_alternating,
    profile_alternating_half_last,
    profile_dyadic_levels,
    profile_geometric,
)


def parity_set(m: int, parity: int) -> tuple:
    return tuple(j for j in range(1, m + 1) if j % 2 == parity % 2)


def level_parity_set(m: int, parity: int) -> tuple:
    return tuple(j for j in range(1, m + 1) if _level(j) % 2 == parity % 2)


def _set_to_mask(m: int, indices) -> np.ndarray:
    mask = np.zeros(m)
    for i in indices:
        mask[int(i) - 1] = 1.0
    return mask


def _structured_masks(m: int) -> np.ndarray:
    half = m // 2
    sets = [
        parity_set(m, 1),
        parity_set(m, 0),
        level_parity_set(m, 0),
        level_parity_set(m, 1),
        tuple(range(1, half + 1)),
        tuple(range(half + 1, m + 1)),
        tuple(range(1, m + 1)),
    ]
    rows = {tuple(_set_to_mask(m, s)) for s in sets if s}
    return np.array(sorted(rows))


# ---------------------------------------------------------------------------
# support-restricted evaluation
# ---------------------------------------------------------------------------


class _SupportEval:
    """Norm evaluator for coefficient rows supported on the first m columns.

    Ambient coordinates never touched by those columns are trimmed when the
    ambient norm permits it, which keeps oracle sweeps on a wide basis cheap
    and leaves every norm value unchanged.
    """

    def __init__(self, b: BasisTruncation, m: int):
        sub, space = _prefix_restriction(b, m)
        self.m = m
        self.space = space
        self.colsT = np.ascontiguousarray(sub.T)

    def coef_norms(self, rows: np.ndarray) -> np.ndarray:
        return norms(self.space, rows @ self.colsT)

    def mask_sweep(self, a: np.ndarray, masks: np.ndarray, chunk: int = 8192):
        """Best ||S_A f||/||f|| over the mask rows; returns (ratio, row index)."""
        den = float(self.coef_norms(a[None, :])[0])
        if den <= _TINY:
            return 0.0, -1
        best, best_i = -1.0, -1
        for start in range(0, masks.shape[0], chunk):
            nums = self.coef_norms(masks[start : start + chunk] * a)
            i = int(np.argmax(nums))
            if nums[i] > best:
                best, best_i = float(nums[i]), start + i
        return best / den, best_i


def _ascend_masks(ev: _SupportEval, a0: np.ndarray, masks: np.ndarray):
    """Coordinate-wise multiplicative ascent, rescanning every mask per step.

    A step is accepted only when the ratio improves by >= 1e-10, so the walk
    terminates; the result is a certified (f, A) pair like any other sample.
    """
    a = np.asarray(a0, dtype=np.float64).copy()
    cur, mi = ev.mask_sweep(a, masks)
    if mi < 0:
        return cur, a, mi
    for _ in range(_search.MAX_SWEEPS):
        improved = False
        for i in range(ev.m):
            base = a[i]
            moves = (base * 0.5, base * 2.0, -base, 0.0) if base != 0.0 else (1.0, -1.0)
            for val in moves:
                cand = a.copy()
                cand[i] = val
                if not cand.any():
                    continue
                r, mj = ev.mask_sweep(cand, masks)
                if r >= cur + _search.ASCENT_TOL:
                    a, cur, mi = cand, r, mj
                    improved = True
                    break
        if not improved:
            break
    return cur, a, mi


def _mask_to_set(mask_row) -> tuple:
    return tuple(int(j) + 1 for j in np.flatnonzero(np.asarray(mask_row) > 0.5))


class _Best:
    """Running (ratio, coeffs-on-support, A) maximiser with padding to d."""

    def __init__(self, d: int, kind: str):
        self.d = d
        self.kind = kind
        self.ratio = 0.0
        self.coeffs: np.ndarray | None = None
        self.indices: tuple = ()

    def offer(self, ratio: float, coeffs: np.ndarray, indices, kind: str | None = None):
        if self.coeffs is not None and ratio <= self.ratio:
            return
        self.ratio = float(ratio)
        self.coeffs = np.asarray(coeffs, dtype=np.float64).copy()
        self.indices = tuple(sorted(int(i) for i in indices))
        if kind is not None:
            self.kind = kind

    def witness(self) -> Witness:
        padded = np.zeros(self.d)
        if self.coeffs is not None:
            padded[: self.coeffs.size] = self.coeffs
        return Witness(tuple(padded.tolist()), self.indices, self.ratio, self.kind)


# ---------------------------------------------------------------------------
# L_m oracle
# ---------------------------------------------------------------------------


def L_m_oracle(b: BasisTruncation, m: int, guard: int = DEFAULT_GUARD):
    """Reference lower bound for L_m; deterministic, independent of any seed."""
    if not (1 <= m <= b.d):
        raise ConditionalityError(f"m must lie in 1..{b.d}, got {m}")
    if m > guard:
        raise ConditionalityError(f"oracle refused: m={m} exceeds guard {guard}")
    ev = _SupportEval(b, m)
    masks = all_subset_masks(m)
    best = _Best(b.d, "oracle")
    top = TopK(ORACLE_TOPK, m)

    # floor: A = {1..m} reproduces f itself
    a0 = np.zeros(m)
    a0[0] = 1.0
    best.offer(1.0, a0, tuple(range(1, m + 1)))

    # structured profiles at every support size (keeps the values monotone in m)
    for s in range(1, m + 1):
        ev_s = ev if s == m else _SupportEval(b, s)
        masks_s = masks if s == m else all_subset_masks(s)
        for profile in PROFILES:
            a_s = profile(s)
            r, mi = ev_s.mask_sweep(a_s, masks_s)
            if mi >= 0:
                a_full = np.zeros(m)
                a_full[:s] = a_s
                best.offer(r, a_full, _mask_to_set(masks_s[mi]))
                top.update(np.array([r]), a_full[None, :], _pad_mask(masks_s[mi], m)[None, :])

    # recipe templates, swept over the same support sizes
    for s in range(1, m + 1):
        for a_t, A_t in template_pairs(b.recipe, b.d, s):
            r = sa_ratio(b, a_t, A_t)
            a_m = np.asarray(a_t[:m], dtype=np.float64)
            best.offer(r, a_m, A_t)
            top.update(np.array([r]), a_m[None, :], _set_to_mask(m, A_t)[None, :] > 0.5)

    # joint coefficient/membership grid
    if 5**m <= FULL_GRID_CAP:
        total = 5**m
        step = 1 << 18
        for start in range(0, total, step):
            coefs, inmask = pair_chunk(start, min(start + step, total), m)
            dens = ev.coef_norms(coefs)
            nums = ev.coef_norms(coefs * inmask)
            ok = dens > _TINY
            ratios = np.where(ok, nums / np.where(ok, dens, 1.0), 0.0)
            i = int(np.argmax(ratios))
            best.offer(ratios[i], coefs[i], _mask_to_set(inmask[i]))
            top.update(ratios[ok], coefs[ok], inmask[ok])
    else:
        rng = rng_stream(_ORACLE_SEED, "oracle-pairs", m)
        for _ in range(REDUCED_PAIRS // 4096):
            coefs = rng.integers(-1, 2, size=(4096, m)).astype(np.float64)
            inmask = rng.random((4096, m)) < 0.5
            dens = ev.coef_norms(coefs)
            nums = ev.coef_norms(coefs * inmask)
            ok = dens > _TINY
            ratios = np.where(ok, nums / np.where(ok, dens, 1.0), 0.0)
            i = int(np.argmax(ratios))
            best.offer(ratios[i], coefs[i], _mask_to_set(inmask[i]))
            top.update(ratios[ok], coefs[ok], inmask[ok])

    # ascent from the distinct leaders, rescanning all subsets each step
    for a_start, _ in top.distinct_starts():
        r, a_fin, mi = _ascend_masks(ev, a_start, masks)
        if mi >= 0:
            best.offer(r, a_fin, _mask_to_set(masks[mi]))

    return best.ratio, best.witness()


def _pad_mask(mask_row: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=bool)
    out[: mask_row.size] = mask_row > 0.5
    return out


# ---------------------------------------------------------------------------
# L_m estimate
# ---------------------------------------------------------------------------


def _sets_sweep(ev: _SupportEval, rows: np.ndarray, sets: np.ndarray):
    """Ratio table over sample rows x candidate sets: (n, S) ratios."""
    n, m = rows.shape
    dens = ev.coef_norms(rows)
    prods = rows[:, None, :] * sets[None, :, :]
    nums = ev.coef_norms(prods.reshape(n * sets.shape[0], m)).reshape(n, sets.shape[0])
    ok = dens > _TINY
    return np.where(ok[:, None], nums / np.where(ok, dens, 1.0)[:, None], 0.0)


def _ascend_sets(ev: _SupportEval, a0: np.ndarray, sets: np.ndarray):
    """Ascent against a fixed small family of sets (large-m workhorse)."""
    a = np.asarray(a0, dtype=np.float64).copy()
    ratios = _sets_sweep(ev, a[None, :], sets)[0]
    si = int(np.argmax(ratios))
    cur = float(ratios[si])
    for _ in range(_search.MAX_SWEEPS):
        improved = False
        for i in range(ev.m):
            base = a[i]
            moves = (base * 0.5, base * 2.0, -base, 0.0) if base != 0.0 else (1.0, -1.0)
            for val in moves:
                cand = a.copy()
                cand[i] = val
                if not cand.any():
                    continue
                cr = _sets_sweep(ev, cand[None, :], sets)[0]
                cj = int(np.argmax(cr))
                if cr[cj] >= cur + _search.ASCENT_TOL:
                    a, cur, si = cand, float(cr[cj]), cj
                    improved = True
                    break
        if not improved:
            break
    return cur, a, si


def _L_block(ev: _SupportEval, sets: np.ndarray, seed: int, bi: int):
    m = ev.m
    rng = rng_stream(seed, "L", m, bi)
    mags = rng.uniform(0.5, 2.0, size=(BLOCK, m))
    signs = np.where(rng.random((BLOCK, m)) < 0.5, 1.0, -1.0)
    keep = rng.random((BLOCK, m)) < 0.8
    keep[~keep.any(axis=1), 0] = True
    rows = mags * signs * keep
    half = BLOCK // 2
    rows[half:] = signs[half:] * keep[half:]
    extra = (rng.random((8, m)) < 0.5).astype(np.float64)
    block_sets = np.vstack([sets, extra])
    ratios = _sets_sweep(ev, rows, block_sets)
    i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
    r, a, si = _ascend_sets(ev, rows[i], block_sets)
    if r >= ratios[i, j]:
        return r, (a, block_sets[si])
    return float(ratios[i, j]), (rows[i].copy(), block_sets[j])


def L_m_estimate(
    b: BasisTruncation,
    m: int,
    budget: int | None = None,
    seed: int = DEFAULT_SEED,
    templates=None,
    guard: int = DEFAULT_GUARD,
):
    """Lower bound for L_m from templates plus seeded search (oracle route
    when m is within the guard and the budget covers the full grid)."""
    if not (1 <= m <= b.d):
        raise ConditionalityError(f"m must lie in 1..{b.d}, got {m}")
    pairs = list(templates) if templates is not None else []
    pairs.extend(template_pairs(b.recipe, b.d, m))

    if m <= guard and (budget is None or budget >= 5**m):
        value, wit = L_m_oracle(b, m, guard=guard)
        best = _Best(b.d, wit.kind)
        best.offer(value, np.asarray(wit.coeffs)[:m], wit.indices)
        for a_t, A_t in pairs:
            best.offer(sa_ratio(b, a_t, A_t), np.asarray(a_t)[:m], A_t, kind="template")
        return best.ratio, best.witness()

    ev = _SupportEval(b, m)
    best = _Best(b.d, "template")
    a0 = np.zeros(m)
    a0[0] = 1.0
    best.offer(1.0, a0, tuple(range(1, m + 1)), kind="random")

    sets = [_structured_masks(m)]
    for a_t, A_t in pairs:
        best.offer(sa_ratio(b, a_t, A_t), np.asarray(a_t)[:m], A_t, kind="template")
        sets.append(_set_to_mask(m, A_t)[None, :])
    sets = np.unique(np.vstack(sets), axis=0)

    # deterministic ascent from the best template before spending the budget
    if best.coeffs is not None and best.coeffs.any():
        r, a_fin, si = _ascend_sets(ev, best.coeffs, sets)
        if r > best.ratio:
            best.offer(r, a_fin, _mask_to_set(sets[si]), kind="random")

    n_blocks = max(1, math.ceil((budget if budget is not None else DEFAULT_BUDGET) / BLOCK))
    val, payload = parallel_block_max(lambda i: _L_block(ev, sets, seed, i), n_blocks)
    if payload is not None and val > best.ratio:
        best.offer(val, payload[0], _mask_to_set(payload[1]), kind="random")
    return best.ratio, best.witness()


# ---------------------------------------------------------------------------
# k_m estimate
# ---------------------------------------------------------------------------


def _top_mask(a: np.ndarray, m: int) -> np.ndarray:
    order = np.argsort(-np.abs(a), kind="stable")[:m]
    mask = np.zeros(a.size)
    mask[order] = 1.0
    return mask


def _cap_sets(sets: np.ndarray, m: int) -> np.ndarray:
    """Trim each 0/1 row to its first m set positions (|A| <= m constraint)."""
    out = sets.copy()
    for row in out:
        on = np.flatnonzero(row > 0.5)
        if on.size > m:
            row[on[m:]] = 0.0
    return np.unique(out, axis=0)


def _k_block(ev: _SupportEval, sets: np.ndarray, m: int, seed: int, bi: int):
    d = ev.m
    rng = rng_stream(seed, "k", m, bi)
    mags = rng.uniform(0.5, 2.0, size=(BLOCK, d))
    signs = np.where(rng.random((BLOCK, d)) < 0.5, 1.0, -1.0)
    rows = mags * signs
    half = BLOCK // 2
    rows[half:] = signs[half:]
    extra = _cap_sets((rng.random((8, d)) < min(0.5, m / d)).astype(np.float64), m)
    block_sets = np.vstack([sets, extra])
    ratios = _sets_sweep(ev, rows, block_sets)
    best_i, best_j = np.unravel_index(np.argmax(ratios), ratios.shape)
    best_r = float(ratios[best_i, best_j])
    payload = (rows[best_i].copy(), block_sets[best_j])
    # per-row largest-coefficient sets obey |A| <= m by construction
    tops = np.array([_top_mask(rows[i], m) for i in range(BLOCK)])
    dens = ev.coef_norms(rows)
    nums = ev.coef_norms(rows * tops)
    ok = dens > _TINY
    tr = np.where(ok, nums / np.where(ok, dens, 1.0), 0.0)
    ti = int(np.argmax(tr))
    if tr[ti] > best_r:
        best_r = float(tr[ti])
        payload = (rows[ti].copy(), tops[ti])
    r, a, si = _ascend_sets(ev, payload[0], block_sets)
    if r > best_r:
        return r, (a, block_sets[si])
    return best_r, payload


def k_m_estimate(
    b: BasisTruncation, m: int, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED
):
    """Lower bound for k_m = sup over |A| <= m of the projection norm."""
    if not (1 <= m <= b.d):
        raise ConditionalityError(f"m must lie in 1..{b.d}, got {m}")
    if m == b.d:
        # identical optimisation domain: A free inside {1..d}, support free
        return L_m_estimate(b, m, budget=budget, seed=seed)
    d = b.d
    ev = _SupportEval(b, d)
    best = _Best(d, "template")
    a0 = np.zeros(d)
    a0[0] = 1.0
    best.offer(1.0, a0, (1,), kind="random")

    sets = [_cap_sets(_structured_masks(d), m)]
    for a_t, A_t in k_template_pairs(b.recipe, d, m):
        best.offer(sa_ratio(b, a_t, A_t), np.asarray(a_t), A_t, kind="template")
        sets.append(_set_to_mask(d, A_t)[None, :])
    sets = np.unique(np.vstack(sets), axis=0)

    if best.coeffs is not None and best.coeffs.any():
        r, a_fin, si = _ascend_sets(ev, best.coeffs, sets)
        if r > best.ratio:
            best.offer(r, a_fin, _mask_to_set(sets[si]), kind="random")

    n_blocks = max(1, math.ceil(budget / BLOCK))
    val, payload = parallel_block_max(lambda i: _k_block(ev, sets, m, seed, i), n_blocks)
    if payload is not None and val > best.ratio:
        best.offer(val, payload[0], _mask_to_set(payload[1]), kind="random")
    return best.ratio, best.witness()


# ---------------------------------------------------------------------------
# template families
# ---------------------------------------------------------------------------


def recipe_dim(recipe: tuple) -> int | None:
    tag = recipe[0]
    if tag in ("unit", "lindenstrauss", "summing", "difference"):
        return int(recipe[1])
    if tag == "interleave":
        d0, d1 = recipe_dim(recipe[1]), recipe_dim(recipe[2])
        return None if d0 is None or d1 is None else d0 + d1
    if tag in ("block_sum", "pq_block_sum"):
        return int(sum(recipe[2]))
    return None


def _pad_to(a: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(d)
    out[: a.size] = a
    return out


def template_pairs(recipe: tuple, d: int, m: int) -> list:
    """Hand-built (coefficients, A) lower-bound witnesses for L_m.

    Coefficient arrays have length d with support inside [1..m]; A is a
    1-based tuple inside [1..m].  Families are frozen against the oracle at
    small m (the pair values are exact there) and generalise the observed
    maximisers upward.
    """
    m = min(m, d)
    if m < 1:
        return []
    tag = recipe[0]
    out = []
    if tag == "difference":
        # f = e_m has norm 1; spread sets telescope to 2|A| (or 2|A|-1 with 1 in A)
        a = _pad_to(profile_ones(m), d)
        out.append((a, parity_set(m, 1)))
        out.append((a, parity_set(m, 0)))
    elif tag == "summing":
        # alternating partial sums of height 1; halving the last step makes
        # every kept block stack to the full m
        for prof in (profile_alternating_half_last, profile_alternating):
            a = _pad_to(prof(m), d)
            out.append((a, parity_set(m, 1)))
            out.append((a, parity_set(m, 0)))
    elif tag == "lindenstrauss":
        # level-weighted tree vector telescopes to mass 2; alternating level
        # bands avoid parent-child cancellation inside S_A
        a = _pad_to(profile_dyadic_levels(m), d)
        out.append((a, level_parity_set(m, 0)))
        out.append((a, level_parity_set(m, 1)))
    elif tag == "interleave":
        r0, r1 = recipe[1], recipe[2]
        d0, d1 = recipe_dim(r0), recipe_dim(r1)
        if d0 is not None and d1 is not None:
            for side, (r_in, d_in) in enumerate(((r0, d0), (r1, d1))):
                pos = interleave_positions(d0, d1)[side]
                s = sum(1 for p in pos if p <= m)
                for a_in, A_in in template_pairs(r_in, d_in, min(s, d_in)):
                    a_out, A_out = interleave_pair(a_in[:d_in], A_in, side, d0, d1)
                    out.append((_pad_to(a_out, d), A_out))
    elif tag == "block_sum":
        base, dims = recipe[1], recipe[2]
        for r_idx, (dn, off) in enumerate(zip(dims, block_offsets(dims)), start=1):
            if off >= m:
                break
            s = min(int(dn), m - off)
            for a_in, A_in in template_pairs(base, int(dn), s):
                a_out, A_out = block_embed_pair(a_in[: int(dn)], A_in, dims, r_idx)
                out.append((_pad_to(a_out, d), A_out))
    return out


def k_template_pairs(recipe: tuple, d: int, m: int) -> list:
    """(coefficients, A) witnesses for k_m: full support allowed, |A| <= m."""
    out = list(template_pairs(recipe, d, min(m, d)))
    tag = recipe[0]
    if tag == "difference":
        # f = e_d has norm 1; any m spread indices give ||S_A e_d|| ~ 2m
        a = _pad_to(profile_ones(d), d)
        for parity in (1, 0):
            full = parity_set(d, parity)
            out.append((a, full[: min(m, len(full))]))
    elif tag == "lindenstrauss":
        a = _pad_to(profile_dyadic_levels(d), d)
        for parity in (0, 1):
            full = level_parity_set(d, parity)
            out.append((a, full[: min(m, len(full))]))
    return [(a, A) for a, A in out if len(A) <= m]


def interleave_pair(coeffs, indices, side: int, d0: int, d1: int):
    """Transfer a one-component pair onto the interleaved system (exact)."""
    pos = interleave_positions(d0, d1)[side]
    a = np.asarray(coeffs, dtype=np.float64)
    if a.size != (d0, d1)[side]:
        raise ConditionalityError(f"expected {(d0, d1)[side]} coefficients for side {side}")
    out = np.zeros(d0 + d1)
    for j, c in enumerate(a):
        out[pos[j] - 1] = c
    A = tuple(sorted(pos[int(i) - 1] for i in indices))
    return out, A


def block_embed_pair(coeffs, indices, dims, r: int):
    """Place a pair inside block r of a block sum (1-based; exact transfer)."""
    dims = tuple(int(x) for x in dims)
    if not (1 <= r <= len(dims)):
        raise ConditionalityError(f"block index {r} outside 1..{len(dims)}")
    a = np.asarray(coeffs, dtype=np.float64)
    if a.size != dims[r - 1]:
        raise ConditionalityError(f"expected {dims[r - 1]} coefficients for block {r}")
    off = block_offsets(dims)[r - 1]
    out = np.zeros(sum(dims))
    out[off : off + a.size] = a
    A = tuple(sorted(off + int(i) for i in indices))
    return out, A


# ---------------------------------------------------------------------------
# growth targets and fits
# ---------------------------------------------------------------------------

_SLOPE_BANDS = {"log": (0.1, 10.0), "linear": (0.1, 10.0), "power": (0.01, 100.0)}


@dataclass(frozen=True)
class GrowthTarget:
    """Doubling growth shape delta(m): log2 m, m, or m^a with a in (0,1)."""

    kind: str
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("log", "linear", "power"):
            raise ConditionalityError(f"unknown growth kind {self.kind!r}")
        if self.kind == "power" and not (0.0 < self.exponent < 1.0):
            raise ConditionalityError("power exponent must lie in (0, 1)")

    def delta(self, m: float) -> float:
        if m < 1:
            raise ConditionalityError("delta is defined for m >= 1")
        if self.kind == "log":
            return math.log2(m)
        if self.kind == "linear":
            return float(m)
        return float(m) ** self.exponent


LOG_TARGET = GrowthTarget("log")
LINEAR_TARGET = GrowthTarget("linear")


def target_doubling(target: GrowthTarget, ms) -> tuple:
    """(increasing?, observed doubling constant) of delta on the ladder."""
    deltas = [target.delta(m) for m in ms]
    increasing = all(b > a for a, b in zip(deltas, deltas[1:]))
    ratios = [
        target.delta(2 * m) / target.delta(m) for m in ms if target.delta(m) > _TINY
    ]
    return increasing, (max(ratios) if ratios else None)


@dataclass(frozen=True)
class GrowthReport:
    """Ladder of certified lower bounds with a least-squares fit verdict."""

    target: GrowthTarget
    rows: tuple  # of (m, lb, method)
    slope: float
    intercept: float
    r_squared: float | None
    verdict: str
    note: str

    def csv_rows(self) -> list:
        out = [("m", "lb", "method", "delta_m")]
        for m, lb, method in self.rows:
            out.append((m, lb, method, self.target.delta(m)))
        return out

    def to_doc(self) -> dict:
        return {
            "target": {"kind": self.target.kind, "exponent": self.target.exponent},
            "rows": [
                {"m": m, "lb": lb, "method": method, "delta_m": self.target.delta(m)}
                for m, lb, method in self.rows
            ],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "verdict": self.verdict,
            "note": self.note,
        }


def growth_fit(
    series,
    target: GrowthTarget,
    r2_min: float = 0.95,
    slope_band: tuple | None = None,
) -> GrowthReport:
    """Least-squares fit of the lower bounds against delta(m) with a verdict."""
    rows = []
    for item in series:
        m, lb = int(item[0]), float(item[1])
        method = str(item[2]) if len(item) > 2 else ""
        rows.append((m, lb, method))
    if len(rows) < 4:
        raise ConditionalityError("need at least 4 ladder points")
    ms = [m for m, _, _ in rows]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ConditionalityError("ladder m values must be strictly increasing")

    x = np.array([target.delta(m) for m in ms])
    y = np.array([lb for _, lb, _ in rows])
    band = slope_band if slope_band is not None else _SLOPE_BANDS[target.kind]

    if float(np.ptp(y)) <= 1e-12:
        return GrowthReport(
            target, tuple(rows), 0.0, float(y.mean()), None, "FAIL",
            "degenerate ladder: constant lower bounds",
        )

    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([slope, intercept])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    problems = []
    if r2 < r2_min:
        problems.append(f"R^2 {r2:.4f} < {r2_min:g}")
    if not (band[0] <= slope <= band[1]):
        problems.append(f"slope {slope:.4g} outside [{band[0]:g}, {band[1]:g}]")
    verdict = "PASS" if not problems else "FAIL"
    return GrowthReport(
        target, tuple(rows), float(slope), float(intercept), r2, verdict,
        "; ".join(problems),
    )


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------


def lb_ladder(
    b: BasisTruncation,
    ms,
    kind: str = "L",
    mode: str = "auto",
    budget: int | None = None,
    seed: int = DEFAULT_SEED,
    guard: int = DEFAULT_GUARD,
    templates=None,
):
    """Lower-bound ladder [(m, value, witness)] with witnesses carried forward.

    A witness valid at support m stays valid at every larger support, so each
    rung reports the running maximum; ladder values are therefore
    non-decreasing by construction, matching the sup over a growing class.
    """
    ms = [int(m) for m in ms]
    if any(b2 <= a2 for a2, b2 in zip(ms, ms[1:])):
        raise ConditionalityError("ladder m values must be strictly increasing")
    if kind not in ("L", "k"):
        raise ConditionalityError(f"ladder kind must be 'L' or 'k', got {kind!r}")
    if mode not in ("auto", "oracle", "estimate"):
        raise ConditionalityError(f"unknown ladder mode {mode!r}")
    out = []
    carry_val, carry_wit = 0.0, None
    for m in ms:
        if kind == "k":
            val, wit = k_m_estimate(b, m, budget=budget or DEFAULT_BUDGET, seed=seed)
        elif mode == "oracle" or (mode == "auto" and m <= guard):
            val, wit = L_m_oracle(b, m, guard=guard)
        else:
            val, wit = L_m_estimate(b, m, budget=budget, seed=seed, guard=guard, templates=templates)
        if carry_wit is not None and carry_val > val:
            val, wit = carry_val, carry_wit
        out.append((m, val, wit))
        if carry_wit is None or val > carry_val:
            carry_val, carry_wit = val, wit
    return out
