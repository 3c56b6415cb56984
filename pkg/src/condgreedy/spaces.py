"""Sequence-space norms on finite coefficient vectors.

Five families of ambient norms are supported:

* ``Lp(p)``            -- (sum |v_i|^p)^(1/p), with ``p = math.inf`` meaning sup.
* ``C0Trunc(dim)``     -- sup norm on a fixed-length truncation of c_0.
* ``MixedSum(q, ...)`` -- blocks measured in their own norms, then combined
                          with an outer l_q norm; ``outer_q = 0`` means the
                          sup over blocks (c_0-style combination).
* ``Lorentz(q, w)``    -- (sum a_n^q w_n)^(1/q) over the non-increasing
                          rearrangement ``a`` of |v|; weights either explicit
                          or the preset w_n = n^(q/p - 1).
* ``BV()``             -- |v_1| + sum_{j>=2} |v_j - v_{j-1}|.

The infinite exponent is kept symbolic (``math.inf`` compared by identity,
never exponentiated).  All evaluators accept a single vector through
:func:`norm` or a 2-d batch of row vectors through :func:`norms`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

INF = math.inf

__all__ = [
    "INF",
    "Lp",
    "C0Trunc",
    "MixedSum",
    "Lorentz",
    "LorentzPQ",
    "ExplicitWeights",
    "BV",
    "SpaceDesc",
    "SpaceError",
    "norm",
    "norms",
    "space_dim",
    "nonincreasing_rearrangement",
    "format_space",
    "parse_space",
]


class SpaceError(ValueError):
    """Malformed space descriptor or vector/space mismatch."""


@dataclass(frozen=True)
class Lp:
    """l_p norm; ``p`` in [1, inf]."""

    p: float

    def __post_init__(self):
        if self.p != INF and not (isinstance(self.p, (int, float)) and self.p >= 1.0):
            raise SpaceError(f"Lp exponent must be >= 1 or inf, got {self.p!r}")
        object.__setattr__(self, "p", float(self.p))


@dataclass(frozen=True)
class C0Trunc:
    """Truncation of c_0 to the first ``dim`` coordinates (sup norm)."""

    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise SpaceError(f"C0Trunc dimension must be >= 1, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


@dataclass(frozen=True)
class MixedSum:
    """Outer l_q combination of block norms; ``outer_q = 0`` is the sup."""

    outer_q: float
    blocks: tuple  # tuple of (SpaceDesc, dim) pairs

    def __post_init__(self):
        q = float(self.outer_q)
        if q != 0.0 and not (1.0 <= q < INF):
            raise SpaceError(f"outer_q must be 0 or in [1, inf), got {self.outer_q!r}")
        blocks = tuple((s, int(d)) for s, d in self.blocks)
        if not blocks:
            raise SpaceError("MixedSum needs at least one block")
        for s, d in blocks:
            if d < 1:
                raise SpaceError(f"block dimension must be >= 1, got {d}")
            inner = space_dim(s)
            if inner is not None and inner != d:
                raise SpaceError(f"block space {format_space(s)} wants dim {inner}, got {d}")
        object.__setattr__(self, "outer_q", q)
        object.__setattr__(self, "blocks", blocks)


@dataclass(frozen=True)
class LorentzPQ:
    """Weight preset w_n = n^(q/p - 1); non-increasing exactly when q <= p."""

    p: float
    q: float

    def __post_init__(self):
        if not (1.0 <= float(self.p) < INF):
            raise SpaceError(f"Lorentz preset needs p in [1, inf), got {self.p!r}")
        if not (1.0 <= float(self.q) < INF):
            raise SpaceError(f"Lorentz preset needs q in [1, inf), got {self.q!r}")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))

    def values(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=np.float64)
        return idx ** (self.q / self.p - 1.0)


@dataclass(frozen=True)
class ExplicitWeights:
    """Explicit positive weight list; must cover the vector length at use."""

    values_tuple: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values_tuple)
        if not vals or any(not (v > 0.0) or math.isinf(v) for v in vals):
            raise SpaceError("weights must be a non-empty list of positive finite numbers")
        object.__setattr__(self, "values_tuple", vals)

    def values(self, n: int) -> np.ndarray:
        if n > len(self.values_tuple):
            raise SpaceError(f"vector length {n} exceeds weight list length {len(self.values_tuple)}")
        return np.asarray(self.values_tuple[:n], dtype=np.float64)


WeightSpec = Union[LorentzPQ, ExplicitWeights]


@dataclass(frozen=True)
class Lorentz:
    """Lorentz norm d_q(w): l_q moment of the decreasing rearrangement."""

    q: float
    weights: WeightSpec

    def __post_init__(self):
        if not (1.0 <= float(self.q) < INF):
            raise SpaceError(f"Lorentz q must be in [1, inf), got {self.q!r}")
        if not isinstance(self.weights, (LorentzPQ, ExplicitWeights)):
            raise SpaceError("weights must be LorentzPQ or ExplicitWeights")
        object.__setattr__(self, "q", float(self.q))


@dataclass(frozen=True)
class BV:
    """Bounded-variation norm |v_1| + sum |v_j - v_{j-1}|."""


SpaceDesc = Union[Lp, C0Trunc, MixedSum, Lorentz, BV]


def space_dim(space: SpaceDesc):
    """Required vector length, or None when the space accepts any length."""
    if isinstance(space, C0Trunc):
        return space.dim
    if isinstance(space, MixedSum):
        return sum(d for _, d in space.blocks)
    return None


def nonincreasing_rearrangement(v) -> np.ndarray:
    """Absolute values sorted in non-increasing order."""
    a = np.abs(np.asarray(v, dtype=np.float64))
    if a.ndim != 1:
        raise SpaceError("expected a 1-d vector")
    return np.sort(a)[::-1]


def _check_matrix(V) -> np.ndarray:
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2:
        raise SpaceError("expected a 2-d batch of row vectors")
    if np.isnan(V).any():
        raise SpaceError("vector contains NaN")
    return V


def _powsum_norm(X: np.ndarray, p: float) -> np.ndarray:
    # scale by the row max so v**p stays in range for large p
    if p == 1.0:
        return X.sum(axis=1)
    if p == 2.0:
        return np.sqrt((X * X).sum(axis=1))
    m = X.max(axis=1) if X.shape[1] else np.zeros(X.shape[0])
    out = np.zeros_like(m)
    pos = m > 0.0
    if pos.any():
        scaled = X[pos] / m[pos, None]
        out[pos] = m[pos] * ((scaled**p).sum(axis=1)) ** (1.0 / p)
    return out


def norms(space: SpaceDesc, V) -> np.ndarray:
    """Row-wise norms of a 2-d array under ``space``."""
    V = _check_matrix(V)
    k = V.shape[1]
    req = space_dim(space)
    if req is not None and k != req:
        raise SpaceError(f"space {format_space(space)} wants length {req}, got {k}")
    if isinstance(space, Lp):
        A = np.abs(V)
        if space.p == INF:
            return A.max(axis=1) if k else np.zeros(V.shape[0])
        return _powsum_norm(A, space.p)
    if isinstance(space, C0Trunc):
        return np.abs(V).max(axis=1)
    if isinstance(space, MixedSum):
        cols = []
        off = 0
        for sub, d in space.blocks:
            cols.append(norms(sub, V[:, off : off + d]))
            off += d
        block_norms = np.stack(cols, axis=1)
        if space.outer_q == 0.0:
            return block_norms.max(axis=1)
        return _powsum_norm(block_norms, space.outer_q)
    if isinstance(space, Lorentz):
        w = space.weights.values(k)
        A = np.sort(np.abs(V), axis=1)[:, ::-1]
        if space.q == 1.0:
            return A @ w
        m = A[:, 0] if k else np.zeros(V.shape[0])
        out = np.zeros_like(m)
        pos = m > 0.0
        if pos.any():
            scaled = A[pos] / m[pos, None]
            out[pos] = m[pos] * ((scaled**space.q) @ w) ** (1.0 / space.q)
        return out
    if isinstance(space, BV):
        if k == 0:
            return np.zeros(V.shape[0])
        return np.abs(V[:, 0]) + np.abs(np.diff(V, axis=1)).sum(axis=1)
    raise SpaceError(f"unknown space descriptor {space!r}")


def norm(space: SpaceDesc, v) -> float:
    """Norm of a single vector under ``space``."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise SpaceError("expected a 1-d vector")
    return float(norms(space, v[None, :])[0])


# ---------------------------------------------------------------------------
# canonical textual form
# ---------------------------------------------------------------------------


def _fmt_num(x: float) -> str:
    if x == INF:
        return "inf"
    if float(x) == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def format_space(space: SpaceDesc) -> str:
    """Canonical text form, the inverse of :func:`parse_space`."""
    if isinstance(space, Lp):
        return f"lp:{_fmt_num(space.p)}"
    if isinstance(space, C0Trunc):
        return f"c0:{space.dim}"
    if isinstance(space, MixedSum):
        inner = ",".join(f"{format_space(s)}^{d}" for s, d in space.blocks)
        return f"mixed:q={_fmt_num(space.outer_q)}[{inner}]"
    if isinstance(space, Lorentz):
        if isinstance(space.weights, LorentzPQ):
            return f"lorentz:p={_fmt_num(space.weights.p)},q={_fmt_num(space.weights.q)}"
        ws = ",".join(_fmt_num(w) for w in space.weights.values_tuple)
        return f"lorentz:q={_fmt_num(space.q)},w=[{ws}]"
    if isinstance(space, BV):
        return "bv"
    raise SpaceError(f"unknown space descriptor {space!r}")


def _split_top(s: str, sep: str) -> list:
    """Split on ``sep`` outside any brackets."""
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise SpaceError(f"unbalanced brackets in {s!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise SpaceError(f"unbalanced brackets in {s!r}")
    parts.append("".join(cur))
    return parts


def _parse_num(s: str) -> float:
    s = s.strip()
    if s == "inf":
        return INF
    try:
        return float(s)
    except ValueError:
        raise SpaceError(f"bad number {s!r}") from None


def parse_space(text: str) -> SpaceDesc:
    """Parse the canonical textual form, e.g. ``lp:1`` or ``mixed:q=2[lp:1^4,lp:1^8]``."""
    s = text.strip()
    if s == "bv":
        return BV()
    if s.startswith("lp:"):
        return Lp(_parse_num(s[3:]))
    if s.startswith("c0:"):
        try:
            return C0Trunc(int(s[3:]))
        except ValueError:
            raise SpaceError(f"bad c0 dimension in {text!r}") from None
    if s.startswith("lorentz:"):
        body = s[len("lorentz:") :]
        kv = {}
        for part in _split_top(body, ","):
            if "=" not in part:
                raise SpaceError(f"bad lorentz parameter {part!r}")
            key, val = part.split("=", 1)
            kv[key.strip()] = val.strip()
        if "w" in kv:
            wtxt = kv["w"]
            if not (wtxt.startswith("[") and wtxt.endswith("]")):
                raise SpaceError("explicit weights must be bracketed, w=[...]")
            weights = ExplicitWeights(tuple(_parse_num(t) for t in wtxt[1:-1].split(",")))
            if "q" not in kv:
                raise SpaceError("lorentz with explicit weights needs q=")
            return Lorentz(_parse_num(kv["q"]), weights)
        if "p" in kv and "q" in kv:
            p, q = _parse_num(kv["p"]), _parse_num(kv["q"])
            return Lorentz(q, LorentzPQ(p, q))
        raise SpaceError(f"lorentz needs p=,q= or q=,w=[...]: {text!r}")
    if s.startswith("mixed:"):
        body = s[len("mixed:") :]
        if not body.startswith("q="):
            raise SpaceError(f"mixed needs q=..., got {text!r}")
        lb = body.find("[")
        if lb < 0 or not body.endswith("]"):
            raise SpaceError(f"mixed needs a [block,...] list: {text!r}")
        q = _parse_num(body[2:lb])
        blocks = []
        for part in _split_top(body[lb + 1 : -1], ","):
            if "^" not in part:
                raise SpaceError(f"mixed block {part!r} needs space^dim")
            sub, dim = part.rsplit("^", 1)
            blocks.append((parse_space(sub), int(dim)))
        return MixedSum(q, tuple(blocks))
    raise SpaceError(f"cannot parse space {text!r}")
