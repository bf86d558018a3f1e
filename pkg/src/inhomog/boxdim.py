"""Exact δ-mesh counting, log-log slope fits and the Moran equation.

Cells are the half-open squares ``[iδ, (i+1)δ) × [jδ, (j+1)δ)`` anchored at
the origin; coordinates on the upper edge of the unit square clamp into
the last cell. A primitive with positive extent along an axis is treated
as half-open along that axis, so a cylinder ``[iδ, (i+1)δ]²`` occupies one
cell instead of four. Coordinates within ``1e-9`` (relative, in cell
units) of a grid line snap onto it, which keeps grid-aligned inputs such
as ``j/3`` at ``δ = 3**-m`` bit-exact.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, InsufficientDataError
from .ifs_core import GEOM_TOL, CondensationSet, Point, Rect, Segment, validate_ifs
from .orbital import CoverArrays, cover_arrays
from .validation import DEFAULT_CELL_BUDGET, check_delta, worker_count

SNAP = 1e-9
_CHUNK = 1 << 22


@dataclass(frozen=True)
class CoverCount:
    delta: float
    count: int
    method: str = "exact-mesh"

    def to_row(self) -> str:
        return f"{self.delta!r},{self.count},{self.method}"


@dataclass(frozen=True)
class DimensionFit:
    slope: float
    per_step_slopes: tuple
    scale_range: tuple
    r_squared: float
    intercept: float = 0.0
    scales: tuple = field(default=(), repr=False)

    @property
    def upper(self) -> float:
        """Largest two-point slope: a finite-data proxy for the upper box dimension."""
        return max(self.per_step_slopes)

    @property
    def lower(self) -> float:
        return min(self.per_step_slopes)

    def to_dict(self) -> dict:
        return {"slope": self.slope, "per_step": list(self.per_step_slopes),
                "r2": self.r_squared, "scales": list(self.scales)}


# --------------------------------------------------------------------------
# mesh counting


def _grid_coord(v, delta):
    q = np.asarray(v, dtype=float) / delta
    r = np.rint(q)
    return np.where(np.abs(q - r) <= SNAP * np.maximum(1.0, np.abs(r)), r, q)


def n_cells_per_side(delta: float) -> int:
    return int(math.ceil(float(_grid_coord(1.0, delta))))


def _axis_range(lo, hi, delta, n):
    qlo = _grid_coord(lo, delta)
    qhi = _grid_coord(hi, delta)
    i_lo = np.floor(qlo).astype(np.int64)
    i_hi = np.where(qhi > qlo, np.ceil(qhi).astype(np.int64) - 1, i_lo)
    i_hi = np.maximum(i_hi, i_lo)
    return np.clip(i_lo, 0, n - 1), np.clip(i_hi, 0, n - 1)


def cell_index(values, delta: float, n: int) -> np.ndarray:
    """Index of the δ-cell holding each coordinate, with the grid snapping applied."""
    return np.clip(np.floor(_grid_coord(values, delta)).astype(np.int64), 0, n - 1)


def cell_span(lo, hi, delta: float, n: int):
    """First and last cell index met by each extent ``[lo, hi]``."""
    return _axis_range(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float), delta, n)


def _split_pieces(pieces):
    """Axis-aligned bounds as an ``(m, 4)`` array plus a list of oblique segments.

    Accepts primitives, a :class:`CoverArrays`, an ``(n, 2)`` point array or
    an ``(n, 4)`` array of ``x0, x1, y0, y1`` boxes.
    """
    if isinstance(pieces, CoverArrays):
        return np.asarray(pieces.bounds, dtype=float).reshape(-1, 4), list(pieces.oblique)
    if isinstance(pieces, np.ndarray):
        if pieces.ndim == 2 and pieces.shape[1] == 2:
            return np.column_stack([pieces[:, 0], pieces[:, 0], pieces[:, 1], pieces[:, 1]]), []
        if pieces.ndim == 2 and pieces.shape[1] == 4:
            return pieces.astype(float), []
        raise DomainError("arrays must have shape (n, 2) or (n, 4)")
    boxes = []
    oblique = []
    for p in pieces:
        if isinstance(p, Segment) and not p.axis_aligned:
            oblique.append(p)
        elif isinstance(p, (Point, Segment, Rect)):
            boxes.append(p.bounds())
        else:
            raise DomainError(f"not a primitive: {p!r}")
    return np.array(boxes, dtype=float).reshape(-1, 4), oblique


def _box_cells(i_lo, i_hi, j_lo, j_hi, n):
    nx = i_hi - i_lo + 1
    ny = j_hi - j_lo + 1
    sizes = nx * ny
    owner = np.repeat(np.arange(sizes.size), sizes)
    offs = np.arange(int(sizes.sum()), dtype=np.int64) - np.repeat(np.cumsum(sizes) - sizes, sizes)
    ii = i_lo[owner] + offs // ny[owner]
    jj = j_lo[owner] + offs % ny[owner]
    return np.unique(ii * n + jj)


def _oblique_cells(seg: Segment, delta: float, n: int) -> np.ndarray:
    (x0, y0), (x1, y1) = seg.a, seg.b
    qx0, qx1 = float(_grid_coord(x0, delta)), float(_grid_coord(x1, delta))
    qy0, qy1 = float(_grid_coord(y0, delta)), float(_grid_coord(y1, delta))
    ts = [np.array([0.0, 1.0])]
    for q0, q1 in ((qx0, qx1), (qy0, qy1)):
        if q0 != q1:
            ks = np.arange(math.ceil(min(q0, q1)), math.floor(max(q0, q1)) + 1)
            ts.append((ks - q0) / (q1 - q0))
    t = np.unique(np.clip(np.concatenate(ts), 0.0, 1.0))
    mid = 0.5 * (t[:-1] + t[1:])
    ii = np.clip(np.floor(qx0 + mid * (qx1 - qx0)).astype(np.int64), 0, n - 1)
    jj = np.clip(np.floor(qy0 + mid * (qy1 - qy0)).astype(np.int64), 0, n - 1)
    return np.unique(ii * n + jj)


def mesh_cells(pieces, delta: float, budget: int = DEFAULT_CELL_BUDGET) -> np.ndarray:
    """Sorted unique cell ids ``i * n + j`` of every δ-mesh cell the pieces meet.

    ``pieces`` may be primitives, a :class:`CoverArrays`, an ``(n, 2)`` point
    array or an ``(n, 4)`` array of ``x0, x1, y0, y1`` boxes.
    """
    delta = check_delta(delta)
    n = n_cells_per_side(delta)
    boxes, oblique = _split_pieces(pieces)
    if boxes.size and (boxes[:, [0, 2]].min() < -GEOM_TOL or boxes[:, [1, 3]].max() > 1 + GEOM_TOL):
        raise DomainError("a primitive lies outside the unit square")
    i_lo, i_hi = _axis_range(boxes[:, 0], boxes[:, 1], delta, n)
    j_lo, j_hi = _axis_range(boxes[:, 2], boxes[:, 3], delta, n)
    sizes = (i_hi - i_lo + 1) * (j_hi - j_lo + 1)
    if sizes.size and sizes.max() > budget:
        raise BudgetExceededError("cells of one primitive", int(sizes.max()), budget)

    # consecutive slices holding roughly _CHUNK cells each
    cuts = [0]
    acc = 0
    for k, s in enumerate(sizes.tolist()):
        acc += s
        if acc >= _CHUNK:
            cuts.append(k + 1)
            acc = 0
    if cuts[-1] != sizes.size:
        cuts.append(sizes.size)
    jobs = [slice(a, b) for a, b in zip(cuts[:-1], cuts[1:])]

    def run(sl):
        return _box_cells(i_lo[sl], i_hi[sl], j_lo[sl], j_hi[sl], n)

    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = []
        for sl in jobs:
            parts.append(run(sl))
            if sum(p.size for p in parts) > 2 * _CHUNK:
                parts = [np.unique(np.concatenate(parts))]
                if parts[0].size > budget:
                    raise BudgetExceededError("mesh cells", int(parts[0].size), budget)
    for seg in oblique:
        parts.append(_oblique_cells(seg, delta, n))
    if not parts:
        return np.zeros(0, dtype=np.int64)
    cells = np.unique(np.concatenate(parts))
    if cells.size > budget:
        raise BudgetExceededError("mesh cells", int(cells.size), budget)
    return cells


def mesh_count(pieces, delta: float, budget: int = DEFAULT_CELL_BUDGET) -> CoverCount:
    """Number of δ-mesh cells met by the union of ``pieces``.

    ``pieces`` is anything :func:`mesh_cells` accepts.
    """
    cells = mesh_cells(pieces, delta, budget)
    return CoverCount(float(delta), int(cells.size), "exact-mesh")


def bin_count_1d(values, delta: float, lo: float = -1.0, hi: float = 1.0) -> int:
    """Distinct half-open δ-intervals of ``[lo, hi)`` hit by ``values``."""
    v = np.asarray(values, dtype=float)
    n = int(math.ceil(float(_grid_coord(hi - lo, delta))))
    idx = np.clip(np.floor(_grid_coord(v - lo, delta)).astype(np.int64), 0, n - 1)
    return int(np.unique(idx).size)


def dyadic_scales(k_min: int, k_max: int) -> list:
    if k_min >= k_max:
        raise DomainError(f"need k_min < k_max, got {k_min}..{k_max}")
    return [2.0 ** -k for k in range(k_min, k_max + 1)]


def sweep(ifs, C: CondensationSet, deltas: Sequence[float],
          budget: int = DEFAULT_CELL_BUDGET) -> list:
    """Mesh counts of the big-piece/stopped-cylinder cover of ``F_C`` at each scale."""
    return [mesh_count(cover_arrays(ifs, C, d), d, budget) for d in deltas]


# --------------------------------------------------------------------------
# fitting


def fit_dimension(counts: Sequence[CoverCount]) -> DimensionFit:
    """Least-squares slope of ``log N`` against ``-log δ``."""
    counts = list(counts)
    if len(counts) < 3:
        raise InsufficientDataError(f"need at least 3 scales, got {len(counts)}")
    deltas = np.array([c.delta for c in counts], dtype=float)
    if np.any(np.diff(deltas) >= 0):
        raise DomainError("scales must be strictly decreasing")
    if any(c.count < 1 for c in counts):
        raise DomainError("cover counts must be positive")
    x = -np.log(deltas)
    y = np.log(np.array([c.count for c in counts], dtype=float))
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - (intercept + slope * x)) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    steps = tuple(float(s) for s in np.diff(y) / np.diff(x))
    return DimensionFit(slope, steps, (float(deltas.min()), float(deltas.max())), r2,
                        intercept, tuple(float(d) for d in deltas))


# --------------------------------------------------------------------------
# Moran equation


def _ratios(ifs_or_scales) -> list:
    out = []
    for m in ifs_or_scales:
        out.append(float(m) if isinstance(m, (int, float, np.floating)) else m.lip)
    return out


def similarity_dimension(ifs_or_scales) -> float:
    """Unique ``s >= 0`` with ``sum r_i**s == 1``, by bisection.

    Accepts maps (their Lipschitz constants are used) or bare ratios.
    """
    r = _ratios(ifs_or_scales)
    if not r:
        raise DomainError("need at least one map")
    if any(not 0.0 < x < 1.0 for x in r):
        raise DomainError("contraction ratios must lie in (0, 1)")
    if len(r) == 1:
        return 0.0

    def f(s):
        return math.fsum(x ** s for x in r) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) >= 0.0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo if abs(f(lo)) <= abs(f(hi)) else hi


def moran_ratio(ifs_or_scales, t: float) -> float:
    """``sum r_i**t``: the per-level growth factor of ``sum Lip(S_w)**t``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return math.fsum(x ** t for x in _ratios(ifs_or_scales))


def moran_tail(ifs_or_scales, t: float, k_max: int) -> list:
    """Partial sums ``sum_{k<=K} (sum_i r_i**t)**k`` for ``K = 1..k_max``."""
    rho = moran_ratio(ifs_or_scales, t)
    out = []
    total = 0.0
    term = 1.0
    for _ in range(int(k_max)):
        term *= rho
        total += term
        out.append(total)
    return out


def moran_remainder(ifs_or_scales, t: float, K: int) -> float:
    """``sum_{k>K} rho**k`` in closed form; infinite when ``rho >= 1``."""
    rho = moran_ratio(ifs_or_scales, t)
    if rho >= 1.0:
        return math.inf
    return rho ** (K + 1) / (1.0 - rho)


@dataclass(frozen=True)
class MainBounds:
    lower: float
    upper: float
    similarity_dimension: float
    homogeneous_estimate: float


def theorem_main_bounds(ifs, dimC: float, k_min: int = 4, k_max: int = 10) -> MainBounds:
    """``(max(est dim F_∅, dim C), max(s, dim C))`` for a similarity IFS."""
    if not 0.0 <= dimC <= 2.0:
        raise DomainError("dimC must lie in [0, 2]")
    ifs = validate_ifs(ifs)
    s = similarity_dimension(ifs)
    deltas = dyadic_scales(k_min, k_max)
    est = fit_dimension([mesh_count(cover_arrays(ifs, CondensationSet.empty(), d), d) for d in deltas]).slope
    return MainBounds(max(est, dimC), max(s, dimC), s, est)
