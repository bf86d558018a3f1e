"""Finite approximations of orbital sets, δ-stoppings and homogeneous covers."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import BudgetExceededError, DomainError, UnsupportedGeometryError
from .ifs_core import (
    CondensationSet,
    DiagonalAffineMap,
    Point,
    Segment,
    apply_to_primitive,
    rect,
    segment,
    validate_ifs,
    word_str,
)
from .validation import DEFAULT_PIECE_BUDGET, check_delta, check_nonnegative_int


@dataclass(frozen=True, slots=True)
class Piece:
    word: tuple
    primitive: object
    lip: float


@dataclass(frozen=True)
class OrbitalApprox:
    pieces: tuple
    rule: str
    includes_root: bool = True

    def primitives(self) -> list:
        return [p.primitive for p in self.pieces]

    def __len__(self):
        return len(self.pieces)

    def to_csv(self, fh=None) -> str:
        """Rows ``word,kind,x0,y0,x1,y1,lip``; the empty word is written as ``""``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["word", "kind", "x0", "y0", "x1", "y1", "lip"])
        for piece in self.pieces:
            p = piece.primitive
            if isinstance(p, Point):
                coords = (p.x, p.y, p.x, p.y)
            elif isinstance(p, Segment):
                coords = (*p.a, *p.b)
            else:
                coords = (*p.lo, *p.hi)
            w.writerow([word_str(piece.word), p.kind, *map(repr, coords), repr(piece.lip)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


@dataclass(frozen=True)
class StoppingSet:
    delta: float
    words: tuple
    lips: tuple

    def __len__(self):
        return len(self.words)


def _piece_bound(n_maps: int, depth: int, n_prims: int) -> int:
    if n_maps == 1:
        return (depth + 1) * n_prims
    return (n_maps ** (depth + 1) - 1) // (n_maps - 1) * n_prims


def orbital_to_depth(ifs, C: CondensationSet, K: int,
                     budget: int = DEFAULT_PIECE_BUDGET) -> OrbitalApprox:
    """``C`` together with ``S_w(C)`` for every word of length at most ``K``.

    Pieces are listed level by level, lexicographically within a level.
    """
    ifs = validate_ifs(ifs)
    K = check_nonnegative_int(K, "K")
    bound = _piece_bound(len(ifs), K, len(C))
    if bound > budget:
        raise BudgetExceededError("orbital pieces", bound, budget)
    identity = type(ifs[0]).identity()
    level = [((), identity)]
    pieces = [Piece((), c, 1.0) for c in C]
    for _ in range(K):
        if C.is_empty:
            break
        nxt = []
        for w, m in level:
            for i, f in enumerate(ifs, 1):
                mi = m.compose(f)
                wi = w + (i,)
                nxt.append((wi, mi))
                for c in C:
                    pieces.append(Piece(wi, apply_to_primitive(mi, c), mi.lip))
        level = nxt
    return OrbitalApprox(tuple(pieces), f"depth={K}", True)


def _stopping_walk(ifs, delta, budget):
    """Depth-first walk returning stopped words, in lexicographic order, with their maps."""
    identity = type(ifs[0]).identity()
    out = []
    stack = [((), identity)]
    while stack:
        w, m = stack.pop()
        if w and m.lip < delta:
            out.append((w, m))
            if len(out) > budget:
                raise BudgetExceededError("stopping words", f"> {budget}", budget)
            continue
        for i in range(len(ifs), 0, -1):
            stack.append((w + (i,), m.compose(ifs[i - 1])))
    return out


def stopping_set(ifs, delta: float, budget: int = DEFAULT_PIECE_BUDGET) -> StoppingSet:
    """The δ-stopping: words with ``Lip(S_w) < delta <= Lip(S_{w-})``."""
    ifs = validate_ifs(ifs)
    delta = check_delta(delta)
    found = _stopping_walk(ifs, delta, budget)
    return StoppingSet(delta, tuple(w for w, _ in found), tuple(m.lip for _, m in found))


def _count_vectors(lips, delta):
    """Yield exponent vectors ``c`` with ``prod lips**c >= delta``."""
    n = len(lips)
    logs = [math.log(r) for r in lips]
    log_delta = math.log(delta)
    c = [0] * n

    def rec(i, acc):
        if i == n:
            yield tuple(c)
            return
        k = 0
        while acc + k * logs[i] >= log_delta - 1e-12:
            c[i] = k
            yield from rec(i + 1, acc + k * logs[i])
            k += 1
        c[i] = 0

    yield from rec(0, 0.0)


def _multinomial(c) -> int:
    out = 1
    total = 0
    for k in c:
        total += k
        out *= math.comb(total, k)
    return out


def _stopping_tally(ifs, delta, s=None):
    ifs = validate_ifs(ifs)
    delta = check_delta(delta)
    sx = [m.sx if isinstance(m, DiagonalAffineMap) else m.scale for m in ifs]
    sy = [m.sy if isinstance(m, DiagonalAffineMap) else m.scale for m in ifs]
    count = 0
    total = 0.0
    for c in _count_vectors([m.lip for m in ifs], delta):
        rx = math.prod(r ** k for r, k in zip(sx, c))
        ry = math.prod(r ** k for r, k in zip(sy, c))
        if max(rx, ry) < delta:
            continue
        mult = _multinomial(c)
        for i in range(len(ifs)):
            child = max(rx * sx[i], ry * sy[i])
            if child < delta:
                count += mult
                if s is not None:
                    total += mult * child ** s
    return count, total


def stopping_size(ifs, delta: float) -> int:
    """``|I(delta)|`` without listing the words.

    A word stops exactly when its parent has ``Lip >= delta`` and it does
    not, and ``Lip`` only depends on how often each map occurs, so the
    count is a sum of multinomial coefficients over exponent vectors.
    """
    return _stopping_tally(ifs, delta)[0]


def stopping_moran_sum(ifs, delta: float, s: float) -> float:
    """``sum over I(delta) of Lip(S_w)**s`` by the same exponent-vector tally."""
    return _stopping_tally(ifs, delta, s)[1]


@dataclass(frozen=True)
class CoverArrays:
    """Axis-aligned pieces as an ``(m, 4)`` array of ``x0, x1, y0, y1`` plus oblique segments."""

    bounds: np.ndarray
    oblique: tuple = ()

    def __len__(self):
        return len(self.bounds) + len(self.oblique)


def _generator_arrays(ifs):
    lin = np.array([m.linear() for m in ifs])
    trans = np.array([m.t for m in ifs], dtype=float)
    sx = np.array([m.sx if isinstance(m, DiagonalAffineMap) else m.scale for m in ifs])
    sy = np.array([m.sy if isinstance(m, DiagonalAffineMap) else m.scale for m in ifs])
    return lin, trans, sx, sy


def _expand_tree(ifs, delta, budget):
    """Breadth-first expansion of the word tree down to the δ-stopping.

    Returns ``(internal, stopped)``: ``internal`` lists ``(L, t)`` arrays per
    level for non-empty words with ``Lip >= delta``; ``stopped`` is the
    ``(L, t)`` pair of the stopped words. Lipschitz products are folded in
    the same order as :func:`compose`, so the stopping decisions agree.
    """
    lin_i, t_i, sx_i, sy_i = _generator_arrays(ifs)
    lin = np.eye(2)[None]
    t = np.zeros((1, 2))
    ax = np.ones(1)
    ay = np.ones(1)
    internal = []
    stop_lin, stop_t = [], []
    total = 0
    while lin.shape[0]:
        n_lin = np.einsum("aij,njk->anik", lin, lin_i).reshape(-1, 2, 2)
        n_t = (np.einsum("aij,nj->ani", lin, t_i) + t[:, None, :]).reshape(-1, 2)
        n_ax = (ax[:, None] * sx_i[None, :]).ravel()
        n_ay = (ay[:, None] * sy_i[None, :]).ravel()
        stop = np.maximum(n_ax, n_ay) < delta
        keep = ~stop
        stop_lin.append(n_lin[stop])
        stop_t.append(n_t[stop])
        total += n_lin.shape[0]
        if total > budget:
            raise BudgetExceededError("tree nodes", f"> {budget}", budget)
        lin, t, ax, ay = n_lin[keep], n_t[keep], n_ax[keep], n_ay[keep]
        internal.append((lin, t))
    return internal, (np.concatenate(stop_lin), np.concatenate(stop_t))


def _cylinder_bounds(lin, t):
    lo = t + np.minimum(lin, 0.0).sum(axis=2)
    hi = t + np.maximum(lin, 0.0).sum(axis=2)
    return np.column_stack([lo[:, 0], hi[:, 0], lo[:, 1], hi[:, 1]])


def _images_of(C, lin, t, axis_ok):
    """Bounds array and oblique segments for ``L c + t`` over every primitive ``c``."""
    boxes = []
    oblique = []
    for c in C:
        if isinstance(c, Point):
            p = t + lin @ np.array([c.x, c.y])
            boxes.append(np.column_stack([p[:, 0], p[:, 0], p[:, 1], p[:, 1]]))
        elif isinstance(c, Segment):
            a = t + lin @ np.asarray(c.a)
            b = t + lin @ np.asarray(c.b)
            flat = (a[:, 0] == b[:, 0]) | (a[:, 1] == b[:, 1])
            boxes.append(np.column_stack([np.minimum(a[flat, 0], b[flat, 0]),
                                          np.maximum(a[flat, 0], b[flat, 0]),
                                          np.minimum(a[flat, 1], b[flat, 1]),
                                          np.maximum(a[flat, 1], b[flat, 1])]))
            oblique.extend(segment(p, q) for p, q in zip(a[~flat], b[~flat]))
        else:
            if not axis_ok:
                raise UnsupportedGeometryError(
                    "rotated rectangles are not representable; split the Rect into "
                    "segments or sample points first")
            lo = t + lin @ np.asarray(c.lo)
            hi = t + lin @ np.asarray(c.hi)
            boxes.append(np.column_stack([np.minimum(lo[:, 0], hi[:, 0]),
                                          np.maximum(lo[:, 0], hi[:, 0]),
                                          np.minimum(lo[:, 1], hi[:, 1]),
                                          np.maximum(lo[:, 1], hi[:, 1])]))
    return boxes, oblique


def cover_arrays(ifs, C: CondensationSet, delta: float,
                 budget: int = DEFAULT_PIECE_BUDGET) -> CoverArrays:
    """Cover of ``F_C`` at scale ``delta`` split into big and small pieces.

    Big pieces ``S_w(C)`` with ``Lip(S_w) >= delta`` are kept individually;
    everything deeper lies in the stopped cylinders ``S_w(X)``, which also
    cover the homogeneous attractor. Rotated cylinders are replaced by
    their bounding boxes.
    """
    ifs = validate_ifs(ifs)
    delta = check_delta(delta)
    axis_ok = all(m.axis_preserving for m in ifs)
    internal, (s_lin, s_t) = _expand_tree(ifs, delta, budget)
    boxes = [_cylinder_bounds(s_lin, s_t)]
    oblique = []
    if not C.is_empty:
        levels = [(np.eye(2)[None], np.zeros((1, 2)))] + internal
        for lin, t in levels:
            if lin.shape[0]:
                b, o = _images_of(C, lin, t, axis_ok)
                boxes.extend(b)
                oblique.extend(o)
    return CoverArrays(np.concatenate(boxes), tuple(oblique))


def _bounds_to_primitives(bounds):
    return [rect((x0, y0), (x1, y1)) for x0, x1, y0, y1 in bounds.tolist()]


def homogeneous_approx(ifs, delta: float, budget: int = DEFAULT_PIECE_BUDGET) -> list:
    """Cylinders ``S_w(X)`` over the δ-stopping, as Rects (bounding boxes for rotated maps)."""
    cover = cover_arrays(ifs, CondensationSet.empty(), delta, budget)
    return _bounds_to_primitives(cover.bounds)


def stopped_cover(ifs, C: CondensationSet, delta: float,
                  budget: int = DEFAULT_PIECE_BUDGET) -> list:
    """:func:`cover_arrays` as a list of primitives."""
    cover = cover_arrays(ifs, C, delta, budget)
    return _bounds_to_primitives(cover.bounds) + list(cover.oblique)


def sample_primitives(prims, h: float) -> np.ndarray:
    """Points on every primitive with spacing at most ``h``."""
    chunks = []
    for p in prims:
        if isinstance(p, Point):
            chunks.append(np.array([[p.x, p.y]]))
        elif isinstance(p, Segment):
            n = max(1, math.ceil(p.length / h))
            t = np.linspace(0.0, 1.0, n + 1)[:, None]
            chunks.append(np.asarray(p.a) * (1 - t) + np.asarray(p.b) * t)
        else:
            nx = max(1, math.ceil((p.hi[0] - p.lo[0]) / h))
            ny = max(1, math.ceil((p.hi[1] - p.lo[1]) / h))
            gx, gy = np.meshgrid(np.linspace(p.lo[0], p.hi[0], nx + 1),
                                 np.linspace(p.lo[1], p.hi[1], ny + 1))
            chunks.append(np.column_stack([gx.ravel(), gy.ravel()]))
    if not chunks:
        return np.zeros((0, 2))
    return np.concatenate(chunks)


def structure_check(ifs, C: CondensationSet, K: int, samples_per_cell: int = 4,
                    budget: int = DEFAULT_PIECE_BUDGET) -> float:
    """Gap between the level-``K`` and level-``K+1`` approximations of ``F_C``.

    The level-``K`` approximation is ``orbital_to_depth(K)`` together with the
    homogeneous cover at ``delta_K = (max Lip)**K``. Returns the largest
    distance from a sample of it to the samples of the level-``K+1``
    approximation; this should shrink like ``(max Lip)**K``.
    """
    ifs = validate_ifs(ifs)
    if K < 1:
        raise DomainError("K must be at least 1")
    r = max(m.lip for m in ifs)

    def level(k):
        prims = orbital_to_depth(ifs, C, k, budget).primitives()
        return prims + homogeneous_approx(ifs, r ** k, budget)

    h = r ** (K + 1) / samples_per_cell
    coarse = sample_primitives(level(K), h)
    fine = sample_primitives(level(K + 1), h)
    dist, _ = cKDTree(fine).query(coarse)
    return float(dist.max())
