"""Poincaré-disk geometry: Möbius maps, orbit enumeration and Poincaré series.

Maps are stored in normalized SU(1,1) form ``z -> (a z + b) / (conj(b) z + conj(a))``
with ``|a|**2 - |b|**2 = 1``. Coefficients may be Python complex numbers or
mpmath ``mpc`` values; every operation only uses arithmetic and
``.conjugate()``, so the same code runs at extended precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError, DomainError, InsufficientDataError
from .validation import DEFAULT_PIECE_BUDGET, check_nonnegative_int

DEDUP_TOL = 1e-12
NORM_TOL = 1e-9


def _conj(x):
    return x.conjugate()


@dataclass(frozen=True)
class MoebiusMap:
    a: complex
    b: complex

    def __post_init__(self):
        a, b = self.a, self.b
        det = abs(a) ** 2 - abs(b) ** 2
        if abs(det - 1) > NORM_TOL * max(1, abs(a) ** 2):
            raise DomainError(f"coefficients are not normalized: |a|^2 - |b|^2 = {det}")

    @classmethod
    def from_coefficients(cls, p, q):
        """Normalize ``z -> (p z + q) / (conj(q) z + conj(p))`` with ``|p| > |q|``."""
        det = abs(p) ** 2 - abs(q) ** 2
        if not det > 0:
            raise DomainError("the map does not preserve the disk (need |p| > |q|)")
        k = det ** 0.5
        return cls(p / k, q / k)

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j)

    def __call__(self, z):
        a, b = self.a, self.b
        return (a * z + b) / (_conj(b) * z + _conj(a))

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """``self`` after ``other``."""
        a, b, c, d = self.a, self.b, other.a, other.b
        return MoebiusMap(a * c + b * _conj(d), a * d + b * _conj(c))

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(_conj(self.a), -self.b)

    def power(self, m: int) -> "MoebiusMap":
        base = self if m >= 0 else self.inverse()
        out = MoebiusMap.identity()
        for _ in range(abs(m)):
            out = out.compose(base)
        return out

    def displacement(self) -> float:
        """Hyperbolic distance from 0 to the image of 0, evaluated from the coefficients."""
        return 2.0 * math.log(float(abs(self.a)) + float(abs(self.b)))

    def is_identity(self, tol: float = 1e-12) -> bool:
        return abs(self.b) <= tol and abs(abs(self.a) - 1) <= tol

    def to_dict(self) -> dict:
        a, b = complex(self.a), complex(self.b)
        return {"kind": "moebius", "a": [a.real, a.imag], "b": [b.real, b.imag]}


def axial_translation(alpha) -> MoebiusMap:
    """Hyperbolic translation with fixed points -1, 1 sending 0 to ``(alpha-1)/(alpha+1)``.

    Normalized form of ``z -> ((alpha+1) z + (alpha-1)) / ((alpha-1) z + (alpha+1))``.
    Pass an mpmath number to get extended-precision coefficients.
    """
    if not alpha > 1:
        raise DomainError("alpha must exceed 1")
    root = 2 * alpha ** 0.5
    return MoebiusMap((alpha + 1) / root + 0j, (alpha - 1) / root + 0j)


def hyp_dist_origin(z) -> float:
    r = abs(complex(z))
    if r >= 1:
        raise DomainError(f"point {z} is not inside the unit disk")
    return math.log((1 + r) / (1 - r))


def hyp_dist(x, y) -> float:
    x, y = complex(x), complex(y)
    if abs(x) >= 1 or abs(y) >= 1:
        raise DomainError("points must lie inside the unit disk")
    return 2.0 * math.atanh(abs(x - y) / abs(1 - x.conjugate() * y))


def _into_disk(z: complex) -> complex:
    # round toward the origin when float rounding reaches the circle
    r = abs(z)
    if r < 1:
        return z
    return z / r * np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple
    kind: str = "cyclic"

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if self.kind not in ("cyclic", "free"):
            raise DomainError(f"unknown group kind {self.kind!r}")
        if not gens:
            raise DomainError("at least one generator is required")
        if self.kind == "cyclic" and len(gens) != 1:
            raise DomainError("a cyclic group has exactly one generator")
        for g in gens:
            if g.is_identity():
                raise DomainError("generators must not be the identity")

    def element_bound(self, depth: int) -> int:
        k = len(self.generators)
        if self.kind == "cyclic":
            return 2 * depth + 1
        if k == 1:
            return 2 * depth + 1
        q = 2 * k - 1
        return 1 + 2 * k * (q ** depth - 1) // (q - 1)

    def elements(self, depth: int, budget: int = DEFAULT_PIECE_BUDGET):
        """``(label, map)`` pairs for every element of word length at most ``depth``.

        Cyclic labels are the integer power; free labels are reduced words of
        signed generator indices (``-i`` is the inverse of generator ``i``).
        Elements are listed by word length.
        """
        depth = check_nonnegative_int(depth, "depth")
        bound = self.element_bound(depth)
        if bound > budget:
            raise BudgetExceededError("group elements", bound, budget)
        ident = MoebiusMap.identity()
        if self.kind == "cyclic":
            h = self.generators[0]
            out = [(0, ident)]
            fwd, back = ident, ident
            hinv = h.inverse()
            for m in range(1, depth + 1):
                fwd = fwd.compose(h)
                back = back.compose(hinv)
                out.append((m, fwd))
                out.append((-m, back))
            return out
        letters = []
        for i, g in enumerate(self.generators, 1):
            letters.append((i, g))
            letters.append((-i, g.inverse()))
        out = [((), ident)]
        level = [((), ident)]
        for _ in range(depth):
            nxt = []
            for w, m in level:
                for lab, g in letters:
                    if w and w[-1] == -lab:
                        continue
                    nxt.append((w + (lab,), m.compose(g)))
            out.extend(nxt)
            level = nxt
        return out


@dataclass(frozen=True)
class OrbitPointSet:
    points: np.ndarray
    labels: tuple
    exact: tuple | None = None

    def __len__(self):
        return len(self.points)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "label"])
        for z, lab in zip(self.points.tolist(), self.labels):
            w.writerow([repr(z.real), repr(z.imag), _label_str(lab)])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def _label_str(lab) -> str:
    if isinstance(lab, tuple):
        return " ".join(_label_str(x) if isinstance(x, tuple) else str(x) for x in lab)
    return str(lab)


def _dedup(points, labels, exact=None):
    if len(points) == 0:
        return points, labels, exact
    order = np.lexsort((points.imag, points.real))
    keep = []
    # sweep in real order; only neighbours within the tolerance window can merge
    start = 0
    for idx in order:
        z = points[idx]
        while start < len(keep) and points[keep[start]].real < z.real - DEDUP_TOL:
            start += 1
        window = np.array([points[j] for j in keep[start:]], dtype=complex)
        if window.size and np.min(np.abs(window - z)) <= DEDUP_TOL:
            continue
        keep.append(idx)
    keep.sort()
    pts = points[keep]
    labs = tuple(labels[i] for i in keep)
    ex = None if exact is None else tuple(exact[i] for i in keep)
    return pts, labs, ex


def orbit_points(g: GroupPresentation, depth: int, dedup: bool = True,
                 budget: int = DEFAULT_PIECE_BUDGET) -> OrbitPointSet:
    """Images of 0 under every group element of word length at most ``depth``."""
    els = g.elements(depth, budget)
    pts = np.array([_into_disk(complex(m(0j))) for _, m in els], dtype=complex)
    labels = tuple(lab for lab, _ in els)
    if dedup:
        pts, labels, _ = _dedup(pts, labels)
    return OrbitPointSet(pts, labels)


def orbital_set_points(g: GroupPresentation, C: Sequence, depth: int, dedup: bool = True,
                       budget: int = DEFAULT_PIECE_BUDGET) -> OrbitPointSet:
    """``C`` together with its images under every element of word length at most ``depth``.

    Labels are ``(group label, index into C)``. Entries of ``C`` may be mpmath
    numbers, in which case the images are computed at the current mpmath
    precision and kept in ``exact`` alongside the rounded ``points``.
    """
    C = list(C)
    high = any(not isinstance(c, (int, float, complex, np.number)) for c in C)
    for c in C:
        if not abs(c) < 1:
            raise DomainError(f"condensation point {c} is not inside the unit disk")
    els = g.elements(depth, budget)
    if len(els) * len(C) > budget:
        raise BudgetExceededError("orbital points", len(els) * len(C), budget)
    vals, labels = [], []
    for lab, m in els:
        if high:
            m = _to_mp(m)
        for i, c in enumerate(C):
            vals.append(m(c))
            labels.append((lab, i))
    pts = np.array([_into_disk(complex(v)) for v in vals], dtype=complex)
    exact = tuple(vals) if high else None
    labels = tuple(labels)
    if dedup:
        pts, labels, exact = _dedup(pts, labels, exact)
    return OrbitPointSet(pts, labels, exact)


def _to_mp(m: MoebiusMap) -> MoebiusMap:
    import mpmath

    if isinstance(m.a, mpmath.mpc):
        return m
    return MoebiusMap(mpmath.mpc(m.a), mpmath.mpc(m.b))


def poincare_series(g: GroupPresentation, s: float, depth: int,
                    budget: int = DEFAULT_PIECE_BUDGET) -> float:
    """Truncated Poincaré series ``sum ((1 - |z|) / (1 + |z|))**s`` over the orbit of 0."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    pts = orbit_points(g, depth, budget=budget).points
    r = np.abs(pts)
    return math.fsum((((1 - r) / (1 + r)) ** s).tolist())


@dataclass(frozen=True)
class ExponentEstimate:
    exponent: float
    per_step: tuple
    radii: tuple
    counts: tuple

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "per_step": list(self.per_step),
                "radii": list(self.radii), "counts": list(self.counts)}


def poincare_exponent(g: GroupPresentation, depth: int, n_radii: int = 12,
                      budget: int = DEFAULT_PIECE_BUDGET) -> ExponentEstimate:
    """Exponential growth rate of the orbit counting function ``N(R)``.

    ``N(R)`` counts group elements moving 0 by at most ``R``. Radii run
    geometrically over three doublings up to the smallest displacement among
    words of maximal length, so every ball used is completely enumerated
    (for discrete groups where displacement grows with word length).
    """
    if depth < 1:
        raise InsufficientDataError("depth must be at least 1")
    els = g.elements(depth, budget)
    dist = np.array([m.displacement() for _, m in els])
    lengths = np.array([abs(lab) if isinstance(lab, int) else len(lab) for lab, _ in els])
    r_max = float(dist[lengths == depth].min())
    if not r_max > 0:
        raise InsufficientDataError("orbit does not leave the origin")
    radii = np.geomspace(r_max / 8, r_max, n_radii)
    srt = np.sort(dist)
    counts = np.searchsorted(srt, radii, side="right")
    if len(np.unique(counts)) < 3:
        raise InsufficientDataError("orbit counts do not change over the radius range; raise depth")
    logc = np.log(counts.astype(float))
    slope = float(np.polyfit(radii, logc, 1)[0])
    steps = tuple(float(v) for v in np.diff(logc) / np.diff(radii))
    return ExponentEstimate(slope, steps, tuple(float(r) for r in radii),
                            tuple(int(c) for c in counts))


def limit_projection(points, eps: float = 1e-3) -> np.ndarray:
    """Project points within ``eps`` of the boundary radially onto the unit circle."""
    pts = np.asarray(points, dtype=complex)
    r = np.abs(pts)
    near = r > 1 - eps
    out = pts.copy()
    out[near] = pts[near] / r[near]
    return out


def parse_group(obj) -> GroupPresentation:
    """Group from ``{"group": "cyclic"|"free", "generators": [{"kind": "moebius", ...}]}``."""
    gens = []
    for d in obj.get("generators", []):
        if d.get("kind") != "moebius":
            raise DomainError(f"unknown generator kind {d.get('kind')!r}")
        a = complex(*d["a"])
        b = complex(*d["b"])
        gens.append(MoebiusMap.from_coefficients(a, b))
    return GroupPresentation(tuple(gens), obj.get("group", "cyclic"))


def load_group(path) -> GroupPresentation:
    with open(path) as fh:
        return parse_group(json.load(fh))
