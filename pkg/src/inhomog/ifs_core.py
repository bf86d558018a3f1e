"""Contraction maps, words and condensation-set geometry on the unit square.

Maps carry explicit scale fields so that the Lipschitz constant of a
composition is an exact product of scalars rather than a norm estimate.
Words are plain tuples of 1-based map indices; the empty tuple is the
empty word and composes to the identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, InvalidWordError, UnsupportedGeometryError

TAU = 2.0 * math.pi
GEOM_TOL = 1e-12

Word = tuple  # tuple[int, ...] of 1-based indices


# --------------------------------------------------------------------------
# primitives


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    kind = "point"

    def bounds(self):
        return self.x, self.x, self.y, self.y


@dataclass(frozen=True, slots=True)
class Segment:
    a: tuple
    b: tuple

    kind = "segment"

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    @property
    def axis_aligned(self) -> bool:
        return self.a[0] == self.b[0] or self.a[1] == self.b[1]

    def bounds(self):
        return (min(self.a[0], self.b[0]), max(self.a[0], self.b[0]),
                min(self.a[1], self.b[1]), max(self.a[1], self.b[1]))


@dataclass(frozen=True, slots=True)
class Rect:
    lo: tuple
    hi: tuple

    kind = "rect"

    def bounds(self):
        return self.lo[0], self.hi[0], self.lo[1], self.hi[1]


Primitive = Union[Point, Segment, Rect]


def segment(a, b):
    """Segment from ``a`` to ``b``; a zero-length segment becomes a Point."""
    a = (float(a[0]), float(a[1]))
    b = (float(b[0]), float(b[1]))
    if a == b:
        return Point(*a)
    return Segment(a, b)


def rect(a, b):
    """Axis-aligned rectangle with corners ``a`` and ``b`` (any order).

    Degenerate rectangles collapse to a Segment or a Point.
    """
    x0, x1 = sorted((float(a[0]), float(b[0])))
    y0, y1 = sorted((float(a[1]), float(b[1])))
    if x0 == x1 or y0 == y1:
        return segment((x0, y0), (x1, y1))
    return Rect((x0, y0), (x1, y1))


UNIT_SQUARE = Rect((0.0, 0.0), (1.0, 1.0))


def inside_unit_square(p: Primitive, tol: float = GEOM_TOL) -> bool:
    x0, x1, y0, y1 = p.bounds()
    return x0 >= -tol and y0 >= -tol and x1 <= 1 + tol and y1 <= 1 + tol


# --------------------------------------------------------------------------
# maps


def _cos_sin(angle: float):
    # quarter turns are snapped so axis-preserving maps stay exact
    q = angle / (math.pi / 2)
    r = round(q)
    if abs(q - r) <= 1e-12:
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[r % 4]
    return math.cos(angle), math.sin(angle)


@dataclass(frozen=True)
class SimilarityMap:
    """``x -> scale * R(angle) * F * x + t`` with F the optional reflection in the x-axis."""

    scale: float
    angle: float = 0.0
    reflect: bool = False
    t: tuple = (0.0, 0.0)

    _cs: tuple = field(init=False, repr=False, compare=False)
    axis_preserving: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 < self.scale <= 1.0):
            raise DomainError(f"similarity scale must lie in (0, 1), got {self.scale}")
        angle = float(self.angle) % TAU
        q = angle / (math.pi / 2)
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "t", (float(self.t[0]), float(self.t[1])))
        object.__setattr__(self, "_cs", _cos_sin(angle))
        object.__setattr__(self, "axis_preserving", abs(q - round(q)) <= 1e-12)

    kind = "similarity"

    @property
    def lip(self) -> float:
        return self.scale

    def linear(self) -> np.ndarray:
        c, s = self._cs
        f = -1.0 if self.reflect else 1.0
        return self.scale * np.array([[c, -s * f], [s, c * f]])

    def apply(self, x: float, y: float):
        c, s = self._cs
        if self.reflect:
            y = -y
        k = self.scale
        return k * (c * x - s * y) + self.t[0], k * (s * x + c * y) + self.t[1]

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.linear().T + np.asarray(self.t)

    def compose(self, other: "SimilarityMap") -> "SimilarityMap":
        """Return ``self ∘ other``."""
        if not isinstance(other, SimilarityMap):
            raise DomainError("cannot compose a similarity with a non-similarity map")
        angle = self.angle - other.angle if self.reflect else self.angle + other.angle
        return SimilarityMap(
            self.scale * other.scale,
            angle,
            self.reflect != other.reflect,
            self.apply(*other.t),
        )

    @classmethod
    def identity(cls) -> "SimilarityMap":
        return cls(1.0)

    def to_dict(self) -> dict:
        return {"kind": "similarity", "scale": self.scale, "angle": self.angle,
                "reflect": self.reflect, "t": list(self.t)}


@dataclass(frozen=True)
class DiagonalAffineMap:
    """``(x, y) -> (sx * x + tx, sy * y + ty)``."""

    sx: float
    sy: float
    t: tuple = (0.0, 0.0)

    def __post_init__(self):
        for name in ("sx", "sy"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        object.__setattr__(self, "t", (float(self.t[0]), float(self.t[1])))

    kind = "diag"
    axis_preserving = True

    @property
    def lip(self) -> float:
        return max(self.sx, self.sy)

    def linear(self) -> np.ndarray:
        return np.array([[self.sx, 0.0], [0.0, self.sy]])

    def apply(self, x: float, y: float):
        return self.sx * x + self.t[0], self.sy * y + self.t[1]

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts * np.array([self.sx, self.sy]) + np.asarray(self.t)

    def compose(self, other: "DiagonalAffineMap") -> "DiagonalAffineMap":
        if not isinstance(other, DiagonalAffineMap):
            raise DomainError("cannot compose a diagonal affine map with a non-diagonal map")
        return DiagonalAffineMap(self.sx * other.sx, self.sy * other.sy,
                                 self.apply(*other.t))

    @classmethod
    def identity(cls) -> "DiagonalAffineMap":
        return cls(1.0, 1.0)

    def to_dict(self) -> dict:
        return {"kind": "diag", "sx": self.sx, "sy": self.sy, "t": list(self.t)}


ContractionMap = Union[SimilarityMap, DiagonalAffineMap]

_CORNERS = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))


def maps_into_unit_square(m: ContractionMap, tol: float = GEOM_TOL) -> bool:
    for c in _CORNERS:
        x, y = m.apply(*c)
        if not (-tol <= x <= 1 + tol and -tol <= y <= 1 + tol):
            return False
    return True


def validate_ifs(ifs: Sequence[ContractionMap]) -> tuple:
    """Check an IFS and return it as a tuple.

    All maps must be of one kind, strict contractions, and carry the unit
    square into itself.
    """
    ifs = tuple(ifs)
    if not ifs:
        raise DomainError("an IFS needs at least one map")
    kinds = {type(m) for m in ifs}
    if len(kinds) != 1:
        raise DomainError("mixed similarity and diagonal-affine maps are not supported")
    for i, m in enumerate(ifs, 1):
        if not m.lip < 1.0:
            raise DomainError(f"map {i} is not a strict contraction (Lip = {m.lip})")
        if not maps_into_unit_square(m):
            raise DomainError(f"map {i} does not carry the unit square into itself")
    return ifs


def check_word(w: Iterable[int], n: int) -> Word:
    w = tuple(int(i) for i in w)
    for i in w:
        if not 1 <= i <= n:
            raise InvalidWordError(f"index {i} out of range 1..{n}")
    return w


def word_str(w: Word) -> str:
    return "-".join(str(i) for i in w)


def compose(ifs: Sequence[ContractionMap], w: Iterable[int]) -> ContractionMap:
    """``S_w = S_{i1} ∘ ... ∘ S_{ik}``, folded left to right.

    The empty word gives the identity map with Lip = 1.
    """
    w = check_word(w, len(ifs))
    m = type(ifs[0]).identity()
    for i in w:
        m = m.compose(ifs[i - 1])
    return m


def lip_of_word(ifs: Sequence[ContractionMap], w: Iterable[int]) -> float:
    return compose(ifs, w).lip


# --------------------------------------------------------------------------
# condensation sets


@dataclass(frozen=True)
class CondensationSet:
    """Finite union of primitives inside the unit square; empty encodes C = ∅."""

    primitives: tuple = ()

    def __post_init__(self):
        prims = tuple(self.primitives)
        for p in prims:
            if not isinstance(p, (Point, Segment, Rect)):
                raise DomainError(f"not a primitive: {p!r}")
            if not inside_unit_square(p):
                raise DomainError(f"primitive {p} lies outside the unit square")
        object.__setattr__(self, "primitives", prims)

    @classmethod
    def empty(cls) -> "CondensationSet":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.primitives

    def __len__(self):
        return len(self.primitives)

    def __iter__(self):
        return iter(self.primitives)


def apply_to_primitive(m: ContractionMap, p: Primitive) -> Primitive:
    if isinstance(p, Point):
        return Point(*m.apply(p.x, p.y))
    if isinstance(p, Segment):
        return segment(m.apply(*p.a), m.apply(*p.b))
    if isinstance(p, Rect):
        if not m.axis_preserving:
            raise UnsupportedGeometryError(
                "rotated rectangles are not representable; split the Rect into "
                "segments or sample points first")
        return rect(m.apply(*p.lo), m.apply(*p.hi))
    raise DomainError(f"not a primitive: {p!r}")


def image_bbox(m: ContractionMap, p: Primitive) -> Primitive:
    """Axis-aligned bounding box of ``m(p)``."""
    x0, x1, y0, y1 = p.bounds()
    pts = np.array([m.apply(x, y) for x in (x0, x1) for y in (y0, y1)])
    return rect(pts.min(axis=0), pts.max(axis=0))


# --------------------------------------------------------------------------
# JSON description files


def _pair(v, field):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise DomainError(f"field {field!r} must be a pair of numbers")
    return float(v[0]), float(v[1])


def map_from_dict(d: dict) -> ContractionMap:
    kind = d.get("kind")
    if kind == "similarity":
        return SimilarityMap(float(d["scale"]), float(d.get("angle", 0.0)),
                             bool(d.get("reflect", False)), _pair(d.get("t", (0, 0)), "t"))
    if kind == "diag":
        return DiagonalAffineMap(float(d["sx"]), float(d["sy"]), _pair(d.get("t", (0, 0)), "t"))
    raise DomainError(f"unknown map kind {kind!r}")


def primitive_from_dict(d: dict) -> Primitive:
    kind = d.get("kind")
    if kind == "point":
        return Point(*_pair(d["a"], "a"))
    if kind == "segment":
        return segment(_pair(d["a"], "a"), _pair(d["b"], "b"))
    if kind == "rect":
        return rect(_pair(d["a"], "a"), _pair(d["b"], "b"))
    raise DomainError(f"unknown primitive kind {kind!r}")


def primitive_to_dict(p: Primitive) -> dict:
    if isinstance(p, Point):
        return {"kind": "point", "a": [p.x, p.y]}
    if isinstance(p, Segment):
        return {"kind": "segment", "a": list(p.a), "b": list(p.b)}
    return {"kind": "rect", "a": list(p.lo), "b": list(p.hi)}


def parse_system(obj: dict):
    """Parse ``{"maps": [...], "condensation": [...]}`` into ``(ifs, C)``."""
    if "maps" not in obj:
        raise DomainError("system description needs a 'maps' list")
    ifs = validate_ifs(map_from_dict(d) for d in obj["maps"])
    C = CondensationSet(tuple(primitive_from_dict(d) for d in obj.get("condensation", [])))
    return ifs, C


def system_to_dict(ifs, C: CondensationSet) -> dict:
    return {"maps": [m.to_dict() for m in ifs],
            "condensation": [primitive_to_dict(p) for p in C]}


def load_system(path):
    with open(path) as fh:
        return parse_system(json.load(fh))
