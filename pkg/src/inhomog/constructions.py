"""Named example systems with closed-form dimensions and their specialised counters."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .boxdim import (
    CoverCount,
    bin_count_1d,
    cell_index,
    cell_span,
    mesh_count,
    n_cells_per_side,
    similarity_dimension,
)
from .errors import BudgetExceededError, DomainError, InhomogError
from .hyperbolic import (
    GroupPresentation,
    OrbitPointSet,
    axial_translation,
    orbital_set_points,
)
from .ifs_core import (
    CondensationSet,
    DiagonalAffineMap,
    SimilarityMap,
    parse_system,
    segment,
)
from .orbital import orbital_to_depth
from .validation import DEFAULT_PIECE_BUDGET, check_delta

GARSIA_SCAN_MAX = 14
EXACT_LEVEL_CAP = 1 << 21


def cubic_garsia_root(tol: float = 1e-14) -> float:
    """Real root of ``x**3 - 2x - 2`` in ``[1.7, 1.8]``, by bisection."""
    lo, hi = 1.7, 1.8
    f = lambda x: x ** 3 - 2 * x - 2  # noqa: E731
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BernoulliParams:
    lam: float
    source: str = "explicit"

    def __post_init__(self):
        if self.source not in ("explicit", "garsia-sqrt2", "garsia-cubic"):
            raise DomainError(f"unknown source {self.source!r}")
        if not 0.5 < self.lam < 1:
            raise DomainError(f"lambda must lie in (1/2, 1), got {self.lam!r}")

    @classmethod
    def sqrt2(cls):
        return cls(2 ** -0.5, "garsia-sqrt2")

    @classmethod
    def cubic(cls):
        return cls(1 / cubic_garsia_root(), "garsia-cubic")

    @property
    def garsia(self) -> bool:
        return self.source != "explicit"

    def dimension(self) -> float:
        """``log(4 lambda) / log 2``, the box dimension for Garsia reciprocals."""
        return math.log(4 * self.lam) / math.log(2)


@dataclass(frozen=True)
class CombParams:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"comb needs an integer n >= 2, got {self.n!r}")

    def dimension(self) -> float:
        return 2 - math.log(2) / math.log(self.n)


def sierpinski():
    """Three half-scale similarities with translations (0,0), (1/2,0), (1/4,1/2)."""
    ifs = (SimilarityMap(0.5, t=(0.0, 0.0)),
           SimilarityMap(0.5, t=(0.5, 0.0)),
           SimilarityMap(0.5, t=(0.25, 0.5)))
    return ifs, CondensationSet.empty()


# --------------------------------------------------------------------------
# Bernoulli systems


def bernoulli_system(p: BernoulliParams):
    """``x -> lam x`` and ``x -> lam x + (1 - lam, 0)`` with the left edge as condensation."""
    lam = p.lam
    ifs = (SimilarityMap(lam, t=(0.0, 0.0)), SimilarityMap(lam, t=(1 - lam, 0.0)))
    return ifs, CondensationSet((segment((0.0, 0.0), (0.0, 1.0)),))


def bernoulli_base_point(lam: float, word) -> float:
    """x-coordinate of the image of the origin under the word (letters 1 and 2)."""
    return (1 - lam) * math.fsum((i - 1) * lam ** k for k, i in enumerate(word))


def garsia_min_separation(lam: float, n: int) -> float:
    """Smallest ``|(1 - lam) sum d_k lam**(k-1)|`` over nonzero ``d`` in ``{-1, 0, 1}**n``.

    Sums within rounding error of zero count as exact coincidences and give 0.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if n > GARSIA_SCAN_MAX:
        raise BudgetExceededError("difference vectors", 3 ** n, 3 ** GARSIA_SCAN_MAX)
    vals = np.zeros(1)
    nonzero = np.zeros(1, dtype=bool)
    for k in range(n):
        step = lam ** k
        vals = np.concatenate([vals - step, vals, vals + step])
        nonzero = np.concatenate([np.ones_like(nonzero), nonzero, np.ones_like(nonzero)])
    v = np.abs(vals[nonzero])
    tol = 64 * np.finfo(float).eps * (1 - lam ** n) / (1 - lam)
    m = float(v.min())
    return 0.0 if m <= tol else (1 - lam) * m


def first_levels(lam: float, delta: float, k_max: int, cap: int = EXACT_LEVEL_CAP,
                 resolution: int = 128) -> np.ndarray:
    """For each δ-bin of ``[0, 1)``, the first level whose base points reach it.

    Unreached bins hold ``k_max + 1``. Once a level exceeds ``cap`` points,
    points are snapped to a grid of ``delta / resolution`` before deduplication.
    """
    delta = check_delta(delta)
    nb = n_cells_per_side(delta)
    first = np.full(nb, k_max + 1, dtype=np.int64)
    first[0] = 0
    pts = np.zeros(1)
    eta = delta / resolution
    for level in range(1, k_max + 1):
        pts = np.concatenate([lam * pts, lam * pts + (1 - lam)])
        if pts.size > cap:
            pts = np.unique(np.rint(pts / eta)) * eta
        else:
            pts = np.unique(pts)
        bins = np.unique(cell_index(pts, delta, nb))
        first[bins] = np.minimum(first[bins], level)
    return first


def lambda_k_count(p: BernoulliParams, k: int, delta: float) -> int:
    """Number of δ-bins hit by the base points of all segments of level at most ``k``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return int((first_levels(p.lam, delta, k) <= k).sum())


def strip_indices(lam: float, delta: float):
    """``(k, k0)``: largest ``k`` with ``lam**(k+1) > delta`` and largest ``k0`` with ``2**k0 < 1/delta``."""
    k = max(0, math.floor(math.log(delta) / math.log(lam)) - 1)
    while k > 0 and lam ** (k + 1) <= delta:
        k -= 1
    while lam ** (k + 2) > delta:
        k += 1
    k0 = max(0, math.ceil(math.log2(1 / delta)) - 1)
    while 2 ** (k0 + 1) < 1 / delta:
        k0 += 1
    while k0 > 0 and 2 ** k0 >= 1 / delta:
        k0 -= 1
    return k, k0


def bernoulli_strip_count(p: BernoulliParams, delta: float) -> int:
    """Horizontal-strip estimate ``1/delta + sum_k ceil(lam**k / delta) N_delta(Lambda(k))``.

    Strip ``k`` has height ``lam**k``; the sum runs up to the largest ``k``
    with ``lam**(k+1) > delta``.
    """
    delta = check_delta(delta)
    lam = p.lam
    k, _ = strip_indices(lam, delta)
    first = first_levels(lam, delta, k)
    total = int(round(1 / delta))
    for kk in range(k + 1):
        total += math.ceil(lam ** kk / delta - 1e-9) * int((first <= kk).sum())
    return total


def bernoulli_direct_count(p: BernoulliParams, delta: float) -> int:
    """δ-mesh count of the orbital segments together with the bottom edge.

    Uses the cell convention of :func:`mesh_count`: a column is met up to the
    height of its tallest segment, and unreached columns contribute the
    bottom cell only.
    """
    delta = check_delta(delta)
    lam = p.lam
    k, _ = strip_indices(lam, delta)
    first = first_levels(lam, delta, k + 1)
    n = first.size
    h = lam ** first.astype(float)
    _, top = cell_span(np.zeros(n), h, delta, n)
    rows = top + 1
    rows[first > k + 1] = 1
    return int(rows.sum())


# --------------------------------------------------------------------------
# combs


def comb_system(p: CombParams):
    """``n`` maps onto the left column, one per row, with the bottom edge as condensation."""
    n = p.n
    ifs = tuple(DiagonalAffineMap(0.5, 1.0 / n, (0.0, j / n)) for j in range(n))
    return ifs, CondensationSet((segment((0.0, 0.0), (1.0, 0.0)),))


def comb_depth(n: int, delta: float) -> int:
    """Largest ``m`` with ``delta < n**-m``."""
    m = 0
    while delta < float(n) ** -(m + 1):
        m += 1
    return m


def comb_scales(n: int, k_min: int, k_max: int) -> list:
    """Scales ``n**-j`` spanning roughly the dyadic range ``2**-k_min .. 2**-k_max``."""
    r = math.log(2) / math.log(n)
    j_lo = max(1, math.ceil(k_min * r))
    j_hi = math.ceil(k_max * r)
    if j_hi - j_lo < 2:
        j_lo = max(1, j_hi - 2)
    return [float(n) ** -j for j in range(j_lo, j_hi + 1)]


def comb_direct_count(p: CombParams, delta: float,
                      budget: int = DEFAULT_PIECE_BUDGET) -> CoverCount:
    """Exact δ-mesh count of the level-``m(delta)`` orbital segments plus the left edge."""
    delta = check_delta(delta)
    ifs, C = comb_system(p)
    m = comb_depth(p.n, delta)
    pieces = orbital_to_depth(ifs, C, m, budget).primitives()
    pieces.append(segment((0.0, 0.0), (0.0, 1.0)))
    return mesh_count(pieces, delta)


def comb_closed_sum(p: CombParams, delta: float) -> float:
    """``delta**-1 * sum_{k <= m(delta)} (n/2)**k``."""
    m = comb_depth(p.n, delta)
    return math.fsum((p.n / 2) ** k for k in range(m + 1)) / delta


# --------------------------------------------------------------------------
# Kleinian counterexample


KLEIN_ALPHA = 2
KLEIN_BETA = 3


def kleinian_closed_form(M: int, Nmax: int) -> OrbitPointSet:
    """Points ``(2 - 2**m 3**-n - 3**-n) / (2 + 2**m 3**-n - 3**-n)``, ``|m| <= M``, ``1 <= n <= Nmax``.

    Labels are ``(m, n)``. Values that round onto 1 are moved just inside.
    """
    _check_klein(M, Nmax)
    ms = np.arange(-M, M + 1, dtype=float)
    ns = np.arange(1, Nmax + 1, dtype=float)
    mm, nn = np.meshgrid(ms, ns, indexing="ij")
    b = 3.0 ** -nn
    u = 2.0 ** mm * b
    x = (2 - u - b) / (2 + u - b)
    x = np.clip(x, -np.nextafter(1.0, 0.0), np.nextafter(1.0, 0.0))
    labels = tuple((int(m), int(n)) for m, n in zip(mm.ravel(), nn.ravel()))
    return OrbitPointSet(x.ravel().astype(complex), labels)


def kleinian_group_points(M: int, Nmax: int) -> OrbitPointSet:
    """The same set generated by the axial translation with ``alpha = 2`` acting on ``1 - 3**-n``.

    Computed in extended precision since ``1 - 3**-n`` is not representable
    in floating point for large ``n``. Labels are ``(power, n)``; the point
    with closed-form index ``m`` is the image under the power ``-m``.
    """
    import mpmath

    _check_klein(M, Nmax)
    dps = 30 + math.ceil(Nmax * math.log10(KLEIN_BETA)) + math.ceil(M * math.log10(KLEIN_ALPHA))
    with mpmath.workdps(dps):
        h = axial_translation(mpmath.mpf(KLEIN_ALPHA))
        C = [1 - mpmath.mpf(KLEIN_BETA) ** -n for n in range(1, Nmax + 1)]
        out = orbital_set_points(GroupPresentation((h,)), C, M, dedup=False)
    labels = tuple((power, i + 1) for power, i in out.labels)
    return OrbitPointSet(out.points, labels, out.exact)


def kleinian_discrepancy(M: int, Nmax: int) -> float:
    """Largest gap between closed-form and group-generated points with matching labels."""
    closed = kleinian_closed_form(M, Nmax)
    group = kleinian_group_points(M, Nmax)
    index = {lab: z for lab, z in zip(closed.labels, closed.points)}
    if len(index) != len(group):
        raise InhomogError("closed-form and group point sets differ in size")
    gaps = [abs(index[(-power, n)] - z) for (power, n), z in zip(group.labels, group.points)]
    return float(max(gaps))


def kleinian_counterexample(M: int, Nmax: int, check: bool = True,
                            tol: float = 1e-12) -> OrbitPointSet:
    """Closed-form point set, cross-checked against the group action when ``check``."""
    pts = kleinian_closed_form(M, Nmax)
    if check:
        gap = kleinian_discrepancy(M, Nmax)
        if gap > tol:
            raise InhomogError(f"group and closed-form points disagree by {gap:g}")
    return pts


def _check_klein(M, Nmax):
    if M < 1 or Nmax < 1:
        raise DomainError("M and Nmax must be at least 1")
    if (2 * M + 1) * Nmax > DEFAULT_PIECE_BUDGET:
        raise BudgetExceededError("orbital points", (2 * M + 1) * Nmax, DEFAULT_PIECE_BUDGET)


def covered_fraction(points, delta: float) -> float:
    """Fraction of the δ-intervals of ``(-1, 1)`` containing a point."""
    x = np.asarray(points).real
    return bin_count_1d(x, delta) / int(round(2 / delta))


def interval_counts(points, deltas) -> list:
    x = np.asarray(points).real
    return [CoverCount(float(d), bin_count_1d(x, d), "interval-bins") for d in deltas]


# --------------------------------------------------------------------------
# name lookup


@dataclass(frozen=True)
class Construction:
    name: str
    kind: str
    ifs: tuple = ()
    C: CondensationSet = field(default_factory=CondensationSet.empty)
    oracle: float | None = None
    params: dict = field(default_factory=dict)


def parse_construction(name: str) -> Construction:
    """Build a construction from ``sierpinski``, ``bernoulli:<lambda|sqrt2|cubic>``,
    ``comb:<n>``, ``kleinian-ce:<M>:<N>`` or the path of a JSON system file."""
    head, _, rest = name.partition(":")
    if head == "sierpinski" and not rest:
        ifs, C = sierpinski()
        return Construction(name, "ifs", ifs, C, math.log(3) / math.log(2), {})
    if head == "bernoulli" and rest:
        if rest == "sqrt2":
            p = BernoulliParams.sqrt2()
        elif rest == "cubic":
            p = BernoulliParams.cubic()
        else:
            try:
                p = BernoulliParams(float(rest))
            except ValueError as exc:
                raise DomainError(f"bad lambda in {name!r}") from exc
        ifs, C = bernoulli_system(p)
        return Construction(name, "bernoulli", ifs, C, p.dimension() if p.garsia else None,
                            {"lambda": p.lam, "source": p.source})
    if head == "comb" and rest:
        try:
            p = CombParams(int(rest))
        except ValueError as exc:
            raise DomainError(f"bad n in {name!r}") from exc
        ifs, C = comb_system(p)
        return Construction(name, "comb", ifs, C, p.dimension(), {"n": p.n})
    if head == "kleinian-ce" and rest:
        parts = rest.split(":")
        try:
            M, N = (int(v) for v in parts)
        except ValueError as exc:
            raise DomainError(f"expected kleinian-ce:<M>:<N>, got {name!r}") from exc
        _check_klein(M, N)
        return Construction(name, "kleinian", oracle=1.0, params={"M": M, "N": N})
    if name.endswith(".json"):
        try:
            with open(name) as fh:
                ifs, C = parse_system(json.load(fh))
        except OSError as exc:
            raise DomainError(f"cannot read {name!r}: {exc}") from exc
        s = similarity_dimension(ifs) if isinstance(ifs[0], SimilarityMap) else None
        oracle = None if s is None else max(s, 0.0) if C.is_empty else None
        return Construction(name, "ifs", ifs, C, oracle, {"file": name})
    raise DomainError(f"unknown construction {name!r}")
