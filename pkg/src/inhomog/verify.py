"""Self-checks run by ``inhomog verify``: numerical identities and bounds on sampled systems."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxdim import moran_remainder, moran_tail, similarity_dimension
from .constructions import (
    BernoulliParams,
    garsia_min_separation,
    kleinian_discrepancy,
    sierpinski,
)
from .hyperbolic import (
    GroupPresentation,
    MoebiusMap,
    axial_translation,
    hyp_dist,
    hyp_dist_origin,
    poincare_exponent,
    poincare_series,
)
from .ifs_core import CondensationSet, Point, SimilarityMap
from .orbital import stopping_set, stopping_size, structure_check

SUITES = ("stopping", "moran", "garsia", "hyperbolic", "structure")
GOLDEN_RECIPROCAL = 2 / (1 + math.sqrt(5))
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""
    expected_fail: bool = False

    @property
    def status(self) -> str:
        if self.expected_fail:
            return "XFAIL" if not self.passed else "XPASS"
        return "PASS" if self.passed else "FAIL"

    @property
    def ok(self) -> bool:
        # an expected failure that passes is reported as a failure
        return self.passed != self.expected_fail


def random_similarity_ifs(rng, n_max: int = 4, lo: float = 0.2, hi: float = 0.8):
    """Similarity IFS with 2..n_max maps, scales uniform in ``[lo, hi]``, placed inside the square."""
    n = int(rng.integers(2, n_max + 1))
    maps = []
    for _ in range(n):
        r = float(rng.uniform(lo, hi))
        t = rng.uniform(0.0, 1.0 - r, size=2)
        maps.append(SimilarityMap(r, t=(float(t[0]), float(t[1]))))
    return tuple(maps)


def random_sample(n: int = 50, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    return [random_similarity_ifs(rng) for _ in range(n)]


def stopping_bound_violations(ifs, k_max: int = 12) -> list:
    """``(k, size, lower, upper)`` for every ``delta = 2**-k`` breaking ``delta**-s <= |I| <= Lmin**-s delta**-s``."""
    s = similarity_dimension(ifs)
    lmin = min(m.lip for m in ifs)
    bad = []
    for k in range(1, k_max + 1):
        delta = 2.0 ** -k
        size = stopping_size(ifs, delta)
        lower = delta ** -s
        upper = lmin ** -s * delta ** -s
        if not (lower * (1 - BOUND_SLACK) <= size <= upper * (1 + BOUND_SLACK)):
            bad.append((k, size, lower, upper))
    return bad


def moran_tail_ratio(ifs, offset: float = 0.05, K: int = 200) -> float:
    """Remainder beyond level ``K`` over the partial sum up to ``K`` at ``t = s + offset``."""
    t = similarity_dimension(ifs) + offset
    partial = moran_tail(ifs, t, K)[-1]
    return moran_remainder(ifs, t, K) / partial


def moran_growth(ifs, offset: float = 0.05, K: int = 200) -> float:
    """Ratio of consecutive partial sums at level ``K`` for ``t = s - offset``."""
    t = similarity_dimension(ifs) - offset
    sums = moran_tail(ifs, t, K + 1)
    return sums[-1] / sums[-2]


def scaled_separations(lam: float, ns) -> dict:
    return {n: garsia_min_separation(lam, n) * 2 ** n for n in ns}


def _stopping_suite():
    sample = random_sample()
    bad = [(i, v) for i, ifs in enumerate(sample) for v in stopping_bound_violations(ifs)]
    yield CheckResult("stopping", "size bounds on 50 random systems, k<=12", not bad,
                      f"{len(bad)} violations")
    mism = 0
    for ifs in sample[:10]:
        for k in range(1, 13):
            d = 2.0 ** -k
            size = stopping_size(ifs, d)
            if size > 20_000:
                break
            if len(stopping_set(ifs, d).words) != size:
                mism += 1
    yield CheckResult("stopping", "tally agrees with word enumeration", mism == 0,
                      f"{mism} mismatches")
    ifs, _ = sierpinski()
    sizes = [len(stopping_set(ifs, 2.0 ** -k * (1 + 1e-9)).words) for k in range(1, 8)]
    yield CheckResult("stopping", "Sierpinski stopping has 3**k words",
                      sizes == [3 ** k for k in range(1, 8)], str(sizes))


def _moran_suite():
    sample = random_sample()
    ratios = [moran_tail_ratio(ifs) for ifs in sample]
    bad = sum(r >= 1e-6 for r in ratios)
    yield CheckResult("moran", "tail beyond 200 below 1e-6 at s+0.05", bad == 0,
                      f"{bad}/50 above, worst {max(ratios):.3g}")
    growth = [moran_growth(ifs) for ifs in sample]
    bad = sum(g <= 1 + 1e-4 for g in growth)
    yield CheckResult("moran", "partial sums grow at s-0.05", bad == 0,
                      f"{bad}/50 at or below 1+1e-4, smallest {min(growth):.6f}")
    cases = [([0.5, 0.5], 1.0), ([0.5] * 3, math.log(3) / math.log(2)), ([0.5, 0.25, 0.25], 1.0)]
    errs = [abs(similarity_dimension(r) - s) for r, s in cases]
    yield CheckResult("moran", "closed-form similarity dimensions", max(errs) <= 1e-10,
                      f"max error {max(errs):.2e}")


def _garsia_suite():
    ns = range(1, 13)
    for label, p in (("sqrt2", BernoulliParams.sqrt2()), ("cubic", BernoulliParams.cubic())):
        v = scaled_separations(p.lam, ns)
        floor = 0.9 * min(v.values())
        ok = all(x >= floor for x in v.values()) and min(v.values()) > 0
        ratio = max(v[n] for n in range(2, 13)) / min(v[n] for n in range(2, 13))
        yield CheckResult("garsia", f"{label}: separation times 2**n bounded below", ok,
                          f"min {min(v.values()):.4f}, max/min over n=2..12 {ratio:.3f}")
    v = scaled_separations(GOLDEN_RECIPROCAL, ns)
    ok = min(v.values()) > 0
    yield CheckResult("garsia", "golden reciprocal: separation times 2**n bounded below", ok,
                      f"n=4 {v[4]:.3g}, n=12 {v[12]:.3g}", expected_fail=True)


def _hyperbolic_suite():
    rng = np.random.default_rng(1)
    h = axial_translation(2.0)
    pts = [complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(9)]
    ident = h.compose(h.inverse())
    err = max(abs(ident(z) - z) for z in pts)
    yield CheckResult("hyperbolic", "h composed with its inverse is the identity", err <= 1e-12,
                      f"max error {err:.2e}")
    g = MoebiusMap.from_coefficients(1.3 + 0.4j, 0.2 - 0.7j)
    prod = h.compose(g).compose(h).compose(g.inverse())
    norm = abs(abs(prod.a) ** 2 - abs(prod.b) ** 2 - 1)
    yield CheckResult("hyperbolic", "normalization preserved under composition", norm <= 1e-10,
                      f"deviation {norm:.2e}")
    iso = max(abs(hyp_dist(g(x), g(y)) - hyp_dist(x, y)) for x, y in zip(pts, pts[1:]))
    yield CheckResult("hyperbolic", "maps are isometries", iso <= 1e-10, f"max error {iso:.2e}")
    zs = [r * np.exp(1j * a) for r, a in zip(rng.uniform(0, 0.99, 100), rng.uniform(0, 6.3, 100))]
    s = 1.3
    ident_err = max(abs(math.exp(-s * hyp_dist_origin(z)) - ((1 - abs(z)) / (1 + abs(z))) ** s)
                    for z in zs)
    yield CheckResult("hyperbolic", "series term identity", ident_err <= 1e-12,
                      f"max error {ident_err:.2e}")
    cyc = GroupPresentation((h,))
    closed = 1 + 2 * math.fsum(2.0 ** -m for m in range(1, 21))
    serr = abs(poincare_series(cyc, 1.0, 20) - closed)
    yield CheckResult("hyperbolic", "cyclic series matches closed form", serr <= 1e-10,
                      f"error {serr:.2e}")
    e = poincare_exponent(cyc, 200).exponent
    yield CheckResult("hyperbolic", "cyclic exponent near zero", e <= 0.05, f"estimate {e:.4f}")
    T = 4.0
    a, b = math.cosh(T / 2), math.sinh(T / 2)
    free = GroupPresentation((MoebiusMap(a + 0j, b + 0j), MoebiusMap(a + 0j, 1j * b)), "free")
    e = poincare_exponent(free, 8).exponent
    yield CheckResult("hyperbolic", "free group exponent in (0, 1]", 0 < e <= 1,
                      f"estimate {e:.4f}, log 3 / T = {math.log(3) / T:.4f}")
    gap = kleinian_discrepancy(50, 50)
    yield CheckResult("hyperbolic", "counterexample closed form matches group action",
                      gap <= 1e-12, f"max gap {gap:.2e}")


def _structure_suite():
    ifs, _ = sierpinski()
    C = CondensationSet((Point(0.9, 0.9),))
    for K in (4, 6):
        gap = structure_check(ifs, C, K)
        bound = 0.5 ** K * math.sqrt(2)
        yield CheckResult("structure", f"level {K} vs {K + 1} gap within (1/2)**K diam",
                          gap <= bound, f"gap {gap:.3g}, bound {bound:.3g}")


_RUNNERS = {
    "stopping": _stopping_suite,
    "moran": _moran_suite,
    "garsia": _garsia_suite,
    "hyperbolic": _hyperbolic_suite,
    "structure": _structure_suite,
}


def run_suite(name: str) -> list:
    if name == "all":
        return [r for s in SUITES for r in _RUNNERS[s]()]
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return list(_RUNNERS[name]())


def format_table(results) -> str:
    width = max((len(r.name) for r in results), default=10)
    lines = [f"{'suite':<11} {'check':<{width}}  {'status':<6} detail"]
    for r in results:
        lines.append(f"{r.suite:<11} {r.name:<{width}}  {r.status:<6} {r.detail}")
    return "\n".join(lines)
