import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from inhomog.boxdim import mesh_count, similarity_dimension
from inhomog.constructions import (
    BernoulliParams,
    CombParams,
    bernoulli_base_point,
    bernoulli_direct_count,
    bernoulli_strip_count,
    bernoulli_system,
    comb_closed_sum,
    comb_depth,
    comb_direct_count,
    comb_scales,
    comb_system,
    covered_fraction,
    cubic_garsia_root,
    first_levels,
    garsia_min_separation,
    kleinian_closed_form,
    kleinian_counterexample,
    kleinian_discrepancy,
    kleinian_group_points,
    lambda_k_count,
    parse_construction,
    sierpinski,
    strip_indices,
)
from inhomog.errors import BudgetExceededError, DomainError
from inhomog.ifs_core import CondensationSet, Segment, segment
from inhomog.orbital import homogeneous_approx, orbital_to_depth

SQRT2 = BernoulliParams.sqrt2()
CUBIC = BernoulliParams.cubic()


def test_cubic_root():
    x = cubic_garsia_root()
    assert abs(x ** 3 - 2 * x - 2) < 1e-12
    assert f"{x:.5f}" == "1.76929"
    assert CUBIC.lam == pytest.approx(1 / x)


def test_params_validated():
    with pytest.raises(DomainError):
        BernoulliParams(0.4)
    with pytest.raises(DomainError):
        CombParams(1)


def test_sierpinski_similarity_dimension():
    ifs, C = sierpinski()
    assert C.is_empty
    assert similarity_dimension(ifs) == pytest.approx(math.log(3) / math.log(2), abs=1e-12)


@pytest.mark.parametrize("p", [SQRT2, CUBIC])
def test_bernoulli_segments_structure(p):
    ifs, C = bernoulli_system(p)
    approx = orbital_to_depth(ifs, C, 10)
    for piece in approx.pieces:
        seg = piece.primitive
        n = len(piece.word)
        x = bernoulli_base_point(p.lam, piece.word)
        if n == 0:
            assert seg == Segment((0.0, 0.0), (0.0, 1.0))
            continue
        assert isinstance(seg, Segment)
        assert seg.a[0] == pytest.approx(x, abs=1e-14) and seg.b[0] == pytest.approx(x, abs=1e-14)
        assert seg.a[1] == 0.0 and seg.b[1] == pytest.approx(p.lam ** n, rel=1e-12)


def test_all_ones_word_at_origin():
    assert bernoulli_base_point(SQRT2.lam, (1,) * 9) == 0.0


def test_homogeneous_part_on_bottom_edge():
    ifs, _ = bernoulli_system(SQRT2)
    delta = 2.0 ** -6
    for b in homogeneous_approx(ifs, delta):
        assert 0 <= b.lo[0] and b.hi[0] <= 1 + 1e-12
        assert b.lo[1] == 0 and b.hi[1] < delta


def test_min_separation_first_level():
    for lam in (SQRT2.lam, CUBIC.lam, 0.8):
        assert garsia_min_separation(lam, 1) == pytest.approx(1 - lam)


@pytest.mark.parametrize("p", [SQRT2, CUBIC])
def test_min_separation_matches_word_pairs(p):
    lam = p.lam
    for n in range(2, 7):
        xs = [bernoulli_base_point(lam, w) for w in itertools.product((1, 2), repeat=n)]
        brute = min(abs(a - b) for a, b in itertools.combinations(xs, 2))
        assert garsia_min_separation(lam, n) == pytest.approx(brute, rel=1e-9)


def test_sqrt2_separation_bounded_below():
    vals = [garsia_min_separation(SQRT2.lam, n) * 2 ** n for n in range(1, 13)]
    K = min(vals)
    assert K > 0.2
    assert all(v >= 0.9 * K for v in vals)


def test_golden_reciprocal_coincides():
    lam = 2 / (1 + math.sqrt(5))
    assert garsia_min_separation(lam, 2) > 0
    # 1 - lam - lam**2 == 0, so distinct words of length 3 share a base point
    assert garsia_min_separation(lam, 3) == 0.0


def test_separation_budget():
    with pytest.raises(BudgetExceededError):
        garsia_min_separation(SQRT2.lam, 15)


def exact_bins(lam_mp, k, j):
    """Distinct ``2**-j`` bins of level-``k`` base points, in 60-digit arithmetic."""
    with mpmath.workdps(60):
        lam = lam_mp()
        bins = set()
        for d in itertools.product((0, 1), repeat=k):
            x = (1 - lam) * mpmath.fsum(di * lam ** i for i, di in enumerate(d))
            bins.add(int(mpmath.floor(x * 2 ** j)))
    return len(bins)


def test_lambda_k_count_exact_enumeration():
    oracle = exact_bins(lambda: 1 / mpmath.sqrt(2), 10, 20)
    assert oracle == 2 ** 10
    assert lambda_k_count(SQRT2, 10, 2.0 ** -20) == oracle


def test_lambda_k_count_small_cases():
    assert lambda_k_count(SQRT2, 0, 2.0 ** -8) == 1
    for k, j in [(6, 4), (8, 6), (9, 12)]:
        assert lambda_k_count(SQRT2, k, 2.0 ** -j) == exact_bins(lambda: 1 / mpmath.sqrt(2), k, j)


def test_quantized_levels_agree_with_exact():
    for j, k in [(8, 14), (10, 18), (12, 18)]:
        d = 2.0 ** -j
        exact = first_levels(SQRT2.lam, d, k)
        snapped = first_levels(SQRT2.lam, d, k, cap=1 << 10)
        assert np.array_equal(exact, snapped)


def test_lambda_k_ratio_band():
    ratios = []
    for j in range(4, 15):
        d = 2.0 ** -j
        first = first_levels(SQRT2.lam, d, 18)
        for k in range(0, 19):
            ratios.append(int((first <= k).sum()) / min(2 ** k, 1 / d))
    assert max(ratios) / min(ratios) <= 16


def test_strip_indices():
    k, k0 = strip_indices(SQRT2.lam, 2.0 ** -6)
    assert SQRT2.lam ** (k + 1) > 2.0 ** -6 >= SQRT2.lam ** (k + 2)
    assert 2 ** k0 < 2 ** 6 <= 2 ** (k0 + 1)


def test_strip_count_coarse():
    assert bernoulli_strip_count(SQRT2, 0.5) >= 2


def test_direct_count_equals_mesh_of_segments():
    ifs, C = bernoulli_system(SQRT2)
    for j in (4, 5, 7):
        d = 2.0 ** -j
        k, _ = strip_indices(SQRT2.lam, d)
        pieces = orbital_to_depth(ifs, C, k + 3).primitives() + [segment((0, 0), (1, 0))]
        assert bernoulli_direct_count(SQRT2, d) == mesh_count(pieces, d).count


@pytest.mark.parametrize("p", [SQRT2, CUBIC])
def test_strip_and_direct_within_factor_8(p):
    for j in range(6, 13):
        d = 2.0 ** -j
        a, b = bernoulli_strip_count(p, d), bernoulli_direct_count(p, d)
        assert 1 / 8 <= a / b <= 8


@pytest.mark.parametrize("n", [2, 3, 5])
def test_comb_levels(n):
    ifs, C = comb_system(CombParams(n))
    approx = orbital_to_depth(ifs, C, 3)
    for k in range(4):
        level = [p.primitive for p in approx.pieces if len(p.word) == k]
        assert len(level) == n ** k
        assert all(s.length == pytest.approx(2.0 ** -k) for s in level)


def test_comb_homogeneous_on_left_edge():
    ifs, _ = comb_system(CombParams(3))
    for b in homogeneous_approx(ifs, 0.01):
        assert b.lo[0] == 0.0 and b.hi[0] <= 2.0 ** -6


def test_comb_depth():
    assert comb_depth(3, 3.0 ** -8) == 7
    assert comb_depth(3, 3.0 ** -8 * 0.99) == 8
    assert comb_depth(10, 0.5) == 0


def test_comb_scales():
    assert comb_scales(2, 4, 12) == [2.0 ** -j for j in range(4, 13)]
    assert comb_scales(3, 4, 12) == [3.0 ** -j for j in range(3, 9)]
    assert comb_scales(10, 4, 12) == [10.0 ** -j for j in range(2, 5)]


def test_comb_count_near_geometric_sum():
    p = CombParams(3)
    d = 3.0 ** -8
    c = comb_direct_count(p, d).count
    m = comb_depth(3, d)
    assert 0.25 <= c / (1.5 ** m / d) <= 4


@pytest.mark.parametrize("n", [2, 3, 10])
def test_comb_count_within_factor_4_of_closed_sum(n):
    p = CombParams(n)
    for d in comb_scales(n, 4, 12):
        ratio = comb_direct_count(p, d).count / comb_closed_sum(p, d)
        assert 0.25 <= ratio <= 4


def test_kleinian_agreement_small():
    assert kleinian_discrepancy(20, 20) <= 1e-12
    pts = kleinian_counterexample(10, 10)
    assert len(pts) == 21 * 10


def test_kleinian_power_labels():
    group = kleinian_group_points(2, 3)
    closed = dict(zip(kleinian_closed_form(2, 3).labels, kleinian_closed_form(2, 3).points))
    for (power, n), z in zip(group.labels, group.points):
        assert abs(closed[(-power, n)] - z) <= 1e-12


def test_kleinian_exact_containment():
    for m in range(-50, 51):
        for n in range(1, 51):
            b = Fraction(1, 3 ** n)
            u = Fraction(2) ** m * b
            x = (2 - u - b) / (2 + u - b)
            assert -1 < x < 1


def test_kleinian_limit_along_n():
    pts = kleinian_closed_form(1, 40)
    x = {lab: z.real for lab, z in zip(pts.labels, pts.points)}
    assert [x[(0, n)] for n in (1, 2, 3)] == pytest.approx([1 - 3.0 ** -n for n in (1, 2, 3)])
    assert x[(0, 40)] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.abs(pts.points) < 1)


def test_kleinian_coverage_grows():
    fr = [covered_fraction(kleinian_closed_form(M, M).points, 2.0 ** -6) for M in (50, 100, 200)]
    assert fr == sorted(fr)


def test_parse_construction():
    assert parse_construction("sierpinski").oracle == pytest.approx(math.log(3) / math.log(2))
    assert parse_construction("bernoulli:sqrt2").oracle == pytest.approx(1.5)
    assert parse_construction("bernoulli:cubic").params["source"] == "garsia-cubic"
    assert parse_construction("bernoulli:0.7").oracle is None
    assert parse_construction("comb:3").oracle == pytest.approx(2 - math.log(2) / math.log(3))
    k = parse_construction("kleinian-ce:5:6")
    assert k.kind == "kleinian" and k.params == {"M": 5, "N": 6}
    for bad in ("comb:x", "bernoulli:2", "kleinian-ce:5", "hilbert", "comb:1"):
        with pytest.raises(DomainError):
            parse_construction(bad)


def test_parse_json_system(tmp_path):
    import json

    from inhomog.ifs_core import system_to_dict

    ifs, C = sierpinski()
    path = tmp_path / "s.json"
    path.write_text(json.dumps(system_to_dict(ifs, C)))
    con = parse_construction(str(path))
    assert con.ifs == ifs
    assert con.oracle == pytest.approx(math.log(3) / math.log(2))
