import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomog.errors import DomainError, InvalidWordError, UnsupportedGeometryError
from inhomog.ifs_core import (
    CondensationSet,
    DiagonalAffineMap,
    Point,
    Rect,
    Segment,
    SimilarityMap,
    apply_to_primitive,
    compose,
    lip_of_word,
    load_system,
    maps_into_unit_square,
    parse_system,
    rect,
    segment,
    system_to_dict,
    validate_ifs,
)

SIERPINSKI = (SimilarityMap(0.5, t=(0.0, 0.0)),
              SimilarityMap(0.5, t=(0.5, 0.0)),
              SimilarityMap(0.5, t=(0.25, 0.5)))

GRID = [(x, y) for x in (0.1, 0.5, 0.9) for y in (0.2, 0.5, 0.8)]


def test_compose_two_halves():
    ifs = (SimilarityMap(0.5), SimilarityMap(0.5, t=(0.5, 0.5)))
    assert compose(ifs, (1, 1)).scale == 0.25


def test_empty_word_is_identity():
    m = compose(SIERPINSKI, ())
    assert m.lip == 1.0
    assert m.apply(0.3, 0.7) == (0.3, 0.7)


def test_compose_applies_first_letter_last():
    m = compose(SIERPINSKI, (1, 2, 3))
    assert m.scale == 0.125
    for p in GRID:
        expected = SIERPINSKI[0].apply(*SIERPINSKI[1].apply(*SIERPINSKI[2].apply(*p)))
        assert np.allclose(m.apply(*p), expected, atol=1e-15)


def test_invalid_word():
    with pytest.raises(InvalidWordError):
        compose(SIERPINSKI, (1, 4))
    with pytest.raises(InvalidWordError):
        compose(SIERPINSKI, (0,))


def test_apply_segment_and_comb_map():
    s = apply_to_primitive(SimilarityMap(0.5), segment((0, 0), (0, 1)))
    assert s == Segment((0.0, 0.0), (0.0, 0.5))
    comb = DiagonalAffineMap(0.5, 1 / 3, (0.0, 1 / 3))
    s = apply_to_primitive(comb, segment((0, 0), (1, 0)))
    assert s.a == pytest.approx((0.0, 1 / 3)) and s.b == pytest.approx((0.5, 1 / 3))


def test_apply_point_near_identity():
    p = apply_to_primitive(SimilarityMap(0.999), Point(0.5, 0.5))
    assert (p.x, p.y) == pytest.approx((0.4995, 0.4995), abs=1e-15)


def test_quarter_turn_keeps_rectangles():
    m = SimilarityMap(0.5, angle=math.pi / 2, t=(0.5, 0.0))
    r = apply_to_primitive(m, Rect((0.0, 0.0), (1.0, 0.5)))
    assert isinstance(r, Rect)
    assert r.lo == pytest.approx((0.25, 0.0)) and r.hi == pytest.approx((0.5, 0.5))


def test_rotated_rectangle_rejected():
    m = SimilarityMap(0.5, angle=0.3, t=(0.25, 0.25))
    with pytest.raises(UnsupportedGeometryError):
        apply_to_primitive(m, Rect((0.0, 0.0), (1.0, 1.0)))


def test_degenerate_factories():
    assert isinstance(segment((0.2, 0.2), (0.2, 0.2)), Point)
    assert isinstance(rect((0.1, 0.1), (0.1, 0.4)), Segment)
    r = rect((0.4, 0.3), (0.1, 0.2))
    assert r.lo == (0.1, 0.2) and r.hi == (0.4, 0.3)


def test_validate_rejects_bad_systems():
    with pytest.raises(DomainError):
        validate_ifs(())
    with pytest.raises(DomainError):
        validate_ifs((SimilarityMap(0.5, t=(0.7, 0.0)),))
    with pytest.raises(DomainError):
        validate_ifs((SimilarityMap(0.5), DiagonalAffineMap(0.5, 0.5, (0.5, 0.5))))
    with pytest.raises(DomainError):
        SimilarityMap(1.5)


def test_condensation_must_lie_in_square():
    with pytest.raises(DomainError):
        CondensationSet((Point(1.5, 0.0),))
    assert CondensationSet.empty().is_empty


def test_system_round_trip(tmp_path):
    ifs = (SimilarityMap(0.5, angle=math.pi, reflect=True, t=(0.5, 0.5)), SimilarityMap(0.25))
    C = CondensationSet((Point(0.1, 0.2), segment((0, 0), (1, 0)), rect((0.2, 0.2), (0.3, 0.4))))
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(system_to_dict(ifs, C)))
    ifs2, C2 = load_system(path)
    assert ifs2 == ifs
    assert tuple(C2) == tuple(C)
    with pytest.raises(DomainError):
        parse_system({"maps": [{"kind": "spiral"}]})


ratios = st.floats(0.2, 0.8)
words = st.lists(st.integers(1, 3), max_size=8)


@settings(max_examples=60, deadline=None)
@given(st.tuples(ratios, ratios, ratios), words, words)
def test_lip_multiplicative(r, u, v):
    ifs = tuple(SimilarityMap(x) for x in r)
    lhs = lip_of_word(ifs, u + v)
    assert lhs == pytest.approx(lip_of_word(ifs, u) * lip_of_word(ifs, v), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.tuples(ratios, ratios), st.tuples(ratios, ratios), st.lists(st.integers(1, 2), max_size=8),
       st.lists(st.integers(1, 2), max_size=8))
def test_diagonal_composition_associative(sx, sy, u, v):
    ifs = (DiagonalAffineMap(sx[0], sy[0], (0.0, 0.0)),
           DiagonalAffineMap(sx[1], sy[1], (1 - sx[1], 1 - sy[1])))
    whole = compose(ifs, u + v)
    mu, mv = compose(ifs, u), compose(ifs, v)
    for p in GRID:
        assert np.allclose(whole.apply(*p), mu.apply(*mv.apply(*p)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), max_size=20))
def test_words_stay_inside_square(w):
    assert maps_into_unit_square(compose(SIERPINSKI, w))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 0.7]), st.booleans(),
       st.sampled_from([0.0, math.pi / 2, 1.1]), st.booleans())
def test_similarity_compose_pointwise(a1, f1, a2, f2):
    m1 = SimilarityMap(0.5, angle=a1, reflect=f1, t=(0.5, 0.5))
    m2 = SimilarityMap(0.3, angle=a2, reflect=f2, t=(0.4, 0.3))
    m = m1.compose(m2)
    for p in GRID:
        assert np.allclose(m.apply(*p), m1.apply(*m2.apply(*p)), atol=1e-12)
