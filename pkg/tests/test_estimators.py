import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from inhomog import BoxCountingDimension
from inhomog.constructions import sierpinski
from inhomog.errors import DomainError
from inhomog.ifs_core import segment
from inhomog.orbital import homogeneous_approx


def test_params_round_trip():
    est = BoxCountingDimension(k_min=3, k_max=8)
    assert est.get_params() == {"base": 2.0, "budget": 50_000_000, "k_max": 8, "k_min": 3}
    assert clone(est).set_params(k_max=9).k_max == 9


def test_uniform_points_fill_plane():
    rng = np.random.default_rng(0)
    est = BoxCountingDimension(k_min=1, k_max=5).fit(rng.random((50_000, 2)))
    assert est.dimension_ == pytest.approx(2.0, abs=0.02)
    assert est.lower_dimension_ <= est.dimension_ <= est.upper_dimension_
    assert len(est.counts_) == 5


def test_sierpinski_cylinders():
    boxes = homogeneous_approx(sierpinski()[0], 2.0 ** -10)
    est = BoxCountingDimension(k_min=4, k_max=10).fit(boxes)
    assert est.dimension_ == pytest.approx(math.log(3) / math.log(2), abs=1e-9)
    assert est.score() == pytest.approx(1.0)


def test_segment_predict():
    est = BoxCountingDimension(k_min=2, k_max=6).fit([segment((0, 0.3), (1, 0.3))])
    assert est.dimension_ == pytest.approx(1.0, abs=1e-12)
    assert est.predict([2.0 ** -8]) == pytest.approx([256.0])


def test_other_base():
    est = BoxCountingDimension(k_min=1, k_max=4, base=3.0).fit([segment((0, 0), (0, 1))])
    assert [c.delta for c in est.counts_] == pytest.approx([3.0 ** -k for k in range(1, 5)])


def test_not_fitted_and_bad_input():
    with pytest.raises(NotFittedError):
        BoxCountingDimension().predict([0.1])
    with pytest.raises(DomainError):
        BoxCountingDimension().fit(np.zeros((4, 3)))
    with pytest.raises(DomainError):
        BoxCountingDimension(k_min=5, k_max=5).fit(np.zeros((4, 2)))
