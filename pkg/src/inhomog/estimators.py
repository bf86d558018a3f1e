"""Estimator wrapper around the box-counting sweep."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .boxdim import CoverCount, dyadic_scales, fit_dimension, mesh_count
from .errors import DomainError
from .ifs_core import Point, Rect, Segment
from .validation import DEFAULT_CELL_BUDGET, check_points


def _is_primitive_list(X) -> bool:
    return not isinstance(X, np.ndarray) and len(X) > 0 and all(
        isinstance(p, (Point, Segment, Rect)) for p in X)


class BoxCountingDimension(BaseEstimator):
    """Box-counting dimension of a planar set from δ-mesh counts.

    Parameters
    ----------
    k_min, k_max : int
        Scales are ``base**-k`` for ``k_min <= k <= k_max``.
    base : float
        Ratio between consecutive scales.
    budget : int
        Cap on the number of mesh cells per scale.

    Attributes
    ----------
    counts_ : list of CoverCount
    fit_ : DimensionFit
    dimension_ : float
        Least-squares slope of ``log N`` against ``-log delta``.
    upper_dimension_, lower_dimension_ : float
        Largest and smallest slope between consecutive scales.
    """

    def __init__(self, k_min=4, k_max=10, base=2.0, budget=DEFAULT_CELL_BUDGET):
        self.k_min = k_min
        self.k_max = k_max
        self.base = base
        self.budget = budget

    def _deltas(self):
        if self.base <= 1:
            raise DomainError("base must exceed 1")
        if self.base == 2.0:
            return dyadic_scales(self.k_min, self.k_max)
        if self.k_min >= self.k_max:
            raise DomainError(f"need k_min < k_max, got {self.k_min}..{self.k_max}")
        return [float(self.base) ** -k for k in range(self.k_min, self.k_max + 1)]

    def fit(self, X, y=None):
        """Count mesh cells met by ``X`` at every scale.

        ``X`` is an ``(n, 2)`` array of points in the unit square, or a
        sequence of primitives.
        """
        if not _is_primitive_list(X):
            X = check_points(X)
        self.counts_ = [mesh_count(X, d, self.budget) for d in self._deltas()]
        self.fit_ = fit_dimension(self.counts_)
        self.dimension_ = self.fit_.slope
        self.upper_dimension_ = self.fit_.upper
        self.lower_dimension_ = self.fit_.lower
        return self

    def predict(self, deltas):
        """Cover counts predicted by the fitted power law at the given scales."""
        check_is_fitted(self, "fit_")
        d = np.asarray(deltas, dtype=float)
        return np.exp(self.fit_.intercept - self.fit_.slope * np.log(d))

    def score(self, X=None, y=None):
        """Coefficient of determination of the log-log fit."""
        check_is_fitted(self, "fit_")
        return self.fit_.r_squared

    def counts_table(self) -> list:
        check_is_fitted(self, "counts_")
        return [CoverCount(c.delta, c.count, c.method) for c in self.counts_]
