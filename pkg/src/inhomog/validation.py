"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import DomainError

DEFAULT_PIECE_BUDGET = 10_000_000
DEFAULT_CELL_BUDGET = 50_000_000


def check_delta(delta) -> float:
    """Return ``delta`` as a float, requiring ``0 < delta <= 1``."""
    delta = float(delta)
    if not (0.0 < delta <= 1.0) or math.isnan(delta):
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
    return delta


def check_open_unit(value, name: str) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_nonnegative_int(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def check_points(X) -> np.ndarray:
    """Coerce ``X`` to a finite float array of shape ``(n, 2)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size == 2:
        X = X.reshape(1, 2)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DomainError(f"expected an array of shape (n, 2), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("points must be finite")
    return X


def worker_count() -> int:
    """Worker cap from ``INHOMOG_THREADS`` (default 1)."""
    raw = os.environ.get("INHOMOG_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
