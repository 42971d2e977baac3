"""Power-law fits on log-log data."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import DomainError


def fit_exponent(points: Iterable[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of log(value) = exponent * log(size) + intercept.

    Returns (exponent, intercept, r_squared).
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise DomainError("need at least two (size, value) pairs")
    if np.any(pts <= 0):
        raise DomainError("sizes and values must be positive for a log-log fit")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(x) == 0:
        raise DomainError("sizes must not all be equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # constant data: ss_tot is pure rounding noise and the fit is exact
    noise = 1e-20 * len(y) * max(1.0, float(np.max(np.abs(y)))) ** 2
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > noise else 1.0
    return float(slope), float(intercept), r2
