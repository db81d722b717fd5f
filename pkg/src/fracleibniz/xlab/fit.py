"""Least-squares growth and decay slopes."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .probes import ProbeRecord

__all__ = ["SlopeFit", "fit_slope"]


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    residual: float  # root-mean-square residual in log ratio


def fit_slope(records: Sequence[ProbeRecord], x_axis: str = "log_param") -> SlopeFit:
    """Ordinary least squares of ``log ratio`` against ``log param`` (or ``param``).

    Raises
    ------
    ValueError
        Fewer than three records, an unknown axis, or non-positive values
        where a logarithm is needed.
    """
    if x_axis not in ("param", "log_param"):
        raise ValueError(f"x_axis must be 'param' or 'log_param', got {x_axis!r}")
    if len(records) < 3:
        raise ValueError(f"a slope fit needs at least 3 records, got {len(records)}")
    x = np.array([r.param for r in records], dtype=float)
    y = np.array([r.ratio for r in records], dtype=float)
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("ratios must be finite and positive")
    if x_axis == "log_param":
        if np.any(x <= 0):
            raise ValueError("parameters must be positive on a log axis")
        x = np.log(x)
    ly = np.log(y)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (slope * x + intercept)
    return SlopeFit(float(slope), float(intercept), math.sqrt(float(np.mean(res**2))))
