"""Littlewood-Paley bumps, band projections and the Bony paraproduct split.

The low-pass profile ``phi0`` equals one on ``rho <= 1`` and vanishes for
``rho >= 7/6``; the band profile is ``phi(rho) = phi0(rho) - phi0(2 rho)``, so
``P_j`` multiplies the spectrum by ``phi(2^-j |xi|)``.

On a periodic grid only finitely many bands are visible.  The *active range*
``[j_min, j_max]`` contains the bands that are nonzero somewhere on the
lattice (``j >= j_min``) and fit entirely below Nyquist
(``2^j_max * 7/6 <= Nyquist``).  The split of the spectrum into

    low  = P_{<= j_min - 1}   (only the zero mode survives),
    P_j  for j_min <= j <= j_max,
    high = P_{> j_max},

is an exact partition, which is what makes the paraproduct reconstruction
exact to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field import Field, Grid, Spectrum, forward, inverse, product

__all__ = [
    "LPFamily",
    "BandIndex",
    "BandRangeError",
    "make_family",
    "active_range",
    "resolved_annulus",
    "band_multiplier",
    "low_multiplier",
    "fattened_multiplier",
    "partition_multipliers",
    "project",
    "project_le",
    "project_gt",
    "fatten",
    "band_pieces",
    "bony_split",
]

RAMP_START = 1.0
RAMP_END = 7.0 / 6.0


class BandRangeError(ValueError):
    """A requested band would be nonzero on the grid but lies outside the active range."""


def _smoothstep_poly5(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6 * t - 15) + 10)


def _smoothstep_exp(t):
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


_RAMPS = {"poly5": _smoothstep_poly5, "exp_flat": _smoothstep_exp}


@dataclass(frozen=True)
class LPFamily:
    """A Littlewood-Paley pair ``(phi0, phi)`` built from a monotone ramp.

    Parameters
    ----------
    ramp_kind : {"poly5", "exp_flat"}
        ``poly5`` is the quintic smoothstep (C2); ``exp_flat`` glues
        ``exp(-1/t)`` pieces and is C-infinity with flat ends.
    """

    ramp_kind: str = "poly5"

    def __post_init__(self):
        if self.ramp_kind not in _RAMPS:
            raise ValueError(f"unknown ramp {self.ramp_kind!r}; choose from {sorted(_RAMPS)}")

    def transition(self, t):
        """Monotone ramp from 0 at ``t <= 0`` to 1 at ``t >= 1``."""
        return _RAMPS[self.ramp_kind](np.asarray(t, dtype=float))

    def phi0(self, rho):
        rho = np.abs(np.asarray(rho, dtype=float))
        t = (rho - RAMP_START) / (RAMP_END - RAMP_START)
        return 1.0 - self.transition(t)

    def phi(self, rho):
        rho = np.asarray(rho, dtype=float)
        return self.phi0(rho) - self.phi0(2 * rho)


def make_family(ramp_kind: str = "poly5") -> LPFamily:
    return LPFamily(ramp_kind)


@dataclass(frozen=True)
class BandIndex:
    """A dyadic index checked against the active range of a grid."""

    j: int
    j_min: int
    j_max: int

    @property
    def active(self) -> bool:
        return self.j_min <= self.j <= self.j_max

    @classmethod
    def on(cls, grid: Grid, j: int) -> "BandIndex":
        lo, hi = active_range(grid)
        return cls(int(j), lo, hi)


def active_range(grid: Grid) -> tuple[int, int]:
    """``(j_min, j_max)``: bands visible on the lattice and fully below Nyquist."""
    j_min = math.floor(math.log2(grid.dfreq / RAMP_END)) + 1
    j_max = math.floor(math.log2(grid.nyquist / RAMP_END))
    if j_max < j_min:
        raise BandRangeError(f"grid {grid} has no complete dyadic band")
    return j_min, j_max


def resolved_annulus(grid: Grid) -> tuple[float, float]:
    """Frequency interval on which the active bands sum to exactly one."""
    j_min, j_max = active_range(grid)
    return 2.0 ** (j_min - 1) * RAMP_END, 2.0**j_max


@lru_cache(maxsize=48)
def _radial_cached(family: LPFamily, grid: Grid, kind: str, j: int) -> np.ndarray:
    rho = grid.xi_abs * 2.0 ** (-j)
    if kind == "phi":
        out = family.phi(rho)
    else:
        out = family.phi0(rho)
    out.setflags(write=False)
    return out


def low_multiplier(family: LPFamily, grid: Grid, j: int) -> np.ndarray:
    """Table of ``phi0(2^-j |xi|)`` on the grid (``P_{<=j}``)."""
    return _radial_cached(family, grid, "phi0", int(j))


def band_multiplier(family: LPFamily, grid: Grid, j: int, check: bool = True) -> np.ndarray:
    """Table of ``phi(2^-j |xi|)`` on the grid.

    Raises
    ------
    BandRangeError
        If ``j`` is outside the active range and the table is not identically zero.
    """
    j = int(j)
    table = _radial_cached(family, grid, "phi", j)
    if check:
        j_min, j_max = active_range(grid)
        if not j_min <= j <= j_max and np.any(table != 0):
            raise BandRangeError(
                f"band j={j} is outside the active range [{j_min}, {j_max}] of {grid}"
            )
    return table


def fattened_multiplier(family: LPFamily, grid: Grid, j: int, n1: int = 2, n2: int = 2) -> np.ndarray:
    """Table of ``sum_{k=j-n1}^{j+n2} phi(2^-k |xi|)`` (the fattened projection).

    The outermost bands must be admissible; the sum telescopes to a
    difference of two low-pass tables.
    """
    j_min, j_max = active_range(grid)
    for k in (j - n1, j + n2):
        band_multiplier(family, grid, k)
    if not j_min <= j <= j_max:
        raise BandRangeError(f"band j={j} is outside the active range [{j_min}, {j_max}]")
    return low_multiplier(family, grid, j + n2) - low_multiplier(family, grid, j - n1 - 1)


def partition_multipliers(family: LPFamily, grid: Grid) -> list[tuple[str, np.ndarray]]:
    """Exact partition of unity: low block, every active band, high block."""
    j_min, j_max = active_range(grid)
    parts = [("low", low_multiplier(family, grid, j_min - 1))]
    for j in range(j_min, j_max + 1):
        parts.append((str(j), band_multiplier(family, grid, j)))
    parts.append(("high", 1.0 - low_multiplier(family, grid, j_max)))
    return parts


def _multiply(f: Field, table: np.ndarray) -> Field:
    spec = forward(f)
    return inverse(Spectrum(f.grid, spec.coeffs * table, spec.hermitian))


def project(family: LPFamily, f: Field, j: int) -> Field:
    """``P_j f``."""
    return _multiply(f, band_multiplier(family, f.grid, j))


def project_le(family: LPFamily, f: Field, j: int) -> Field:
    """``P_{<=j} f``; no range restriction since the low-pass is always defined."""
    return _multiply(f, low_multiplier(family, f.grid, j))


def project_gt(family: LPFamily, f: Field, j: int) -> Field:
    """``P_{>j} f = f - P_{<=j} f``."""
    return _multiply(f, 1.0 - low_multiplier(family, f.grid, j))


def fatten(family: LPFamily, f: Field, j: int, n1: int = 2, n2: int = 2) -> Field:
    """Fattened projection ``sum_{k=j-n1}^{j+n2} P_k f``."""
    return _multiply(f, fattened_multiplier(family, f.grid, j, n1, n2))


def band_pieces(family: LPFamily, f: Field) -> list[tuple[str, Field]]:
    """The field split along :func:`partition_multipliers`; the pieces sum to ``f``."""
    spec = forward(f)
    return [
        (label, inverse(Spectrum(f.grid, spec.coeffs * table, spec.hermitian)))
        for label, table in partition_multipliers(family, f.grid)
    ]


def bony_split(family: LPFamily, f: Field, g: Field) -> tuple[Field, Field, Field]:
    """Paraproduct decomposition ``fg = diagonal + lowhigh + highlow``.

    With ``f_i``, ``g_i`` the pieces of :func:`band_pieces`,

    * diagonal = sum_i f_i (g_{i-1} + g_i + g_{i+1}),
    * lowhigh  = sum_i f_{<=i-2} g_i,
    * highlow  = sum_i g_{<=i-2} f_i.

    All products are alias-free, so the three parts add up to
    ``product(f, g)`` up to round-off.
    """
    f.grid.check(g.grid)
    fs = [p.values for _, p in band_pieces(family, f)]
    gs = [p.values for _, p in band_pieces(family, g)]
    grid = f.grid
    dtype = np.result_type(fs[0], gs[0])
    zero = np.zeros(grid.shape, dtype=dtype)

    def mul(a, b):
        return product(Field(grid, a), Field(grid, b)).values

    count = len(fs)
    diag = zero.copy()
    lowhigh = zero.copy()
    highlow = zero.copy()
    f_cum = zero.copy()  # sum of f_i' for i' <= i - 2
    g_cum = zero.copy()
    for i in range(count):
        if i >= 2:
            f_cum = f_cum + fs[i - 2]
            g_cum = g_cum + gs[i - 2]
        near = gs[i].copy()
        if i > 0:
            near += gs[i - 1]
        if i + 1 < count:
            near += gs[i + 1]
        diag += mul(fs[i], near)
        if i >= 2:
            lowhigh += mul(f_cum, gs[i])
            highlow += mul(g_cum, fs[i])
    return Field(grid, diag), Field(grid, lowhigh), Field(grid, highlow)
