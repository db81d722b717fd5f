"""Norms and maximal functions on periodic grids.

Lebesgue norms are Riemann sums.  BMO is a supremum over a fixed family of
dyadic cubes and their half-shifted copies.  Besov and Hardy norms depend on
the Littlewood-Paley family; their values carry the family and refuse to be
compared with values computed from a different one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dyadic import LPFamily, active_range, band_multiplier, make_family
from .field import Field, Grid, forward

__all__ = [
    "NormKind",
    "CubeFamily",
    "FamilyNorm",
    "FamilyMismatchError",
    "lp_norm",
    "bmo_norm",
    "besov0_norm",
    "besov_norm",
    "maximal",
    "square_function",
    "hardy_sq_norm",
    "norm",
]

DEFAULT_FAMILY = make_family("poly5")


class FamilyMismatchError(ValueError):
    """Two family-dependent norm values built from different LP families were combined."""


class FamilyNorm(float):
    """A float tagged with the Littlewood-Paley family and band range it came from."""

    def __new__(cls, value, family: LPFamily, bands: tuple[int, int], kind: str):
        obj = super().__new__(cls, value)
        obj.family = family
        obj.bands = bands
        obj.kind = kind
        return obj

    def _check(self, other):
        if isinstance(other, FamilyNorm) and other.family != self.family:
            raise FamilyMismatchError(
                f"cannot combine {self.kind} from {self.family} with {other.kind} from {other.family}"
            )

    def _wrap(name):
        base = getattr(float, name)

        def op(self, other):
            self._check(other)
            return base(self, other)

        op.__name__ = name
        return op

    for _name in ("__lt__", "__le__", "__gt__", "__ge__", "__truediv__", "__rtruediv__", "__sub__", "__rsub__"):
        locals()[_name] = _wrap(_name)
    del _name, _wrap

    def __eq__(self, other):
        self._check(other)
        return float.__eq__(self, other)

    __hash__ = float.__hash__

    def __repr__(self):
        return f"FamilyNorm({float(self)!r}, kind={self.kind!r}, family={self.family.ramp_kind!r}, bands={self.bands})"


def lp_norm(f: Field | np.ndarray, p: float, grid: Grid | None = None) -> float:
    """``(h^d sum |f|^p)^{1/p}``, or ``max |f|`` for ``p = inf``."""
    if isinstance(f, Field):
        values, grid = f.values, f.grid
    else:
        values = np.asarray(f)
    if not p > 0:
        raise ValueError("p must be positive")
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    # factor out the max to avoid overflow for large p
    return float(m * (grid.cell_volume * np.sum((a / m) ** p)) ** (1.0 / p))


@dataclass(frozen=True)
class CubeFamily:
    """Dyadic cubes of side ``h 2^m`` up to the box, aligned and half-shifted.

    In two dimensions the half shift is applied along the diagonal.
    """

    grid: Grid
    shifted: bool = True

    @property
    def scales(self) -> list[int]:
        """Cube side lengths in grid cells."""
        return [2**m for m in range(int(math.log2(self.grid.n)) + 1)]

    def offsets(self, cells: int) -> list[int]:
        if self.shifted and 1 < cells < self.grid.n:
            return [0, cells // 2]
        return [0]


def _block_oscillation(values: np.ndarray, cells: int, offset: int) -> float:
    d = values.ndim
    n = values.shape[0]
    v = values
    if offset:
        v = np.roll(v, shift=(-offset,) * d, axis=tuple(range(d)))
    blocks = n // cells
    if d == 1:
        b = v.reshape(blocks, cells)
        mean = b.mean(axis=1, keepdims=True)
        osc = np.abs(b - mean).mean(axis=1)
    else:
        b = v.reshape(blocks, cells, blocks, cells)
        mean = b.mean(axis=(1, 3), keepdims=True)
        osc = np.abs(b - mean).mean(axis=(1, 3))
    return float(osc.max())


def bmo_norm(f: Field, cubes: CubeFamily | None = None) -> float:
    """Largest mean oscillation over the cube family (the full box included)."""
    cubes = cubes or CubeFamily(f.grid)
    f.grid.check(cubes.grid)
    best = 0.0
    for cells in cubes.scales:
        if cells == 1:
            continue
        for off in cubes.offsets(cells):
            best = max(best, _block_oscillation(f.values, cells, off))
    return best


def _band_norms(family: LPFamily, f: Field, p: float):
    spec = forward(f)
    j_min, j_max = active_range(f.grid)
    out = []
    for j in range(j_min, j_max + 1):
        vals = np.fft.ifftn(spec.coeffs * band_multiplier(family, f.grid, j)) / f.grid.cell_volume
        if f.is_real:
            vals = vals.real
        out.append((j, lp_norm(vals, p, f.grid)))
    return out, (j_min, j_max)


def besov_norm(f: Field, s: float, p: float, family: LPFamily | None = None) -> FamilyNorm:
    """``sup_j 2^{js} ||P_j f||_p`` over the active bands."""
    family = family or DEFAULT_FAMILY
    norms, bands = _band_norms(family, f, p)
    value = max(2.0 ** (j * s) * v for j, v in norms)
    return FamilyNorm(value, family, bands, f"besov(s={s},p={p})")


def besov0_norm(f: Field, family: LPFamily | None = None) -> FamilyNorm:
    """``sup_j ||P_j f||_inf`` over the active bands."""
    family = family or DEFAULT_FAMILY
    norms, bands = _band_norms(family, f, math.inf)
    return FamilyNorm(max(v for _, v in norms), family, bands, "besov0")


def square_function(f: Field, family: LPFamily | None = None) -> Field:
    """Pointwise ``(sum_j |P_j f|^2)^{1/2}`` over the active bands."""
    family = family or DEFAULT_FAMILY
    spec = forward(f)
    j_min, j_max = active_range(f.grid)
    acc = np.zeros(f.grid.shape)
    for j in range(j_min, j_max + 1):
        vals = np.fft.ifftn(spec.coeffs * band_multiplier(family, f.grid, j)) / f.grid.cell_volume
        if f.is_real:
            vals = vals.real
        acc += np.abs(vals) ** 2
    return Field(f.grid, np.sqrt(acc), {"family": family, "bands": (j_min, j_max)})


def hardy_sq_norm(f: Field, p: float, family: LPFamily | None = None) -> FamilyNorm:
    """``|| (sum_j |P_j f|^2)^{1/2} ||_p``, the square-function form of the Hardy norm."""
    family = family or DEFAULT_FAMILY
    sq = square_function(f, family)
    return FamilyNorm(lp_norm(sq, p), family, sq.meta["bands"], f"hardy_sq(p={p})")


def _disc_kernel(grid: Grid, radius: float) -> np.ndarray:
    disp = (grid.x + grid.boxlen / 2) % grid.boxlen - grid.boxlen / 2
    inside = np.sum(disp**2, axis=-1) <= radius**2 * (1 + 1e-12)
    return inside / inside.sum()


def maximal(f: Field) -> Field:
    """Centred maximal function over dyadic radii ``h, 2h, ..., L/2`` (periodic)."""
    g = f.grid
    a = np.abs(f.values)
    best = a.copy()
    radii = []
    cells = 1
    while cells <= g.n // 2:
        radii.append(cells)
        cells *= 2
    if g.dim == 1:
        n = g.n
        ext = np.concatenate([a, a, a])
        csum = np.concatenate([[0.0], np.cumsum(ext)])
        idx = np.arange(n) + n
        for c in radii:
            lo = idx - c
            hi = idx + c + 1
            avg = (csum[hi] - csum[lo]) / (2 * c + 1)
            np.maximum(best, avg, out=best)
    else:
        fa = np.fft.rfftn(a)
        for c in radii:
            kern = _disc_kernel(g, c * g.spacing)
            avg = np.fft.irfftn(fa * np.fft.rfftn(kern), s=a.shape, axes=(0, 1))
            np.maximum(best, avg, out=best)
    return Field(g, best, {"radii_cells": tuple(radii)})


@dataclass(frozen=True)
class NormKind:
    """A norm selector: ``lp``, ``sup``, ``bmo``, ``besov0``, ``besov`` or ``hardy_sq``."""

    kind: str
    p: float = 2.0
    s: float = 0.0
    family: LPFamily = dc_field(default=DEFAULT_FAMILY)

    _KINDS = ("lp", "sup", "bmo", "besov0", "besov", "hardy_sq")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind in ("lp", "besov", "hardy_sq") and not self.p > 0:
            raise ValueError("p must be positive")

    def __call__(self, f: Field) -> float:
        return norm(f, self)


def norm(f: Field, kind: NormKind) -> float:
    if kind.kind == "lp":
        return lp_norm(f, kind.p)
    if kind.kind == "sup":
        return lp_norm(f, math.inf)
    if kind.kind == "bmo":
        return bmo_norm(f)
    if kind.kind == "besov0":
        return besov0_norm(f, kind.family)
    if kind.kind == "besov":
        return besov_norm(f, kind.s, kind.p, kind.family)
    return hardy_sq_norm(f, kind.p, kind.family)
