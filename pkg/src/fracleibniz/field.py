"""Periodic grids, sampled fields and their spectral twins.

The continuous transform pair used throughout is

    f_hat(xi) = int f(x) exp(-i x.xi) dx,
    f(x)      = (2 pi)^-d int f_hat(xi) exp(i x.xi) dxi,

approximated on the box [0, L)^d by ``h^d * DFT``.  Spectral coefficients are
therefore samples of ``f_hat`` at the lattice frequencies ``2 pi k / L`` and
symbol formulas can be applied to them verbatim.

Arrays are kept in numpy's native FFT ordering; ``Grid.wavenumbers`` gives the
signed integer index ``k`` of every slot (the Nyquist slot carries ``-n/2``).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any, Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "Spectrum",
    "GridMismatchError",
    "make_grid",
    "sample",
    "forward",
    "inverse",
    "synthesize",
    "with_spectrum",
    "pointwise",
    "product",
    "nyquist_free",
    "from_values",
    "zeros",
    "Generator",
    "Gaussian",
    "SmoothBump",
    "PlaneWave",
    "Constant",
    "random_smooth",
    "rel_err",
    "worker_count",
]


class GridMismatchError(ValueError):
    """Raised when two objects living on different grids are combined."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, boxlen)^dim`` with ``n`` samples per axis."""

    dim: int
    n: int
    boxlen: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")
        if not self.boxlen > 0:
            raise ValueError(f"boxlen must be positive, got {self.boxlen}")

    @property
    def spacing(self) -> float:
        return self.boxlen / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def nyquist(self) -> float:
        return math.pi * self.n / self.boxlen

    @property
    def dfreq(self) -> float:
        """Lattice spacing in frequency, i.e. the lowest positive frequency."""
        return 2 * math.pi / self.boxlen

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def freq(self, k):
        return 2 * np.pi * np.asarray(k) / self.boxlen

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Signed integer wavenumbers of one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency vectors, shape ``grid.shape + (dim,)``."""
        axis = self.freq(self.wavenumbers)
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(np.sum(self.xi**2, axis=-1))

    @cached_property
    def x(self) -> np.ndarray:
        """Sample points, shape ``grid.shape + (dim,)``."""
        axis = self.spacing * np.arange(self.n)
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def center(self) -> np.ndarray:
        return np.full(self.dim, self.boxlen / 2)

    def check(self, other: "Grid"):
        if other != self:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


def make_grid(dim: int, n: int, boxlen: float) -> Grid:
    """Build a periodic grid; ``n`` must be a power of two and at least 8."""
    if n < 8:
        raise ValueError(f"n must be at least 8, got {n}")
    return Grid(int(dim), int(n), float(boxlen))


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a function on a grid.

    Real-valued fields store a float array; everything else is complex.
    ``meta`` carries provenance such as periodization error or family
    parameters and never influences arithmetic.

    ``spectrum`` optionally holds the FFT-ordered coefficients the samples
    were synthesized from.  :func:`forward` returns it instead of
    re-transforming, so modes that are exactly zero stay zero; without it,
    round-off in empty high modes gets amplified by high-order multipliers.
    """

    grid: Grid
    values: np.ndarray
    meta: Mapping[str, Any] = dc_field(default_factory=dict)
    spectrum: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values of shape {self.values.shape} do not fit grid shape {self.grid.shape}"
            )

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def __add__(self, other):
        return pointwise("add", self, other)

    def __sub__(self, other):
        return pointwise("sub", self, other)

    def __neg__(self):
        return pointwise("scale", self, c=-1.0)

    def __mul__(self, other):
        if isinstance(other, Field):
            return pointwise("mul", self, other)
        return pointwise("scale", self, c=other)

    __rmul__ = __mul__

    def with_meta(self, **meta) -> "Field":
        return Field(self.grid, self.values, {**self.meta, **meta}, self.spectrum)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Spectral coefficients, ``coeffs[k] ~ f_hat(2 pi k / L)`` in FFT order."""

    grid: Grid
    coeffs: np.ndarray
    hermitian: bool = False


def from_values(grid: Grid, values, meta=None) -> Field:
    values = np.asarray(values)
    if not np.iscomplexobj(values):
        values = values.astype(np.float64)
    else:
        values = values.astype(np.complex128)
    return Field(grid, values, dict(meta or {}))


def zeros(grid: Grid, real: bool = True) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.float64 if real else np.complex128))


def forward(f: Field) -> Spectrum:
    if f.spectrum is not None:
        return Spectrum(f.grid, f.spectrum, hermitian=f.is_real)
    coeffs = np.fft.fftn(f.values) * f.grid.cell_volume
    return Spectrum(f.grid, coeffs, hermitian=f.is_real)


def synthesize(grid: Grid, coeffs: np.ndarray, real: bool, meta=None) -> Field:
    """Field with samples ``ifftn(coeffs) / h^d`` that remembers ``coeffs``.

    For ``real=True`` the coefficients must be hermitian; the stored
    spectrum is symmetrized so that it matches the real samples exactly.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    values = np.fft.ifftn(coeffs) / grid.cell_volume
    if real:
        values = values.real.copy()
        coeffs = 0.5 * (coeffs + np.conj(_reflect(coeffs)))
    coeffs.setflags(write=False)
    return Field(grid, values, dict(meta or {}), coeffs)


def with_spectrum(f: Field) -> Field:
    """``f`` with its spectrum computed once and attached."""
    if f.spectrum is not None:
        return f
    return synthesize(f.grid, np.fft.fftn(f.values) * f.grid.cell_volume, f.is_real, f.meta)


def _reflect(coeffs: np.ndarray) -> np.ndarray:
    """``c[-k]`` in FFT order."""
    out = coeffs
    for axis in range(coeffs.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def inverse(spec: Spectrum, grid: Grid | None = None, real: bool | None = None) -> Field:
    """Back to physical space; ``real`` defaults to the spectrum's hermitian flag."""
    if grid is not None:
        grid.check(spec.grid)
    if real is None:
        real = spec.hermitian
    return synthesize(spec.grid, spec.coeffs, real)


_POINTWISE = ("add", "sub", "mul", "scale", "conj", "real_part")


def pointwise(op: str, a: Field, b: Field | None = None, c: complex | None = None) -> Field:
    """Exact pointwise arithmetic.  ``scale`` multiplies ``a`` by the scalar ``c``."""
    if op not in _POINTWISE:
        raise ValueError(f"unknown op {op!r}; expected one of {_POINTWISE}")
    if op in ("add", "sub", "mul"):
        if b is None:
            raise ValueError(f"{op} needs two fields")
        a.grid.check(b.grid)
        fn = {"add": np.add, "sub": np.subtract, "mul": np.multiply}[op]
        spec = None
        if op != "mul" and a.spectrum is not None and b.spectrum is not None:
            spec = fn(a.spectrum, b.spectrum)
        return Field(a.grid, fn(a.values, b.values), spectrum=spec)
    if op == "scale":
        c = 1.0 if c is None else c
        if isinstance(c, complex) and c.imag == 0:
            c = c.real
        spec = None if a.spectrum is None else a.spectrum * c
        return Field(a.grid, a.values * c, spectrum=spec)
    if op == "conj":
        return Field(a.grid, np.conj(a.values))
    return Field(a.grid, np.real(a.values).copy())


def _signed_axis(n: int, m: int) -> np.ndarray:
    """Slots in an m-grid of the signed wavenumbers -n/2 < k < n/2 of an n-grid."""
    k = np.arange(-(n // 2) + 1, n // 2)
    return k % m


def nyquist_free(coeffs: np.ndarray) -> np.ndarray:
    """Copy of FFT-ordered coefficients with every ``k_i = -n/2`` line zeroed."""
    out = coeffs.copy()
    n = coeffs.shape[0]
    for axis in range(coeffs.ndim):
        idx = [slice(None)] * coeffs.ndim
        idx[axis] = n // 2
        out[tuple(idx)] = 0
    return out


def _product_complex(a: Field, b: Field) -> np.ndarray:
    n, d = a.grid.n, a.grid.dim
    m = 2 * n
    src = _signed_axis(n, n)
    dst = _signed_axis(n, m)
    ix_src = np.ix_(*([src] * d))
    ix_dst = np.ix_(*([dst] * d))
    pads = []
    for f in (a, b):
        if f.spectrum is not None:
            c = f.spectrum / f.grid.cell_volume
        else:
            c = np.fft.fftn(f.values.astype(np.complex128))
        pad = np.zeros((m,) * d, dtype=np.complex128)
        pad[ix_dst] = c[ix_src]
        pads.append(np.fft.ifftn(pad))
    cc = np.fft.fftn(pads[0] * pads[1]) * 2**d
    out = np.zeros((n,) * d, dtype=np.complex128)
    out[ix_src] = cc[ix_dst]
    return np.fft.ifftn(out)


def _product_real(a: Field, b: Field) -> np.ndarray:
    n, d = a.grid.n, a.grid.dim
    m = 2 * n
    half = np.arange(n // 2)  # last axis of the real transform, Nyquist excluded
    src = [_signed_axis(n, n)] * (d - 1) + [half]
    dst = [_signed_axis(n, m)] * (d - 1) + [half]
    ix_src = np.ix_(*src)
    ix_dst = np.ix_(*dst)
    pads = []
    for f in (a, b):
        if f.spectrum is not None:
            c = f.spectrum[..., : n // 2 + 1] / f.grid.cell_volume
        else:
            c = np.fft.rfftn(f.values)
        pad = np.zeros((m,) * (d - 1) + (m // 2 + 1,), dtype=np.complex128)
        pad[ix_dst] = c[ix_src]
        pads.append(np.fft.irfftn(pad, s=(m,) * d, axes=tuple(range(d))))
    cc = np.fft.rfftn(pads[0] * pads[1]) * 2**d
    out = np.zeros((n,) * (d - 1) + (n // 2 + 1,), dtype=np.complex128)
    out[ix_src] = cc[ix_dst]
    return np.fft.irfftn(out, s=(n,) * d, axes=tuple(range(d)))


def product(a: Field, b: Field) -> Field:
    """Alias-free product on the symmetric band ``|k_i| < n/2``.

    Both factors are restricted to the symmetric band, multiplied on a grid
    zero-padded by two, and the result is truncated back to the symmetric
    band.  The output spectrum is exactly the discrete convolution of the
    input spectra, which is what :func:`fracleibniz.remainders.bilinear_apply`
    computes.  Dropping the unpaired ``-n/2`` line keeps products of real
    fields exactly real.
    """
    a.grid.check(b.grid)
    if a.is_real and b.is_real:
        return Field(a.grid, _product_real(a, b))
    return Field(a.grid, _product_complex(a, b))


# --------------------------------------------------------------------------
# closed-form generators


def _displacement(x: np.ndarray, center, boxlen: float | None) -> np.ndarray:
    disp = x - np.asarray(center, dtype=float)
    if boxlen is not None:
        disp = (disp + boxlen / 2) % boxlen - boxlen / 2
    return disp


class Generator:
    """A closed-form rule ``x -> C`` that can be sampled on a grid.

    Subclasses implement ``evaluate(x, boxlen)``; ``boxlen`` is the period to
    wrap displacements with (None for a literal evaluation).  ``wrap_error``
    estimates the fraction of mass lost to periodization.
    """

    def evaluate(self, x: np.ndarray, boxlen: float | None = None) -> np.ndarray:
        raise NotImplementedError

    def wrap_error(self, grid: Grid) -> float:
        return 0.0

    def __call__(self, x, boxlen=None):
        return self.evaluate(np.asarray(x, dtype=float), boxlen)

    def __add__(self, other):
        return _Combined(self, other, np.add)

    def __mul__(self, other):
        if isinstance(other, Generator):
            return _Combined(self, other, np.multiply)
        return _Combined(self, Constant(other), np.multiply)

    __rmul__ = __mul__


class _Combined(Generator):
    def __init__(self, a, b, fn):
        self.a, self.b, self.fn = a, b, fn

    def evaluate(self, x, boxlen=None):
        return self.fn(self.a.evaluate(x, boxlen), self.b.evaluate(x, boxlen))

    def wrap_error(self, grid):
        return max(self.a.wrap_error(grid), self.b.wrap_error(grid))


@dataclass
class Constant(Generator):
    value: complex = 1.0

    def evaluate(self, x, boxlen=None):
        return np.full(x.shape[:-1], self.value)


@dataclass
class Gaussian(Generator):
    """``exp(-|x - center|^2 / (2 width^2))``, wrapped to the nearest image."""

    center: Sequence[float] | float
    width: float = 1.0

    def evaluate(self, x, boxlen=None):
        disp = _displacement(x, np.broadcast_to(self.center, x.shape[-1:]), boxlen)
        return np.exp(-np.sum(disp**2, axis=-1) / (2 * self.width**2))

    def wrap_error(self, grid):
        # mass outside the half-box around the center, per axis
        tail = math.erfc(grid.boxlen / (2 * math.sqrt(2) * self.width))
        return float(1 - (1 - tail) ** grid.dim)


@dataclass
class SmoothBump(Generator):
    """Compactly supported ``exp(1 - 1/(1 - r^2))`` with ``r = |x - c| / radius``."""

    center: Sequence[float] | float
    radius: float = 1.0

    def evaluate(self, x, boxlen=None):
        disp = _displacement(x, np.broadcast_to(self.center, x.shape[-1:]), boxlen)
        r2 = np.sum(disp**2, axis=-1) / self.radius**2
        out = np.zeros_like(r2)
        inside = r2 < 1
        out[inside] = np.exp(1 - 1 / (1 - r2[inside]))
        return out

    def wrap_error(self, grid):
        return 0.0 if 2 * self.radius <= grid.boxlen else 1.0


@dataclass
class PlaneWave(Generator):
    """``exp(i k.x)`` with ``k`` a physical frequency (vector in 2D)."""

    k: Sequence[float] | float

    def evaluate(self, x, boxlen=None):
        k = np.broadcast_to(np.asarray(self.k, dtype=float), x.shape[-1:])
        return np.exp(1j * (x @ k))

    def wrap_error(self, grid):
        k = np.broadcast_to(np.asarray(self.k, dtype=float), (grid.dim,))
        idx = k / grid.dfreq
        return 0.0 if np.allclose(idx, np.round(idx), atol=1e-9) else 1.0


def sample(grid: Grid, generator: Generator | Callable, real: bool | None = None) -> Field:
    """Evaluate a generator at the grid points.

    Non-periodic generators are wrapped to the nearest image; the estimated
    wrap-around mass is stored as ``meta["wrap_error"]``.
    """
    if isinstance(generator, Generator):
        values = generator.evaluate(grid.x, grid.boxlen)
        wrap = generator.wrap_error(grid)
    else:
        values = np.asarray(generator(grid.x))
        wrap = float("nan")
    values = np.asarray(values)
    if real is None:
        real = not np.iscomplexobj(values) or np.all(values.imag == 0)
    values = values.real.astype(np.float64) if real else values.astype(np.complex128)
    return Field(grid, values, {"wrap_error": wrap})


def random_smooth(grid: Grid, seed: int, count: int = 8, remove_dc: bool = True) -> Field:
    """Seeded sum of modulated Gaussians, a reproducible generic smooth field.

    Widths lie in ``[max(L/64, 3h), max(L/24, 3h)]`` and centres in the middle
    ``30%`` of the box, which keeps both the wrap-around tails and the
    Nyquist content near round-off for ``n >= 64``.
    """
    rng = np.random.default_rng(seed)
    L, d, h = grid.boxlen, grid.dim, grid.spacing
    w_lo = max(L / 64, 3 * h)
    w_hi = max(L / 24, w_lo)
    values = np.zeros(grid.shape)
    for _ in range(count):
        center = rng.uniform(0.35 * L, 0.65 * L, size=d)
        width = rng.uniform(w_lo, w_hi)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        wave = rng.normal(size=d) * (0.3 / width)
        phase = rng.uniform(0, 2 * np.pi)
        disp = _displacement(grid.x, center, L)
        env = np.exp(-np.sum(disp**2, axis=-1) / (2 * width**2))
        values += amp * env * np.cos(disp @ wave + phase)
    if remove_dc:
        values -= values.mean()
    return Field(grid, values, {"seed": seed, "family": "random_smooth"})


def rel_err(a: Field | np.ndarray, b: Field | np.ndarray, scale: float | None = None) -> float:
    """``||a - b||_2 / max(||b||_2, scale)`` on sample vectors."""
    va = a.values if isinstance(a, Field) else np.asarray(a)
    vb = b.values if isinstance(b, Field) else np.asarray(b)
    num = np.linalg.norm((va - vb).ravel())
    den = np.linalg.norm(vb.ravel())
    if scale is not None:
        den = max(den, scale)
    if den == 0:
        return float(num)
    return float(num / den)


def worker_count(default: int = 1) -> int:
    """Thread cap taken from ``FRAC_THREADS`` (at least one)."""
    try:
        return max(1, int(os.environ.get("FRAC_THREADS", default)))
    except ValueError:
        return max(1, default)
