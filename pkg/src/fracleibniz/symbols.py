"""Fourier multipliers and an exact calculus for homogeneous symbols.

A homogeneous symbol is stored as a list of terms ``c * xi^beta * |xi|^r``
with a common degree ``|beta| + r``.  Differentiation in ``xi`` is closed on
this class:

    d/dxi_l (xi^beta |xi|^r) = beta_l xi^(beta - e_l) |xi|^r + r xi^(beta + e_l) |xi|^(r - 2),

which gives the symbols of ``D^{s,alpha}`` and ``A^{s,alpha}`` without any
numerical differentiation.  Inhomogeneous symbols (Bessel potentials and the
vector correction ``J^d``) are closed-form radial rules.

Every symbol evaluates to a finite table on the lattice.  Where a homogeneous
symbol is singular at ``xi = 0`` the zero mode is assigned a declared value;
symbols of negative degree additionally refuse inputs with a nonzero mean.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .dyadic import LPFamily, fattened_multiplier
from .field import Field, Grid, Spectrum, forward, inverse

log = logging.getLogger(__name__)

__all__ = [
    "MultiIndex",
    "multi_indices",
    "DCModeError",
    "Symbol",
    "HomogeneousSymbol",
    "Bessel",
    "BesselTilde",
    "BesselDeriv",
    "Tabulated",
    "ProductSymbol",
    "SumSymbol",
    "diff_term",
    "power",
    "monomial",
    "i_power",
    "dsalpha",
    "asalpha",
    "partial",
    "hilbert",
    "riesz",
    "inverse_laplacian",
    "ds_minus2_partial",
    "bessel",
    "bessel_tilde",
    "bessel_deriv",
    "apply",
    "apply_spectrum",
    "apply_vec",
    "kernel_of",
]


class DCModeError(ValueError):
    """A negative-degree multiplier was applied to a field with a nonzero mean."""


# --------------------------------------------------------------------------
# multi-indices


@dataclass(frozen=True, order=True)
class MultiIndex:
    components: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.components):
            raise ValueError(f"multi-index entries must be non-negative: {self.components}")

    @classmethod
    def of(cls, *components) -> "MultiIndex":
        if len(components) == 1 and not isinstance(components[0], int):
            components = tuple(components[0])
        return cls(tuple(int(c) for c in components))

    @classmethod
    def unit(cls, dim: int, l: int) -> "MultiIndex":
        return cls(tuple(int(i == l) for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return sum(self.components)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(c) for c in self.components)

    def leq(self, other: "MultiIndex") -> bool:
        return all(a <= b for a, b in zip(self.components, other.components))

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a - b for a, b in zip(self.components, other.components)))

    def __iter__(self):
        return iter(self.components)


def multi_indices(dim: int, order_max: float, strict: bool = False) -> list[MultiIndex]:
    """All multi-indices with ``|alpha| <= order_max`` (``<`` when ``strict``)."""
    top = math.floor(order_max)
    if strict and top == order_max:
        top -= 1
    out = []

    def rec(prefix, left):
        if len(prefix) == dim:
            out.append(MultiIndex(tuple(prefix)))
            return
        for c in range(left + 1):
            rec(prefix + [c], left - c)

    if top >= 0:
        rec([], top)
    return sorted(out, key=lambda a: (a.order, tuple(-c for c in a.components)))


def _as_tuple(beta) -> tuple[int, ...]:
    if isinstance(beta, MultiIndex):
        return beta.components
    if isinstance(beta, (int, np.integer)):
        return (int(beta),)
    return tuple(int(b) for b in beta)


# --------------------------------------------------------------------------
# symbol base


class Symbol:
    """A rule ``xi -> complex`` with a declared value at ``xi = 0``.

    Subclasses provide ``_evaluate_nonzero(xi)`` for ``xi != 0`` and
    ``dc_value``.  ``hermitian`` means ``sigma(-xi) = conj(sigma(xi))`` so that
    real inputs stay real.
    """

    hermitian: bool = True
    requires_dc_free: bool = False
    dc_value: complex = 0.0

    def _evaluate_nonzero(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, xi) -> np.ndarray:
        """Evaluate at frequency vectors ``xi`` of shape ``(..., dim)``.

        A scalar is read as a one-dimensional frequency.
        """
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 0:
            xi = xi[None]
        norm2 = np.sum(xi**2, axis=-1)
        zero = norm2 == 0
        out = np.empty(norm2.shape, dtype=np.complex128)
        if np.any(~zero):
            out[~zero] = self._evaluate_nonzero(xi[~zero])
        out[zero] = self.dc_value
        return out

    def evaluate_1d(self, xi) -> np.ndarray:
        """Evaluate at an array of scalar frequencies (one-dimensional symbols)."""
        return self.evaluate(np.asarray(xi, dtype=float)[..., None])

    def table(self, grid: Grid) -> np.ndarray:
        return _symbol_table(self, grid)

    def __call__(self, xi):
        return self.evaluate(xi)

    def __mul__(self, other):
        if isinstance(other, Symbol):
            return ProductSymbol((self, other))
        return ProductSymbol((self, _Const(complex(other))))

    __rmul__ = __mul__

    def __add__(self, other):
        return SumSymbol((self, other))

    def __sub__(self, other):
        return SumSymbol((self, ProductSymbol((other, _Const(-1.0)))))


@lru_cache(maxsize=16)
def _symbol_table(symbol: Symbol, grid: Grid) -> np.ndarray:
    out = symbol.evaluate(grid.xi)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"symbol {symbol!r} is not finite on {grid}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class _Const(Symbol):
    value: complex = 1.0

    @property
    def hermitian(self):
        return complex(self.value).imag == 0

    @property
    def dc_value(self):
        return self.value

    def _evaluate_nonzero(self, xi):
        return np.full(xi.shape[:-1], self.value, dtype=np.complex128)


# --------------------------------------------------------------------------
# homogeneous term algebra


def _term_key(beta, r):
    return beta, round(float(r), 12)


def _merge(terms: Iterable[tuple[complex, tuple[int, ...], float]]) -> tuple:
    acc: dict = {}
    for c, beta, r in terms:
        key = _term_key(beta, r)
        acc[key] = acc.get(key, 0) + complex(c)
    merged = []
    for (beta, r), c in acc.items():
        if abs(c) > 1e-15:
            merged.append((c, beta, float(r)))
    merged.sort(key=lambda t: (t[1], t[2]))
    return tuple(merged)


@dataclass(frozen=True)
class HomogeneousSymbol(Symbol):
    """``sum_t c_t xi^{beta_t} |xi|^{r_t}`` with a common degree.

    Parameters
    ----------
    terms : tuple of (complex, tuple of int, float)
        ``(coeff, beta, r)`` triples; like terms are merged on construction.
    dim : int
        Spatial dimension; every ``beta`` has this length.
    """

    terms: tuple
    dim: int

    def __post_init__(self):
        terms = tuple((complex(c), _as_tuple(b), float(r)) for c, b, r in self.terms)
        for _, beta, _ in terms:
            if len(beta) != self.dim:
                raise ValueError(f"multi-index {beta} does not match dim {self.dim}")
        terms = _merge(terms)
        if terms:
            degrees = {round(sum(b) + r, 10) for _, b, r in terms}
            if len(degrees) > 1:
                raise ValueError(f"terms of mixed degree {sorted(degrees)}")
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> float:
        if not self.terms:
            return math.inf
        _, beta, r = self.terms[0]
        return sum(beta) + r

    @property
    def is_polynomial(self) -> bool:
        return all(r == 0 for _, _, r in self.terms)

    @property
    def hermitian(self) -> bool:
        for c, beta, _ in self.terms:
            if sum(beta) % 2 == 0 and abs(c.imag) > 1e-14 * abs(c):
                return False
            if sum(beta) % 2 == 1 and abs(c.real) > 1e-14 * abs(c):
                return False
        return True

    @property
    def singular_at_zero(self) -> bool:
        return bool(self.terms) and self.degree <= 0 and not self.is_polynomial

    @property
    def requires_dc_free(self) -> bool:
        return bool(self.terms) and self.degree < 0

    @property
    def dc_value(self) -> complex:
        if not self.terms or self.degree > 0:
            return 0.0
        if self.is_polynomial:
            # degree zero polynomial: the constant term
            return sum(c for c, b, _ in self.terms if sum(b) == 0)
        return 0.0

    def _evaluate_nonzero(self, xi):
        xi_abs = np.sqrt(np.sum(xi**2, axis=-1))
        out = np.zeros(xi.shape[:-1], dtype=np.complex128)
        for c, beta, r in self.terms:
            val = np.ones(xi.shape[:-1])
            for axis, b in enumerate(beta):
                if b:
                    val = val * xi[..., axis] ** b
            if r != 0:
                val = val * xi_abs**r
            out += c * val
        return out

    def diff(self, l: int) -> "HomogeneousSymbol":
        return diff_term(self, l)

    def diff_multi(self, alpha) -> "HomogeneousSymbol":
        out = self
        for axis, count in enumerate(_as_tuple(alpha)):
            for _ in range(count):
                out = diff_term(out, axis)
        return out

    def scale(self, c: complex) -> "HomogeneousSymbol":
        return HomogeneousSymbol(tuple((c * t, b, r) for t, b, r in self.terms), self.dim)

    def __mul__(self, other):
        if isinstance(other, HomogeneousSymbol):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            terms = []
            for c1, b1, r1 in self.terms:
                for c2, b2, r2 in other.terms:
                    terms.append((c1 * c2, tuple(a + b for a, b in zip(b1, b2)), r1 + r2))
            return HomogeneousSymbol(tuple(terms), self.dim)
        if isinstance(other, Symbol):
            return ProductSymbol((self, other))
        return self.scale(complex(other))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, HomogeneousSymbol):
            return HomogeneousSymbol(self.terms + other.terms, self.dim)
        return SumSymbol((self, other))

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, HomogeneousSymbol):
            return self + other.scale(-1.0)
        return Symbol.__sub__(self, other)


def diff_term(symbol: HomogeneousSymbol, l: int) -> HomogeneousSymbol:
    """Exact ``d/dxi_l`` of a homogeneous symbol; the degree drops by one."""
    if not 0 <= l < symbol.dim:
        raise ValueError(f"axis {l} out of range for dim {symbol.dim}")
    terms = []
    for c, beta, r in symbol.terms:
        if beta[l]:
            lowered = tuple(b - (i == l) for i, b in enumerate(beta))
            terms.append((c * beta[l], lowered, r))
        if r != 0:
            raised = tuple(b + (i == l) for i, b in enumerate(beta))
            terms.append((c * r, raised, r - 2))
    return HomogeneousSymbol(tuple(terms), symbol.dim)


def power(s: float, dim: int = 1) -> HomogeneousSymbol:
    """``|xi|^s``, the symbol of ``D^s``."""
    return HomogeneousSymbol(((1.0, (0,) * dim, float(s)),), dim)


def monomial(beta, coeff: complex = 1.0, r: float = 0.0) -> HomogeneousSymbol:
    beta = _as_tuple(beta)
    return HomogeneousSymbol(((coeff, beta, r),), len(beta))


def i_power(gamma) -> HomogeneousSymbol:
    """``(i xi)^gamma``, the symbol of ``d^gamma``."""
    gamma = _as_tuple(gamma)
    return monomial(gamma, 1j ** sum(gamma))


def partial(l: int, dim: int = 1) -> HomogeneousSymbol:
    return i_power(tuple(int(i == l) for i in range(dim)))


def _fold_derivative(base: HomogeneousSymbol, alpha) -> HomogeneousSymbol:
    alpha = _as_tuple(alpha)
    if len(alpha) != base.dim:
        raise ValueError(f"alpha {alpha} does not match dim {base.dim}")
    out = base.diff_multi(alpha).scale((1j) ** (-sum(alpha)))
    if out.terms and out.singular_at_zero:
        log.warning(
            "symbol of degree %.3g from alpha=%s is singular at xi=0; zero mode declared 0",
            out.degree,
            alpha,
        )
    return out


def dsalpha(s: float, alpha) -> HomogeneousSymbol:
    """``i^{-|alpha|} d_xi^alpha |xi|^s``, the Taylor-coefficient operators of ``D^s``."""
    alpha = _as_tuple(alpha)
    if s <= 0:
        raise ValueError("s must be positive")
    return _fold_derivative(power(s, len(alpha)), alpha)


def asalpha(base: HomogeneousSymbol, alpha) -> HomogeneousSymbol:
    """``i^{-|alpha|} d_xi^alpha`` applied to an arbitrary homogeneous base symbol."""
    if not base.terms or base.degree <= 0:
        raise ValueError("base symbol must have positive degree")
    return _fold_derivative(base, alpha)


def hilbert() -> HomogeneousSymbol:
    """``-i sgn(xi)`` in one dimension (zero mode 0)."""
    return HomogeneousSymbol(((-1j, (1,), -1.0),), 1)


def riesz(i: int, j: int, dim: int = 2) -> HomogeneousSymbol:
    """``Delta^{-1} d_i d_j``, symbol ``xi_i xi_j / |xi|^2`` (zero mode 0)."""
    beta = [0] * dim
    beta[i] += 1
    beta[j] += 1
    return HomogeneousSymbol(((1.0, tuple(beta), -2.0),), dim)


def inverse_laplacian(dim: int = 1) -> HomogeneousSymbol:
    """``Delta^{-1}``, symbol ``-|xi|^{-2}``; only for mean-free inputs."""
    return HomogeneousSymbol(((-1.0, (0,) * dim, -2.0),), dim)


def ds_minus2_partial(s: float, l: int, dim: int = 1) -> HomogeneousSymbol:
    """``D^{s-2} d_l`` as a single symbol ``|xi|^{s-2} i xi_l``."""
    return power(s - 2, dim) * partial(l, dim)


# --------------------------------------------------------------------------
# inhomogeneous symbols


def _bracket(xi):
    return np.sqrt(1.0 + np.sum(xi**2, axis=-1))


@dataclass(frozen=True)
class Bessel(Symbol):
    """``<xi>^s = (1 + |xi|^2)^{s/2}``."""

    s: float

    @property
    def dc_value(self):
        return 1.0

    def _evaluate_nonzero(self, xi):
        return _bracket(xi) ** self.s + 0j


@dataclass(frozen=True)
class BesselTilde(Symbol):
    """``<xi>^s - 1``."""

    s: float

    def _evaluate_nonzero(self, xi):
        # expm1 keeps relative accuracy for small |xi|
        return np.expm1(0.5 * self.s * np.log1p(np.sum(xi**2, axis=-1))) + 0j


@dataclass(frozen=True)
class BesselDeriv(Symbol):
    """Component ``m`` of ``-i d_xi((<xi>^s - 1) i xi_l)``.

    Closed form: ``s <xi>^{s-2} xi_m xi_l + (<xi>^s - 1) delta_{ml}``.
    """

    s: float
    l: int
    m: int

    def _evaluate_nonzero(self, xi):
        br = _bracket(xi)
        out = self.s * br ** (self.s - 2) * xi[..., self.m] * xi[..., self.l]
        if self.m == self.l:
            out = out + np.expm1(0.5 * self.s * np.log1p(np.sum(xi**2, axis=-1)))
        return out + 0j


@dataclass(frozen=True, eq=False)
class Tabulated(Symbol):
    """A symbol given by its table on one specific grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError("table shape does not match grid")

    @property
    def hermitian(self):
        v = self.values
        flipped = v
        for axis in range(v.ndim):
            # index -k in FFT order: reverse and roll by one
            flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
        return bool(np.allclose(flipped, np.conj(v), rtol=0, atol=1e-14 * np.max(np.abs(v), initial=0)))

    @property
    def dc_value(self):
        return self.values[(0,) * self.values.ndim]

    def table(self, grid: Grid) -> np.ndarray:
        self.grid.check(grid)
        return self.values

    def evaluate(self, xi):
        raise TypeError("a tabulated symbol can only be used on its own grid")


@dataclass(frozen=True)
class ProductSymbol(Symbol):
    factors: tuple

    @property
    def hermitian(self):
        return all(f.hermitian for f in self.factors)

    @property
    def requires_dc_free(self):
        return any(f.requires_dc_free for f in self.factors)

    @property
    def dc_value(self):
        return math.prod(complex(f.dc_value) for f in self.factors)

    def _evaluate_nonzero(self, xi):
        out = np.ones(xi.shape[:-1], dtype=np.complex128)
        for f in self.factors:
            out = out * f._evaluate_nonzero(xi)
        return out

    def table(self, grid):
        out = np.ones(grid.shape, dtype=np.complex128)
        for f in self.factors:
            out = out * f.table(grid)
        return out


@dataclass(frozen=True)
class SumSymbol(Symbol):
    parts: tuple

    @property
    def hermitian(self):
        return all(p.hermitian for p in self.parts)

    @property
    def requires_dc_free(self):
        return any(p.requires_dc_free for p in self.parts)

    @property
    def dc_value(self):
        return sum(complex(p.dc_value) for p in self.parts)

    def _evaluate_nonzero(self, xi):
        out = np.zeros(xi.shape[:-1], dtype=np.complex128)
        for p in self.parts:
            out = out + p._evaluate_nonzero(xi)
        return out

    def table(self, grid):
        out = np.zeros(grid.shape, dtype=np.complex128)
        for p in self.parts:
            out = out + p.table(grid)
        return out


def bessel(s: float) -> Bessel:
    return Bessel(float(s))


def bessel_tilde(s: float) -> BesselTilde:
    return BesselTilde(float(s))


def bessel_deriv(s: float, l: int, m: int) -> BesselDeriv:
    return BesselDeriv(float(s), int(l), int(m))


# --------------------------------------------------------------------------
# application


def _check_dc(symbol: Symbol, spec: Spectrum):
    if not symbol.requires_dc_free:
        return
    g = spec.grid
    dc = abs(spec.coeffs[(0,) * g.dim]) / g.boxlen ** (g.dim / 2)
    total = math.sqrt(np.sum(np.abs(spec.coeffs) ** 2) / g.boxlen**g.dim)
    if dc > 1e-10 * total:
        raise DCModeError(
            f"negative-degree symbol applied to a field with mean mode {dc:.3e} (L2 size {total:.3e})"
        )


def apply_spectrum(symbol: Symbol, spec: Spectrum) -> Spectrum:
    _check_dc(symbol, spec)
    table = symbol.table(spec.grid)
    return Spectrum(spec.grid, spec.coeffs * table, spec.hermitian and symbol.hermitian)


def apply(symbol: Symbol, f: Field) -> Field:
    """Multiply the spectrum of ``f`` by the symbol table.

    Real inputs stay real when the symbol is hermitian.
    """
    return inverse(apply_spectrum(symbol, forward(f)))


def apply_vec(symbols: Sequence[Symbol], f: Field | Sequence[Field]) -> list[Field]:
    """Apply a family of symbols.

    With a single field, returns ``[sigma_m f]`` (e.g. a gradient or the
    components of ``J^d g``).  With a list of fields, the symbols are applied
    componentwise.
    """
    if isinstance(f, Field):
        spec = forward(f)
        return [inverse(apply_spectrum(s, spec)) for s in symbols]
    if len(symbols) != len(f):
        raise ValueError("need one symbol per component")
    return [apply(s, c) for s, c in zip(symbols, f)]


def kernel_of(symbol: Symbol, family: LPFamily, grid: Grid, j: int, n1: int = 2, n2: int = 2) -> Field:
    """Kernel of ``symbol * P~_j``, centred at the middle of the box.

    The discrete delta carries unit mass (``1/h^d`` at one point), so the
    returned samples approximate the continuous kernel ``K_j(x - x_c)``.
    """
    table = symbol.table(grid) * fattened_multiplier(family, grid, j, n1, n2)
    # spectrum of a unit-mass delta at the box centre is exp(-i xi . c)
    centre = grid.center
    phase = np.exp(-1j * (grid.xi @ centre))
    values = np.fft.ifftn(table * phase) / grid.cell_volume
    real = symbol.hermitian
    if real:
        values = values.real.copy()
    return Field(grid, values, {"band": j, "centre": tuple(centre)})
