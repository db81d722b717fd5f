"""Commutator and fractional Leibniz remainders, each with an exact bilinear symbol.

Every remainder ``R(f, g)`` below is a bilinear Fourier multiplier

    R(f, g)^(zeta) = L^-d sum_{xi + eta = zeta} sigma(xi, eta) f^(xi) g^(eta)

on the lattice.  Two routes are provided:

* the *composed* route (the public functions) built from unary multipliers
  and alias-free products, cheap at any size;
* the *oracle* route, :func:`bilinear_apply` with the explicit ``sigma``
  returned by the matching ``*_symbol`` builder, which costs ``O(n^{2d})``.

The convention is that ``xi`` is the frequency of the first argument and
``eta`` that of the second.  :data:`ORACLES` pairs the two routes for every
remainder and is what the verification suite iterates over.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import symbols as sy
from .dyadic import LPFamily, active_range, band_multiplier, low_multiplier, make_family
from .field import Field, Grid, Spectrum, forward, inverse, product, worker_count

log = logging.getLogger(__name__)

__all__ = [
    "BilinearSymbol",
    "RemainderSpec",
    "REMAINDER_OPS",
    "ORACLES",
    "OracleCase",
    "BandSpec",
    "OracleSizeError",
    "bilinear_apply",
    "kp_commutator",
    "kp_symbol",
    "leibniz_remainder",
    "leibniz_symbol",
    "leibniz_terms",
    "refined_ds_remainder",
    "refined_ds_symbol",
    "refined_js_remainder",
    "refined_js_symbol",
    "bessel_grad_remainder",
    "bessel_grad_symbol",
    "euler_commutator",
    "euler_via_blocks",
    "euler_oracle",
    "riesz_commutator",
    "riesz_symbol",
    "hilbert_commutator",
    "hilbert_symbol",
    "dmp_remainder",
    "dmp_symbol",
    "paraproduct_pair",
    "paraproduct_symbol",
]


class OracleSizeError(ValueError):
    """The direct bilinear evaluation was requested on a grid that is too large."""


# --------------------------------------------------------------------------
# bilinear symbols and the direct evaluator


@dataclass(frozen=True, eq=False)
class BilinearSymbol:
    """A rule ``(xi, eta) -> complex`` on frequency vectors of shape ``(..., d)``.

    Parameters
    ----------
    rule : callable
        Vectorized in both arguments.
    name : str
        Label used in reports.
    star_norm : float, optional
        Caller-supplied Coifman-Meyer constant, carried as metadata only.
    vanishing : bool
        Declares ``sigma(xi, 0) = 0``.
    hermitian : bool
        ``sigma(-xi, -eta) = conj(sigma(xi, eta))``; real inputs then give
        real outputs.
    """

    rule: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "sigma"
    star_norm: float | None = None
    vanishing: bool = False
    hermitian: bool = True

    def __call__(self, xi, eta):
        return self.rule(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))

    def __add__(self, other: "BilinearSymbol") -> "BilinearSymbol":
        a, b = self.rule, other.rule
        return BilinearSymbol(
            lambda x, y: a(x, y) + b(x, y),
            f"{self.name}+{other.name}",
            hermitian=self.hermitian and other.hermitian,
        )


ORACLE_LIMITS = {1: 4096, 2: 64}


def _signed_indices(grid: Grid) -> np.ndarray:
    k = grid.wavenumbers
    mesh = np.meshgrid(*([k] * grid.dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def bilinear_apply(sigma: BilinearSymbol, f: Field, g: Field) -> Field:
    """Direct evaluation of ``sigma(D)(f, g)`` by summing over frequency pairs.

    For each output wavenumber ``k`` the sum runs over all ``a`` with ``a``
    and ``k - a`` on the lattice, so no aliasing occurs.  Cost is
    ``O(n^{2d})``; limited to ``n <= 4096`` in 1D and ``n <= 64`` in 2D.
    Like :func:`fracleibniz.field.product`, inputs and output live on the
    symmetric band ``|k_i| < n/2``.

    Raises
    ------
    OracleSizeError
        If the grid exceeds the size limits.
    FloatingPointError
        If ``sigma`` is not finite at some lattice pair.
    """
    f.grid.check(g.grid)
    grid = f.grid
    if grid.n > ORACLE_LIMITS[grid.dim]:
        raise OracleSizeError(
            f"direct bilinear evaluation limited to n <= {ORACLE_LIMITS[grid.dim]} in {grid.dim}D"
        )
    n, d = grid.n, grid.dim
    F = np.fft.fftn(f.values).ravel() * grid.cell_volume
    G = np.fft.fftn(g.values).ravel() * grid.cell_volume
    idx = _signed_indices(grid)  # (N, d) signed
    flat = np.ravel_multi_index(tuple((idx % n).T), grid.shape)
    xi_all = grid.freq(idx)
    F_rows = F[flat]
    half = n // 2
    total = idx.shape[0]
    chunk = max(1, (1 << 20) // total)
    out = np.zeros(total, dtype=np.complex128)

    def work(start):
        ks = idx[start : start + chunk]  # (c, d)
        b = ks[:, None, :] - idx[None, :, :]  # (c, N, d)
        valid = np.all((b > -half) & (b < half), axis=-1) & np.all(idx > -half, axis=-1)[None, :]
        ci, ai = np.nonzero(valid)
        bv = b[ci, ai]
        b_flat = np.ravel_multi_index(tuple((bv % n).T), grid.shape)
        vals = sigma(xi_all[ai], grid.freq(bv))
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError(f"{sigma.name} is not finite on the lattice")
        terms = vals * F_rows[ai] * G[b_flat]
        res = np.zeros(ks.shape[0], dtype=np.complex128)
        np.add.at(res, ci, terms)
        return start, res

    starts = range(0, total, chunk)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, starts))
    else:
        results = [work(st) for st in starts]
    for start, res in results:
        out[start : start + res.size] = res
    out[np.any(idx == -half, axis=-1)] = 0
    coeffs = np.zeros(total, dtype=np.complex128)
    coeffs[flat] = out / grid.boxlen**d
    spec = Spectrum(grid, coeffs.reshape(grid.shape), f.is_real and g.is_real and sigma.hermitian)
    return inverse(spec)


# --------------------------------------------------------------------------
# helpers


def _ap(symbol: sy.Symbol, f: Field) -> Field:
    return sy.apply(symbol, f)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


def _ev(symbol: sy.Symbol, v: np.ndarray) -> np.ndarray:
    return symbol.evaluate(v)


def _sum_fields(fields: Sequence[Field], grid: Grid) -> Field:
    if not fields:
        return Field(grid, np.zeros(grid.shape))
    out = fields[0]
    for f in fields[1:]:
        out = out + f
    return out


def _imono(v: np.ndarray, beta) -> np.ndarray:
    """``(i v)^beta`` for frequency vectors ``v``."""
    out = np.ones(v.shape[:-1], dtype=np.complex128)
    for axis, b in enumerate(beta):
        if b:
            out = out * (1j * v[..., axis]) ** b
    return out


# --------------------------------------------------------------------------
# Kato-Ponce commutator


def kp_commutator(f: Field, g: Field, s: float) -> Field:
    """``J^s(fg) - f J^s g``."""
    J = sy.bessel(s)
    return _ap(J, product(f, g)) - product(f, _ap(J, g))


def kp_symbol(s: float) -> BilinearSymbol:
    J = sy.bessel(s)
    return BilinearSymbol(lambda x, y: _ev(J, x + y) - _ev(J, y), f"kp(s={s})")


# --------------------------------------------------------------------------
# fractional Leibniz rule


@dataclass(frozen=True)
class RemainderSpec:
    """Parameters of a fractional Leibniz remainder.

    Parameters
    ----------
    s : float
        Order; also the degree of ``base`` when given.
    s1, s2 : float
        Taylor orders on the ``f`` and ``g`` sides, ``s1 + s2 = s``.
    include_alpha, include_beta : bool
        Whether the sums over ``|alpha| <= s1`` and ``|beta| <= s2`` include
        the boundary order (``<=``) or stop short of it (``<``).
    base : HomogeneousSymbol, optional
        Replaces ``|xi|^s``; gives the ``A^s`` variant.
    label : str
        Free-form label used in reports.
    """

    s: float
    s1: float
    s2: float
    include_alpha: bool = True
    include_beta: bool = True
    base: sy.HomogeneousSymbol | None = None
    label: str = "leibniz"

    def __post_init__(self):
        if self.s1 < 0 or self.s2 < 0:
            raise ValueError("s1 and s2 must be non-negative")
        if abs(self.s1 + self.s2 - self.s) > 1e-12:
            raise ValueError(f"s1 + s2 = {self.s1 + self.s2} differs from s = {self.s}")
        if self.base is not None and abs(self.base.degree - self.s) > 1e-12:
            raise ValueError("base symbol degree must equal s")
        for name, order, flag in (("s1", self.s1, self.include_alpha), ("s2", self.s2, self.include_beta)):
            if not flag and order != math.floor(order):
                log.info("%s=%g is not an integer; boundary flag has no effect", name, order)

    @classmethod
    def flavor(cls, kind: str, s: float, s1: float, s2: float, base=None) -> "RemainderSpec":
        """Endpoint variants selected by which side carries the BMO norm.

        ``holder`` keeps both boundary orders (both sides in Lebesgue
        spaces), ``bmo_g`` drops the ``|alpha| = s1`` boundary (``g`` side
        in BMO) and ``bmo_f`` drops the ``|beta| = s2`` boundary.
        """
        flags = {"holder": (True, True), "bmo_g": (False, True), "bmo_f": (True, False)}
        if kind not in flags:
            raise ValueError(f"unknown flavor {kind!r}")
        a, b = flags[kind]
        return cls(s, s1, s2, a, b, base, kind)

    def swapped(self) -> "RemainderSpec":
        return RemainderSpec(self.s, self.s2, self.s1, self.include_beta, self.include_alpha, self.base, self.label)

    def base_symbol(self, dim: int) -> sy.HomogeneousSymbol:
        if self.base is None:
            return sy.power(self.s, dim)
        if self.base.dim != dim:
            raise ValueError("base symbol dimension does not match the grid")
        return self.base

    def alphas(self, dim: int) -> list[sy.MultiIndex]:
        return sy.multi_indices(dim, self.s1, strict=not self.include_alpha)

    def betas(self, dim: int) -> list[sy.MultiIndex]:
        return sy.multi_indices(dim, self.s2, strict=not self.include_beta)


def _taylor_symbols(spec: RemainderSpec, dim: int, alphas) -> list[tuple[sy.MultiIndex, sy.HomogeneousSymbol]]:
    base = spec.base_symbol(dim)
    return [(a, sy.asalpha(base, a.components)) for a in alphas]


def leibniz_terms(spec: RemainderSpec, f: Field, g: Field) -> tuple[Field, list[Field], list[Field]]:
    """``(A^s(fg), [alpha-terms], [beta-terms])`` of the Leibniz expansion."""
    d = f.grid.dim
    base = spec.base_symbol(d)
    lead = _ap(base, product(f, g))
    a_terms = []
    for a, sym in _taylor_symbols(spec, d, spec.alphas(d)):
        df = _ap(sy.i_power(a.components), f) if a.order else f
        a_terms.append(product(df, _ap(sym, g)) * (1.0 / a.factorial))
    b_terms = []
    for b, sym in _taylor_symbols(spec, d, spec.betas(d)):
        dg = _ap(sy.i_power(b.components), g) if b.order else g
        b_terms.append(product(dg, _ap(sym, f)) * (1.0 / b.factorial))
    return lead, a_terms, b_terms


def leibniz_remainder(spec: RemainderSpec, f: Field, g: Field) -> Field:
    """``A^s(fg) - sum_alpha (1/alpha!) d^alpha f A^{s,alpha} g - sum_beta (1/beta!) d^beta g A^{s,beta} f``.

    With no base symbol ``A^s = D^s``.
    """
    lead, a_terms, b_terms = leibniz_terms(spec, f, g)
    return lead - _sum_fields(a_terms + b_terms, f.grid)


def leibniz_symbol(spec: RemainderSpec, dim: int = 1) -> BilinearSymbol:
    base = spec.base_symbol(dim)
    a_syms = _taylor_symbols(spec, dim, spec.alphas(dim))
    b_syms = _taylor_symbols(spec, dim, spec.betas(dim))

    def rule(x, y):
        out = _ev(base, x + y)
        for a, sym in a_syms:
            out = out - _imono(x, a.components) * _ev(sym, y) / a.factorial
        for b, sym in b_syms:
            out = out - _imono(y, b.components) * _ev(sym, x) / b.factorial
        return out

    return BilinearSymbol(rule, f"leibniz({spec.label}, s={spec.s}, s1={spec.s1})")


# --------------------------------------------------------------------------
# refined remainders


def refined_ds_remainder(f: Field, g: Field, s: float) -> Field:
    """``D^s(fg) - f D^s g - g D^s f`` plus ``s grad f . D^{s-2} grad g`` when ``s >= 1``."""
    d = f.grid.dim
    D = sy.power(s, d)
    out = _ap(D, product(f, g)) - product(f, _ap(D, g)) - product(g, _ap(D, f))
    if s >= 1:
        for l in range(d):
            corr = product(_ap(sy.partial(l, d), f), _ap(sy.ds_minus2_partial(s, l, d), g))
            out = out + corr * s
    return out


def refined_ds_symbol(s: float, dim: int = 1) -> BilinearSymbol:
    D = sy.power(s, dim)
    lowered = sy.power(s - 2, dim)

    def rule(x, y):
        out = _ev(D, x + y) - _ev(D, y) - _ev(D, x)
        if s >= 1:
            out = out - s * _dot(x, y) * _ev(lowered, y)
        return out

    return BilinearSymbol(rule, f"refined_ds(s={s})")


def refined_js_remainder(f: Field, g: Field, s: float) -> Field:
    """``J^s(fg) - f J^s g - g (J^s f - f)`` plus ``s grad f . J^{s-2} grad g`` when ``s > 1``."""
    d = f.grid.dim
    J = sy.bessel(s)
    out = _ap(J, product(f, g)) - product(f, _ap(J, g)) - product(g, _ap(sy.bessel_tilde(s), f))
    if s > 1:
        J2 = sy.bessel(s - 2)
        for l in range(d):
            corr = product(_ap(sy.partial(l, d), f), _ap(J2 * sy.partial(l, d), g))
            out = out + corr * s
    return out


def refined_js_symbol(s: float, dim: int = 1) -> BilinearSymbol:
    J = sy.bessel(s)
    Jt = sy.bessel_tilde(s)
    J2 = sy.bessel(s - 2)

    def rule(x, y):
        out = _ev(J, x + y) - _ev(J, y) - _ev(Jt, x)
        if s > 1:
            out = out - s * _dot(x, y) * _ev(J2, y)
        return out

    return BilinearSymbol(rule, f"refined_js(s={s})")


def _jd(s: float, l: int, dim: int) -> list[sy.BesselDeriv]:
    return [sy.bessel_deriv(s, l, m) for m in range(dim)]


def bessel_grad_remainder(f: Field, g: Field, s: float, l: int = 0) -> Field:
    """``J^s d_l(fg) - f J^s d_l g - g J^s d_l f - grad f . J^d g - grad g . J^d f``."""
    d = f.grid.dim
    B = sy.bessel(s) * sy.partial(l, d)
    grads_f = sy.apply_vec([sy.partial(m, d) for m in range(d)], f)
    grads_g = sy.apply_vec([sy.partial(m, d) for m in range(d)], g)
    # d_l(fg) by the product rule: round-off in the product then meets J^s
    # rather than J^s d_l, one power of the top frequency less
    d_fg = product(grads_f[l], g) + product(f, grads_g[l])
    out = _ap(sy.bessel(s), d_fg) - product(f, _ap(B, g)) - product(g, _ap(B, f))
    jd_g = sy.apply_vec(_jd(s, l, d), g)
    jd_f = sy.apply_vec(_jd(s, l, d), f)
    for m in range(d):
        out = out - product(grads_f[m], jd_g[m]) - product(grads_g[m], jd_f[m])
    return out


def bessel_grad_symbol(s: float, l: int = 0, dim: int = 1) -> BilinearSymbol:
    J = sy.bessel(s)
    jd = _jd(s, l, dim)

    def rule(x, y):
        z = x + y
        out = _ev(J, z) * 1j * z[..., l] - _ev(J, y) * 1j * y[..., l] - _ev(J, x) * 1j * x[..., l]
        for m in range(dim):
            out = out - 1j * x[..., m] * _ev(jd[m], y) - 1j * y[..., m] * _ev(jd[m], x)
        return out

    return BilinearSymbol(rule, f"bessel_grad(s={s}, l={l})")


# --------------------------------------------------------------------------
# Euler commutator


def _check_velocity(u: Sequence[Field]):
    if len(u) != 2 or any(c.grid.dim != 2 for c in u):
        raise ValueError("the Euler commutator needs a two-component field on a 2D grid")
    u[0].grid.check(u[1].grid)


def euler_commutator(u: Sequence[Field], s: float) -> list[Field]:
    """Components of ``J^s((u . grad) u) - (u . grad) J^s u``."""
    _check_velocity(u)
    J = sy.bessel(s)
    d = 2
    out = []
    for i in range(d):
        grad_ui = sy.apply_vec([sy.partial(l, d) for l in range(d)], u[i])
        grad_Jui = sy.apply_vec([sy.partial(l, d) * J for l in range(d)], u[i])
        adv = _sum_fields([product(u[l], grad_ui[l]) for l in range(d)], u[i].grid)
        adv_J = _sum_fields([product(u[l], grad_Jui[l]) for l in range(d)], u[i].grid)
        out.append(_ap(J, adv) - adv_J)
    return out


def euler_via_blocks(u: Sequence[Field], s: float) -> list[Field]:
    """Second assembly of the Euler commutator from the ``J^s d_l`` remainder.

    Writing ``(u . grad) u_i = sum_l d_l(u_l u_i)`` (valid for divergence-free
    ``u``), component ``i`` equals

        sum_l [ R_l(u_l, u_i) + grad u_l . J^d_l u_i + grad u_i . J^d_l u_l ],

    where ``R_l`` is :func:`bessel_grad_remainder`.  The term ``u_i J^s div u`` is
    dropped, so the two assemblies agree only for divergence-free fields.
    """
    _check_velocity(u)
    d = 2
    out = []
    for i in range(d):
        parts = []
        for l in range(d):
            parts.append(bessel_grad_remainder(u[l], u[i], s, l))
            grad_ul = sy.apply_vec([sy.partial(m, d) for m in range(d)], u[l])
            grad_ui = sy.apply_vec([sy.partial(m, d) for m in range(d)], u[i])
            jd_ui = sy.apply_vec(_jd(s, l, d), u[i])
            jd_ul = sy.apply_vec(_jd(s, l, d), u[l])
            for m in range(d):
                parts.append(product(grad_ul[m], jd_ui[m]))
                parts.append(product(grad_ui[m], jd_ul[m]))
        out.append(_sum_fields(parts, u[i].grid))
    return out


def euler_symbol(s: float, l: int) -> BilinearSymbol:
    """Symbol of ``(u_l, w) -> J^s(u_l d_l w) - u_l d_l J^s w``."""
    J = sy.bessel(s)
    return BilinearSymbol(
        lambda x, y: (_ev(J, x + y) - _ev(J, y)) * 1j * y[..., l], f"euler(s={s}, l={l})"
    )


def euler_oracle(u: Sequence[Field], s: float) -> list[Field]:
    """Euler commutator through the direct bilinear evaluator (small grids only)."""
    _check_velocity(u)
    return [
        _sum_fields([bilinear_apply(euler_symbol(s, l), u[l], u[i]) for l in range(2)], u[i].grid)
        for i in range(2)
    ]


# --------------------------------------------------------------------------
# commutators with Riesz and Hilbert transforms, refined DMP remainder


def riesz_commutator(a: Field, f: Field, i: int, j: int) -> Field:
    """``[R_ij, a] f = R_ij(a f) - a R_ij f`` with ``R_ij = Delta^{-1} d_i d_j`` (2D)."""
    if a.grid.dim != 2:
        raise ValueError("the Riesz commutator is defined here for d = 2")
    R = sy.riesz(i, j, 2)
    return _ap(R, product(a, f)) - product(a, _ap(R, f))


def riesz_symbol(i: int, j: int) -> BilinearSymbol:
    R = sy.riesz(i, j, 2)
    return BilinearSymbol(lambda x, y: _ev(R, x + y) - _ev(R, y), f"riesz({i},{j})")


def hilbert_commutator(a: Field, f: Field, l: int = 0, m: int = 0) -> Field:
    """``d^l [H, a] d^m f`` in one dimension."""
    if a.grid.dim != 1:
        raise ValueError("the Hilbert commutator is one-dimensional")
    if l < 0 or m < 0:
        raise ValueError("derivative orders must be non-negative")
    H = sy.hilbert()
    dmf = _ap(sy.i_power((m,)), f) if m else f
    inner = _ap(H, product(a, dmf)) - product(a, _ap(H, dmf))
    return _ap(sy.i_power((l,)), inner) if l else inner


def hilbert_symbol(l: int = 0, m: int = 0) -> BilinearSymbol:
    H = sy.hilbert()

    def rule(x, y):
        z = x + y
        return (1j * z[..., 0]) ** l * (1j * y[..., 0]) ** m * (_ev(H, z) - _ev(H, y))

    return BilinearSymbol(rule, f"hilbert(l={l}, m={m})")


def _check_dmp(alpha: float, beta: float):
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if not 0 < beta <= 1 - alpha + 1e-15:
        raise ValueError(f"beta must lie in (0, 1 - alpha], got {beta}")


def dmp_remainder(a: Field, f: Field, alpha: float, beta: float) -> Field:
    """``D^{a+b}(a D^{1-a-b} f) - D^a(a D^{1-a} f) + b grad a . D^{-1} grad f``."""
    _check_dmp(alpha, beta)
    d = a.grid.dim
    t1 = _ap(sy.power(alpha + beta, d), product(a, _ap(sy.power(1 - alpha - beta, d), f)))
    t2 = _ap(sy.power(alpha, d), product(a, _ap(sy.power(1 - alpha, d), f)))
    out = t1 - t2
    for l in range(d):
        corr = product(_ap(sy.partial(l, d), a), _ap(sy.ds_minus2_partial(1.0, l, d), f))
        out = out + corr * beta
    return out


def dmp_symbol(alpha: float, beta: float, dim: int = 1) -> BilinearSymbol:
    _check_dmp(alpha, beta)
    P = sy.power
    inv = sy.power(-1.0, dim)

    def rule(x, y):
        z = x + y
        out = _ev(P(alpha + beta, dim), z) * _ev(P(1 - alpha - beta, dim), y)
        out = out - _ev(P(alpha, dim), z) * _ev(P(1 - alpha, dim), y)
        return out - beta * _dot(x, y) * _ev(inv, y)

    return BilinearSymbol(rule, f"dmp(alpha={alpha}, beta={beta})")


# --------------------------------------------------------------------------
# paraproduct pairing


@dataclass(frozen=True)
class BandSpec:
    """Band multiplier ``|xi|^weight * profile(2^-j |xi|)``.

    ``profile`` is ``"phi0"``, ``"phi"`` or a callable radial profile.
    """

    profile: str | Callable = "phi"
    weight: float = 0.0

    def radial(self, family: LPFamily) -> Callable:
        if self.profile == "phi0":
            return family.phi0
        if self.profile == "phi":
            return family.phi
        if callable(self.profile):
            return self.profile
        raise ValueError(f"unknown profile {self.profile!r}")

    def table(self, family: LPFamily, grid: Grid, j: int) -> np.ndarray:
        if self.profile == "phi0":
            base = low_multiplier(family, grid, j)
        elif self.profile == "phi":
            base = band_multiplier(family, grid, j)
        else:
            base = np.asarray(self.radial(family)(grid.xi_abs * 2.0**-j), dtype=float)
        if self.weight:
            return base * sy.power(self.weight, grid.dim).table(grid)
        return base

    def evaluate(self, family: LPFamily, v: np.ndarray, j: int) -> np.ndarray:
        rho = np.sqrt(np.sum(v**2, axis=-1))
        out = np.asarray(self.radial(family)(rho * 2.0**-j), dtype=float) + 0j
        if self.weight:
            out = out * sy.power(self.weight, v.shape[-1]).evaluate(v)
        return out


def paraproduct_pair(
    family: LPFamily,
    f: Field,
    g: Field,
    phi_spec: BandSpec | str = "phi0",
    psi_spec: BandSpec | str = "phi",
) -> Field:
    """``sum_j P_j^phi f . P_j^psi g`` over the active bands.

    Raises
    ------
    ValueError
        If the ``psi`` profile does not vanish at the origin.
    """
    phi_spec = phi_spec if isinstance(phi_spec, BandSpec) else BandSpec(phi_spec)
    psi_spec = psi_spec if isinstance(psi_spec, BandSpec) else BandSpec(psi_spec)
    if abs(float(psi_spec.radial(family)(0.0))) > 0:
        raise ValueError("psi must vanish near the origin")
    f.grid.check(g.grid)
    grid = f.grid
    Ff, Fg = forward(f), forward(g)
    real = f.is_real and g.is_real
    j_min, j_max = active_range(grid)
    terms = []
    for j in range(j_min, j_max + 1):
        a = inverse(Spectrum(grid, Ff.coeffs * phi_spec.table(family, grid, j), real))
        b = inverse(Spectrum(grid, Fg.coeffs * psi_spec.table(family, grid, j), real))
        terms.append(product(a, b))
    return _sum_fields(terms, grid)


def paraproduct_symbol(
    family: LPFamily, grid: Grid, phi_spec: BandSpec | str = "phi0", psi_spec: BandSpec | str = "phi"
) -> BilinearSymbol:
    phi_spec = phi_spec if isinstance(phi_spec, BandSpec) else BandSpec(phi_spec)
    psi_spec = psi_spec if isinstance(psi_spec, BandSpec) else BandSpec(psi_spec)
    j_min, j_max = active_range(grid)

    def rule(x, y):
        out = np.zeros(x.shape[:-1], dtype=np.complex128)
        for j in range(j_min, j_max + 1):
            out = out + phi_spec.evaluate(family, x, j) * psi_spec.evaluate(family, y, j)
        return out

    return BilinearSymbol(rule, "paraproduct", vanishing=True)


# --------------------------------------------------------------------------
# registry: composed route paired with its explicit symbol


@dataclass(frozen=True)
class OracleCase:
    """A remainder with both evaluation routes.

    ``composed(f, g, s)`` and ``symbol(s, grid)`` take the order parameter
    ``s``; ``leading(f, g, s)`` returns the principal term used to scale
    relative errors (remainders can vanish identically).
    """

    name: str
    dim: int
    composed: Callable[[Field, Field, float], Field]
    symbol: Callable[[float, Grid], BilinearSymbol]
    leading: Callable[[Field, Field, float], Field]
    anchor: str


_LP = make_family("poly5")


def _split(s):
    return s / 2, s / 2


def _leib_d(s):
    s1, s2 = _split(s)
    return RemainderSpec(s, s1, s2)


def _leib_a(s):
    # A^s = D^{s-1} d_0 in one dimension
    base = sy.power(s - 1, 1) * sy.partial(0, 1)
    return RemainderSpec(s, s, 0.0, True, False, base, "bmo_f")


def _dmp_params(s):
    alpha = min(0.5, s / 4)
    beta = min(1 - alpha, s / 3)
    return alpha, beta


def _pp_specs(s):
    return BandSpec("phi0", s), BandSpec("phi", -s)


#: Public remainder evaluators; each needs an entry in ORACLES, except the
#: Euler commutator, whose oracle is :func:`euler_oracle`.
REMAINDER_OPS = (
    "kp_commutator",
    "leibniz_remainder",
    "refined_ds_remainder",
    "refined_js_remainder",
    "bessel_grad_remainder",
    "euler_commutator",
    "riesz_commutator",
    "hilbert_commutator",
    "dmp_remainder",
    "paraproduct_pair",
)

ORACLES: dict[str, OracleCase] = {
    "kp_commutator": OracleCase(
        "kp_commutator", 1,
        lambda f, g, s: kp_commutator(f, g, s),
        lambda s, grid: kp_symbol(s),
        lambda f, g, s: sy.apply(sy.bessel(s), product(f, g)),
        "Kato-Ponce commutator J^s(fg) - f J^s g",
    ),
    "leibniz_remainder": OracleCase(
        "leibniz_remainder", 1,
        lambda f, g, s: leibniz_remainder(_leib_d(s), f, g),
        lambda s, grid: leibniz_symbol(_leib_d(s), 1),
        lambda f, g, s: sy.apply(sy.power(s, 1), product(f, g)),
        "fractional Leibniz remainder with D^{s,alpha}",
    ),
    "leibniz_remainder_as": OracleCase(
        "leibniz_remainder_as", 1,
        lambda f, g, s: leibniz_remainder(_leib_a(s), f, g),
        lambda s, grid: leibniz_symbol(_leib_a(s), 1),
        lambda f, g, s: sy.apply(_leib_a(s).base, product(f, g)),
        "Leibniz remainder for a general homogeneous A^s",
    ),
    "refined_ds_remainder": OracleCase(
        "refined_ds_remainder", 1,
        lambda f, g, s: refined_ds_remainder(f, g, s),
        lambda s, grid: refined_ds_symbol(s, 1),
        lambda f, g, s: sy.apply(sy.power(s, 1), product(f, g)),
        "refined D^s remainder with s df . D^{s-2} dg",
    ),
    "refined_js_remainder": OracleCase(
        "refined_js_remainder", 1,
        lambda f, g, s: refined_js_remainder(f, g, s),
        lambda s, grid: refined_js_symbol(s, 1),
        lambda f, g, s: sy.apply(sy.bessel(s), product(f, g)),
        "refined J^s remainder",
    ),
    "bessel_grad_remainder": OracleCase(
        "bessel_grad_remainder", 1,
        lambda f, g, s: bessel_grad_remainder(f, g, s, 0),
        lambda s, grid: bessel_grad_symbol(s, 0, 1),
        lambda f, g, s: sy.apply(sy.bessel(s) * sy.partial(0, 1), product(f, g)),
        "J^s d_l remainder with the J^d correction",
    ),
    "hilbert_commutator": OracleCase(
        "hilbert_commutator", 1,
        lambda f, g, s: hilbert_commutator(f, g, int(math.ceil(s)) % 2, int(s) % 2),
        lambda s, grid: hilbert_symbol(int(math.ceil(s)) % 2, int(s) % 2),
        lambda f, g, s: sy.apply(sy.i_power((int(math.ceil(s)) % 2 + int(s) % 2,)), product(f, g)),
        "d^l [H, a] d^m f",
    ),
    "dmp_remainder": OracleCase(
        "dmp_remainder", 1,
        lambda f, g, s: dmp_remainder(f, g, *_dmp_params(s)),
        lambda s, grid: dmp_symbol(*_dmp_params(s), 1),
        lambda f, g, s: product(sy.apply(sy.partial(0, 1), f), g),
        "D^{a+b}(a D^{1-a-b} f) - D^a(a D^{1-a} f) + b grad a . D^{-1} grad f",
    ),
    "paraproduct_pair": OracleCase(
        "paraproduct_pair", 1,
        lambda f, g, s: paraproduct_pair(_LP, f, g, *_pp_specs(s)),
        lambda s, grid: paraproduct_symbol(_LP, grid, *_pp_specs(s)),
        lambda f, g, s: product(sy.apply(sy.power(s, 1), f), sy.apply(sy.power(-s, 1), g)),
        "weighted paraproduct sum_j D^s P_{<=j} f D^{-s} P_j g",
    ),
    "riesz_commutator": OracleCase(
        "riesz_commutator", 2,
        lambda f, g, s: riesz_commutator(f, g, 0, 1),
        lambda s, grid: riesz_symbol(0, 1),
        lambda f, g, s: product(f, g),
        "[R_ij, a] f",
    ),
}
