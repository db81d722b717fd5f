"""Counterexample families.

Every family is assembled in frequency space on the grid lattice: the
coefficient at ``xi`` is the continuous Fourier transform of the family
member evaluated at ``xi``.  The returned field is therefore the exact
periodization of the whole-space construction, and dilations such as
``phi(2^j x)`` cost nothing beyond one table evaluation per term.

A family whose top frequency exceeds ``Nyquist * 6/7`` (the edge of the
active dyadic range) raises :class:`ResolutionError` instead of being
silently clipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Any, Mapping, Sequence

import numpy as np

from . import symbols as sy
from .dyadic import RAMP_END, make_family
from .field import Field, Generator, Grid, sample, synthesize, with_spectrum
from .norms import lp_norm

__all__ = [
    "ResolutionError",
    "FamilySpec",
    "AnnularBump",
    "DivfreeBump",
    "DivfreePair",
    "curl",
    "annular_bump",
    "divfree_bump",
    "modulated_bump",
    "log_stack",
    "grad_log_stack",
    "lacunary",
    "lacunary_grid",
    "spread_lacunary",
    "spread_lacunary_grid",
    "divfree_pair",
    "build",
]

_TRANSITION = make_family("poly5").transition


class ResolutionError(ValueError):
    """The requested family member does not fit below the grid's band limit."""


def _band_limit(grid: Grid) -> float:
    return grid.nyquist / RAMP_END


def _require(grid: Grid, top: float, what: str):
    if top > _band_limit(grid) * (1 + 1e-12):
        raise ResolutionError(
            f"{what}: top frequency {top:.4g} exceeds the resolved limit "
            f"{_band_limit(grid):.4g} of {grid}"
        )


def _phase(grid: Grid, center) -> np.ndarray:
    c = grid.center if center is None else np.broadcast_to(np.asarray(center, float), (grid.dim,))
    return np.exp(-1j * (grid.xi @ c))


def _to_field(grid: Grid, coeffs: np.ndarray, real: bool, meta: Mapping[str, Any]) -> Field:
    return synthesize(grid, coeffs, real, meta)


# --------------------------------------------------------------------------
# bumps with explicit transforms


def _c2_profile(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1, (1 - np.minimum(u * u, 1.0)) ** 3, 0.0)


_C2_MASS = 32.0 / 35.0  # int_{-1}^{1} (1 - u^2)^3 du


@dataclass(frozen=True)
class AnnularBump:
    """Radial bump with transform ``(1 - u^2)^3``, ``u = (|xi| - mid) / half``.

    The transform is real, non-negative, C2 and supported in
    ``mid - half < |xi| < mid + half``, so the bump has positive value at the
    origin.
    """

    dim: int = 1
    mid: float = 0.75
    half: float = 0.2

    @property
    def support(self) -> tuple[float, float]:
        return self.mid - self.half, self.mid + self.half

    def hat(self, xi: np.ndarray) -> np.ndarray:
        rho = np.sqrt(np.sum(np.asarray(xi, float) ** 2, axis=-1))
        return _c2_profile((rho - self.mid) / self.half)

    def origin_value(self) -> float:
        """``(2 pi)^-d int hat``, computed in closed form."""
        if self.dim == 1:
            mass = 2 * self.half * _C2_MASS
        else:
            # odd part of the radial weight integrates to zero
            mass = 2 * math.pi * self.half * self.mid * _C2_MASS
        return mass / (2 * math.pi) ** self.dim


@dataclass(frozen=True)
class DivfreeBump:
    """2D bump with transform ``rho(|xi|) (1 + 2 xi_1 xi_2 / |xi|^2)``.

    ``rho`` is the C2 profile on ``2/3 < |xi| < 1``.  The angular factor keeps
    the transform non-negative and makes ``int hat * xi_1 xi_2 > 0``, hence
    ``d_12 phi(0) != 0``.
    """

    dim: int = 2
    mid: float = 5.0 / 6.0
    half: float = 1.0 / 6.0

    @property
    def support(self) -> tuple[float, float]:
        return self.mid - self.half, self.mid + self.half

    def hat(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, float)
        r2 = np.sum(xi**2, axis=-1)
        rho = np.sqrt(r2)
        safe = np.where(r2 > 0, r2, 1.0)
        ang = 1 + 2 * xi[..., 0] * xi[..., 1] / safe
        return _c2_profile((rho - self.mid) / self.half) * ang

    def origin_value(self) -> float:
        return 2 * math.pi * self.half * self.mid * _C2_MASS / (2 * math.pi) ** 2

    def d12_origin(self) -> float:
        """``(d_12 phi)(0) = -(2 pi)^-2 int hat xi_1 xi_2``, in closed form.

        Only the angular term contributes: ``int (2 cos^2 sin^2) dtheta = pi/2``
        and the radial moment is ``int rho(r) r^3 dr``.
        """
        m, h = self.mid, self.half
        # int_{-1}^{1} (1-u^2)^3 (m + h u)^3 du, odd powers of u drop out
        mom0, mom2 = 32.0 / 35.0, 32.0 / 315.0
        radial = h * (m**3 * mom0 + 3 * m * h * h * mom2)
        return -(math.pi / 2) * radial / (2 * math.pi) ** 2


def annular_bump(dim: int = 1) -> AnnularBump:
    return AnnularBump(dim)


def divfree_bump() -> DivfreeBump:
    return DivfreeBump()


# --------------------------------------------------------------------------
# family specs


@dataclass(frozen=True)
class FamilySpec:
    """A family id with its parameters; ``build(spec, grid)`` constructs it."""

    family: str
    params: Mapping[str, Any] = dc_field(default_factory=dict)
    seed: int | None = None

    def top_frequency(self) -> float:
        p = self.params
        if self.family in ("log_stack", "grad_log_stack"):
            return AnnularBump().support[1] * 2.0 ** p["N"]
        if self.family == "lacunary":
            return 4.0 ** p["N"]
        if self.family == "spread_lacunary":
            return 2.0 ** p["J"] + 0.2 * p["J"] ** p.get("eps", 0.08)
        if self.family == "divfree_pair":
            return 2.0 ** (3 * p["m"])
        if self.family == "modulated_bump":
            return 4.0 * p["k"]
        raise ValueError(f"unknown family {self.family!r}")

    def min_n(self, boxlen: float) -> int:
        """Smallest power-of-two ``n`` that resolves the family on a box of length ``boxlen``."""
        need = self.top_frequency() * RAMP_END * boxlen / math.pi
        return max(8, 1 << math.ceil(math.log2(need)))


# --------------------------------------------------------------------------
# constructions


def modulated_bump(
    bump: Generator | Field,
    k: float,
    s: float,
    grid: Grid | None = None,
    kind: str = "cos",
) -> Field:
    """``k^-s bump(x) cos(k x_1)`` (or ``exp(i k x_1)`` with ``kind="exp"``).

    ``k`` is capped at a quarter of the Nyquist frequency so that the
    modulated bump stays well inside the resolved band.
    """
    if isinstance(bump, Field):
        b = bump
        grid = bump.grid
    else:
        if grid is None:
            raise ValueError("a grid is needed to sample a generator")
        b = sample(grid, bump)
    if k > grid.nyquist / 4:
        raise ResolutionError(f"k={k} exceeds Nyquist/4 = {grid.nyquist / 4:.4g}")
    x1 = grid.x[..., 0]
    if kind == "cos":
        carrier = np.cos(k * x1)
    elif kind == "exp":
        carrier = np.exp(1j * k * x1)
    else:
        raise ValueError(f"unknown carrier {kind!r}")
    values = k ** (-s) * b.values * carrier
    return Field(grid, values, {**b.meta, "k": k, "s": s, "carrier": kind})


def log_stack(bump: AnnularBump, N: int, grid: Grid, center=None) -> Field:
    """``g = sum_{j=1}^N (1/j) bump(2^j (x - c))``."""
    if bump.dim != grid.dim:
        raise ValueError("bump dimension does not match grid")
    _require(grid, bump.support[1] * 2.0**N, f"log_stack(N={N})")
    d = grid.dim
    coeffs = np.zeros(grid.shape)
    for j in range(1, N + 1):
        scale = 2.0**j
        coeffs += bump.hat(grid.xi / scale) * scale ** (-d) / j
    coeffs = coeffs * _phase(grid, center)
    return _to_field(grid, coeffs, True, {"family": "log_stack", "N": N, "origin": bump.origin_value()})


def grad_log_stack(bump: AnnularBump, N: int, grid: Grid, center=None) -> Field:
    """``f = sum_{j=1}^N (1/j) 2^-j (Delta^-1 d_1 bump)(2^j (x - c))``."""
    if bump.dim != grid.dim:
        raise ValueError("bump dimension does not match grid")
    _require(grid, bump.support[1] * 2.0**N, f"grad_log_stack(N={N})")
    d = grid.dim
    mult = (sy.inverse_laplacian(d) * sy.partial(0, d))
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(1, N + 1):
        scale = 2.0**j
        zeta = grid.xi / scale
        coeffs += mult.evaluate(zeta) * bump.hat(zeta) * scale ** (-d) / (j * scale)
    coeffs = coeffs * _phase(grid, center)
    return _to_field(grid, coeffs, True, {"family": "grad_log_stack", "N": N})


def lacunary_grid(N: int) -> Grid:
    """Smallest ``2 pi``-periodic grid on which ``lacunary(N)`` is resolved."""
    spec = FamilySpec("lacunary", {"N": N})
    return Grid(1, max(64, spec.min_n(2 * math.pi)), 2 * math.pi)


def lacunary(N: int, grid: Grid | None = None, real: bool = False) -> Field:
    """``sum_{j=1}^N j^{-1/2} exp(i 4^j x)`` on a ``2 pi``-periodic grid."""
    grid = grid or lacunary_grid(N)
    if grid.dim != 1:
        raise ValueError("lacunary series are one-dimensional")
    period = grid.boxlen / (2 * math.pi)
    if abs(period - round(period)) > 1e-12:
        raise ValueError("lacunary series need a box length that is a multiple of 2 pi")
    _require(grid, 4.0**N, f"lacunary(N={N})")
    x = grid.x[..., 0]
    values = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(1, N + 1):
        values += j ** -0.5 * np.exp(1j * 4.0**j * x)
    if real:
        values = values.real.copy()
    return Field(grid, values, {"family": "lacunary", "N": N})


def _spread_window(xi: np.ndarray) -> np.ndarray:
    """Transform of the low-pass window: 1 on ``|xi| < 1/10``, 0 on ``|xi| > 1/5``."""
    a = np.abs(xi)
    return 1.0 - _TRANSITION((a - 0.1) / 0.1)


def spread_lacunary_grid(J: int, n: int | None = None) -> Grid:
    """A ``2 pi``-periodic grid resolving ``spread_lacunary(..., J)``."""
    if n is None:
        n = FamilySpec("spread_lacunary", {"J": J}).min_n(2 * math.pi)
    return Grid(1, n, 2 * math.pi)


def spread_lacunary(delta: float, eps: float, J: int, grid: Grid | None = None, real: bool = False, center=None) -> Field:
    """``sum_{j=10}^J a_j lam_j^{1/2} phi0(lam_j (x - c)) exp(i 2^j (x - c))``.

    ``a_j = j^{-(1/2 + delta)}`` and ``lam_j = j^eps`` with
    ``1/10 > eps >= 4 delta > 0``.  The window ``phi0`` has a transform equal
    to one on ``|xi| < 1/10`` and zero beyond ``1/5``.  Metadata records how
    many lattice points fall inside the narrowest window; on boxes with
    ``2 pi / L >= lam/5`` only the carrier survives and the family reduces
    to a weighted lacunary series.
    """
    if not (0.1 > eps >= 4 * delta > 0):
        raise ValueError(f"need 1/10 > eps >= 4 delta > 0, got eps={eps}, delta={delta}")
    if J < 10:
        raise ValueError("the family starts at j = 10")
    grid = grid or spread_lacunary_grid(J)
    if grid.dim != 1:
        raise ValueError("spread_lacunary is one-dimensional")
    lam_top = J**eps
    _require(grid, 2.0**J + lam_top / 5, f"spread_lacunary(J={J})")
    xi = grid.xi[..., 0]
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(10, J + 1):
        a = j ** -(0.5 + delta)
        lam = j**eps
        # f_j = lam^{1/2} phi0(lam x) e^{i 2^j x}  ->  lam^{-1/2} phi0^((xi - 2^j)/lam)
        coeffs += a * lam**-0.5 * _spread_window((xi - 2.0**j) / lam)
    coeffs = coeffs * _phase(grid, center)
    window_points = int(np.count_nonzero(_spread_window(xi / 10**eps) > 0))
    f = _to_field(grid, coeffs, False, {
        "family": "spread_lacunary", "delta": delta, "eps": eps, "J": J,
        "window_lattice_points": window_points,
    })
    if real:
        f = Field(grid, f.values.real.copy(), {**f.meta, "real": True})
    return f


@dataclass(frozen=True)
class DivfreePair:
    """Stream function, the base field ``u_o`` and the perturbed field ``u = u_o + u_n``."""

    phi: Field
    u_o: tuple[Field, Field]
    u: tuple[Field, Field]
    meta: Mapping[str, Any]


def curl(psi: Field) -> tuple[Field, Field]:
    """Velocity ``(-d_2 psi, d_1 psi)`` of a stream function; divergence-free by construction."""
    d1 = sy.apply(sy.partial(0, 2), psi)
    d2 = sy.apply(sy.partial(1, 2), psi)
    return (-d2, d1)


def _vector_lp(u: Sequence[Field], p: float) -> float:
    mag = np.sqrt(sum(np.abs(c.values) ** 2 for c in u))
    return lp_norm(Field(u[0].grid, mag), p)


def divfree_pair(
    bump: DivfreeBump,
    m: int,
    k: float,
    s: float,
    grid: Grid,
    p: float = 2.0,
    center=None,
) -> DivfreePair:
    """Divergence-free fields built from a stacked stream function.

    ``phi = sum_{l=1}^m 2^{-6l} (1/l) bump(2^{3l} (x - c))`` and
    ``u_o = (-d_2 phi, d_1 phi)``.  The perturbation stream function is
    ``k^{-(1+s)} sin(k x_1) b(x)`` with ``b`` a Gaussian centred at the
    maximum of ``|d_12 phi|``, with width a quarter of the radius of the ball
    where ``|d_12 phi|`` exceeds half its peak (but at least four grid
    cells), and scaled so that
    ``||b||_p = ||J^s u_o||_p / 100``.

    Raises
    ------
    ResolutionError
        If ``2^{3m}`` or ``k`` is not resolved, or the half-peak ball is
        narrower than the grid spacing.
    """
    if grid.dim != 2:
        raise ValueError("divfree_pair lives on a 2D grid")
    top = bump.support[1] * 2.0 ** (3 * m)
    _require(grid, top, f"divfree_pair(m={m})")
    coeffs = np.zeros(grid.shape)
    for l in range(1, m + 1):
        scale = 2.0 ** (3 * l)
        coeffs += bump.hat(grid.xi / scale) * scale**-2 * 2.0 ** (-6 * l) / l
    coeffs = coeffs * _phase(grid, center)
    phi = _to_field(grid, coeffs, True, {"family": "divfree_stream", "m": m})
    u_o = curl(phi)

    d12 = sy.apply(sy.partial(0, 2) * sy.partial(1, 2), phi).values
    peak_idx = np.unravel_index(np.argmax(np.abs(d12)), grid.shape)
    peak_x = grid.x[peak_idx]
    disp = (grid.x - peak_x + grid.boxlen / 2) % grid.boxlen - grid.boxlen / 2
    dist = np.sqrt(np.sum(disp**2, axis=-1))
    below = dist[np.abs(d12) <= 0.5 * np.abs(d12[peak_idx])]
    delta0 = float(below.min()) if below.size else grid.boxlen / 2
    if delta0 < 2 * grid.spacing:
        raise ResolutionError(f"half-peak ball of radius {delta0:.3g} is not resolved")
    width = max(delta0 / 4, 4 * grid.spacing)
    # Gaussian tail below round-off beyond 9/width around the carrier
    _require(grid, k + 9.0 / width, f"divfree_pair perturbation (k={k}, width={width:.3g})")
    b = np.exp(-np.sum(disp**2, axis=-1) / (2 * width**2))
    Js_uo = [sy.apply(sy.bessel(s), c) for c in u_o]
    target = _vector_lp(Js_uo, p) / 100
    b *= target / lp_norm(Field(grid, b), p)
    x1 = grid.x[..., 0]
    psi_n = with_spectrum(Field(grid, k ** -(1 + s) * np.sin(k * x1) * b))
    u_n = curl(psi_n)
    u = (u_o[0] + u_n[0], u_o[1] + u_n[1])
    meta = {
        "m": m, "k": k, "s": s, "p": p,
        "center": tuple(float(c) for c in peak_x),
        "delta0": delta0, "b_width": width, "b_norm": target,
        "d12_origin": float(d12[peak_idx]),
    }
    return DivfreePair(phi, u_o, u, meta)


def build(spec: FamilySpec, grid: Grid):
    """Construct a family member from its spec."""
    p = dict(spec.params)
    if spec.family == "log_stack":
        return log_stack(annular_bump(grid.dim), p["N"], grid)
    if spec.family == "grad_log_stack":
        return grad_log_stack(annular_bump(grid.dim), p["N"], grid)
    if spec.family == "lacunary":
        return lacunary(p["N"], grid, p.get("real", False))
    if spec.family == "spread_lacunary":
        return spread_lacunary(p["delta"], p["eps"], p["J"], grid, p.get("real", False))
    if spec.family == "divfree_pair":
        return divfree_pair(divfree_bump(), p["m"], p["k"], p["s"], grid, p.get("p", 2.0))
    raise ValueError(f"family {spec.family!r} cannot be built from a spec alone")
