"""Ratio probes: an inequality ``LHS <~ RHS`` evaluated over a parameter sweep.

A probe is plain data (a JSON config) naming a registered evaluator.  The
evaluator turns one sweep point into ``(lhs, rhs)``; the ratio ``lhs / rhs``
is what the experiments track.  Config schema::

    {
      "probe": "<registered name>",
      "params": {...},              # exactly one entry may be a list: the sweep
      "grid": {"dim": 1, "n": 1024, "L": 6.283185307179586},
      "norms": {"p": 2, "p1": 4, "p2": 4, "p3": ..., "p4": ...},
      "seed": 0
    }

Probes over random pairs sweep the integer parameter ``pairs``: point ``i``
uses the pair seeded ``seed + 2 i`` and ``seed + 2 i + 1``.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .. import dyadic as dy
from .. import norms as nm
from .. import remainders as rm
from .. import symbols as sy
from .. import zoo
from ..field import Field, Gaussian, Grid, forward, make_grid, random_smooth, sample, worker_count

__all__ = [
    "ConfigError",
    "ProbeResolutionError",
    "RatioProbe",
    "ProbeRecord",
    "PROBES",
    "register",
    "load_config",
    "probe_from_config",
    "run_probe",
]

HOLDER_TOL = 1e-12


class ConfigError(ValueError):
    """Malformed experiment configuration."""


class ProbeResolutionError(zoo.ResolutionError):
    """A family member at one sweep point does not fit on the grid."""


@dataclass(frozen=True)
class ProbeRecord:
    probe: str
    param: float
    lhs: float
    rhs: float
    ratio: float
    grid_n: int
    grid_L: float
    seed: int
    wall_ms: float

    def __post_init__(self):
        for name in ("lhs", "rhs", "ratio"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{self.probe} at {self.param}: {name}={v} is not finite and non-negative")


@dataclass(frozen=True)
class Evaluator:
    fn: Callable[["RatioProbe", Any, Grid, int], tuple[float, float]]
    anchor: str
    holder: tuple[tuple[str, str], ...] = ()


PROBES: dict[str, Evaluator] = {}


def register(name: str, anchor: str, holder: tuple[tuple[str, str], ...] = ()):
    """Decorator adding an evaluator to :data:`PROBES`.

    ``anchor`` states the inequality probed; ``holder`` lists exponent pairs
    that must satisfy ``1/p_a + 1/p_b = 1/p``.
    """

    def deco(fn):
        PROBES[name] = Evaluator(fn, anchor, holder)
        return fn

    return deco


@dataclass(frozen=True)
class RatioProbe:
    """A named experiment: evaluator, fixed parameters, one sweep axis and a grid."""

    name: str
    params: Mapping[str, Any]
    sweep_name: str
    sweep: tuple
    grid: Mapping[str, Any]
    norms: Mapping[str, float] = dc_field(default_factory=dict)
    seed: int = 0

    @property
    def evaluator(self) -> Evaluator:
        return PROBES[self.name]

    @property
    def anchor(self) -> str:
        return self.evaluator.anchor

    def make_grid(self) -> Grid:
        return make_grid(int(self.grid["dim"]), int(self.grid["n"]), float(self.grid["L"]))

    def p(self, key: str = "p") -> float:
        return _exponent(self.norms.get(key, 2.0))

    def point_params(self, value) -> dict:
        return {**self.params, self.sweep_name: value}


def _exponent(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity"):
            return math.inf
        v = float(v)
    v = float(v)
    if not v > 0:
        raise ConfigError(f"exponent {v} must be positive")
    return v


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _check_holder(probe: RatioProbe):
    for a, b in probe.evaluator.holder:
        if a not in probe.norms or b not in probe.norms:
            continue
        lhs = _inv(probe.p(a)) + _inv(probe.p(b))
        if abs(lhs - _inv(probe.p("p"))) > HOLDER_TOL:
            raise ConfigError(
                f"{probe.name}: 1/{a} + 1/{b} = {lhs:.15g} differs from 1/p = {_inv(probe.p('p')):.15g}"
            )


def probe_from_config(cfg: Mapping[str, Any], grid_n: int | None = None, seed: int | None = None) -> RatioProbe:
    """Validate a config mapping and build the probe.

    Raises
    ------
    ConfigError
        Unknown probe, missing or malformed fields, no or several sweep axes,
        or a Hoelder mismatch.
    """
    try:
        name = cfg["probe"]
        params = dict(cfg.get("params", {}))
        grid = dict(cfg["grid"])
        norms = dict(cfg.get("norms", {}))
        cfg_seed = int(cfg.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if name not in PROBES:
        raise ConfigError(f"unknown probe {name!r}; known: {sorted(PROBES)}")
    if not {"dim", "n", "L"} <= set(grid):
        raise ConfigError("grid needs dim, n and L")
    if grid_n is not None:
        grid["n"] = int(grid_n)
    axes = [k for k, v in params.items() if isinstance(v, list)]
    if "pairs" in params and not axes:
        count = params.pop("pairs")
        if not isinstance(count, int) or count < 1:
            raise ConfigError("pairs must be a positive integer")
        axes = ["pair"]
        params["pair"] = list(range(count))
    if len(axes) != 1:
        raise ConfigError(f"exactly one list-valued parameter is needed as the sweep axis, got {axes}")
    axis = axes[0]
    values = tuple(params.pop(axis))
    if not values:
        raise ConfigError("empty sweep")
    probe = RatioProbe(name, params, axis, values, grid, norms, cfg_seed if seed is None else int(seed))
    try:
        for key in norms:
            probe.p(key)
        probe.make_grid()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _check_holder(probe)
    return probe


def load_config(path: str | os.PathLike, grid_n: int | None = None, seed: int | None = None) -> RatioProbe:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return probe_from_config(cfg, grid_n, seed)


def _run_point(probe: RatioProbe, grid: Grid, index: int, value) -> ProbeRecord:
    start = time.perf_counter()
    point = probe.point_params(value)
    try:
        lhs, rhs = probe.evaluator.fn(probe, point, grid, probe.seed + 2 * index)
    except zoo.ResolutionError as exc:
        raise ProbeResolutionError(f"{probe.name} at {probe.sweep_name}={value}: {exc}") from exc
    lhs, rhs = float(lhs), float(rhs)
    ratio = lhs / rhs if rhs > 0 else math.inf
    wall = (time.perf_counter() - start) * 1e3
    return ProbeRecord(probe.name, float(value), lhs, rhs, ratio, grid.n, grid.boxlen, probe.seed, wall)


def run_probe(probe: RatioProbe, threads: int | None = None) -> list[ProbeRecord]:
    """Evaluate every sweep point; points run in parallel, order is preserved."""
    grid = probe.make_grid()
    threads = threads or worker_count()
    jobs = list(enumerate(probe.sweep))
    if threads <= 1 or len(jobs) == 1:
        return [_run_point(probe, grid, i, v) for i, v in jobs]
    with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(lambda iv: _run_point(probe, grid, *iv), jobs))


# --------------------------------------------------------------------------
# norm helpers


def _ap(symbol, f: Field) -> Field:
    return sy.apply(symbol, f)


def _grad(f: Field) -> list[Field]:
    d = f.grid.dim
    return sy.apply_vec([sy.partial(l, d) for l in range(d)], f)


def _vec_norm(parts: list[Field], p: float) -> float:
    mag = np.sqrt(sum(np.abs(c.values) ** 2 for c in parts))
    return nm.lp_norm(Field(parts[0].grid, mag), p)


def _vec_bmo(parts: list[Field]) -> float:
    return max(nm.bmo_norm(c) for c in parts)


def _bessel_grad(f: Field, order: float) -> list[Field]:
    """Components of ``J^order d f``."""
    d = f.grid.dim
    J = sy.bessel(order)
    return sy.apply_vec([J * sy.partial(l, d) for l in range(d)], f)


def _pair(grid: Grid, seed: int) -> tuple[Field, Field]:
    return random_smooth(grid, seed), random_smooth(grid, seed + 1)


def _frac(f: Field, s: float) -> Field:
    return f if s == 0 else _ap(sy.power(s, f.grid.dim), f)


# --------------------------------------------------------------------------
# inequality probes on random smooth pairs


@register("kato_ponce", "||J^s(fg) - f J^s g||_p <~ ||J^{s-1} df||_p ||g||_inf + ||df||_inf ||J^{s-1} g||_p")
def _kato_ponce(probe, point, grid, seed):
    s, p = float(point["s"]), probe.p()
    f, g = _pair(grid, seed)
    lhs = nm.lp_norm(rm.kp_commutator(f, g, s), p)
    rhs = _vec_norm(_bessel_grad(f, s - 1), p) * nm.lp_norm(g, math.inf)
    if s > 1:
        rhs += _vec_norm(_grad(f), math.inf) * nm.lp_norm(_ap(sy.bessel(s - 1), g), p)
    return lhs, rhs


@register(
    "kato_ponce_holder",
    "||J^s(fg) - f J^s g||_p <~ ||J^{s-1} df||_p1 ||g||_p2 + ||df||_p3 ||J^{s-2} dg||_p4",
    (("p1", "p2"), ("p3", "p4")),
)
def _kato_ponce_holder(probe, point, grid, seed):
    s, p = float(point["s"]), probe.p()
    f, g = _pair(grid, seed)
    lhs = nm.lp_norm(rm.kp_commutator(f, g, s), p)
    rhs = _vec_norm(_bessel_grad(f, s - 1), probe.p("p1")) * nm.lp_norm(g, probe.p("p2"))
    if s > 1:
        rhs += _vec_norm(_grad(f), probe.p("p3")) * _vec_norm(_bessel_grad(g, s - 2), probe.p("p4"))
    return lhs, rhs


@register(
    "leibniz",
    "||D^s(fg) - sum d^a f D^{s,a} g / a! - sum d^b g D^{s,b} f / b!||_p <~ "
    "||D^s1 f||_p1 ||D^s2 g||_p2, with BMO on the side named by the flavor",
    (("p1", "p2"),),
)
def _leibniz(probe, point, grid, seed):
    s, s1 = float(point["s"]), float(point["s1"])
    s2 = s - s1
    flavor = point.get("flavor", "holder")
    spec = rm.RemainderSpec.flavor(flavor, s, s1, s2)
    p = probe.p()
    f, g = _pair(grid, seed)
    lhs = nm.lp_norm(rm.leibniz_remainder(spec, f, g), p)
    Df, Dg = _frac(f, s1), _frac(g, s2)
    if flavor == "holder":
        rhs = nm.lp_norm(Df, probe.p("p1")) * nm.lp_norm(Dg, probe.p("p2"))
    elif flavor == "bmo_g":
        rhs = nm.lp_norm(Df, p) * nm.bmo_norm(Dg)
    else:
        rhs = nm.bmo_norm(Df) * nm.lp_norm(Dg, p)
    return lhs, rhs


@register(
    "refined_ds",
    "||D^s(fg) - f D^s g - g D^s f + s df . D^{s-2} dg||_p <~ ||D^s f||_p1 ||g||_p2",
    (("p1", "p2"),),
)
def _refined_ds(probe, point, grid, seed):
    s = float(point["s"])
    f, g = _pair(grid, seed)
    lhs = nm.lp_norm(rm.refined_ds_remainder(f, g, s), probe.p())
    p2 = probe.p("p2")
    g_norm = nm.bmo_norm(g) if math.isinf(p2) else nm.lp_norm(g, p2)
    return lhs, nm.lp_norm(_frac(f, s), probe.p("p1")) * g_norm


@register(
    "refined_js",
    "||J^s(fg) - f J^s g - g(J^s f - f) [+ s df . J^{s-2} dg]||_p <~ "
    "||J^{s-1} df||_p ||g||_BMO (s <= 1), Besov-zero norms for s > 1",
)
def _refined_js(probe, point, grid, seed):
    s, p = float(point["s"]), probe.p()
    f, g = _pair(grid, seed)
    lhs = nm.lp_norm(rm.refined_js_remainder(f, g, s), p)
    Jdf = _vec_norm(_bessel_grad(f, s - 1), p)
    if s <= 1:
        return lhs, Jdf * nm.bmo_norm(g)
    b0_df = max(float(nm.besov0_norm(c)) for c in _grad(f))
    rhs = Jdf * float(nm.besov0_norm(g)) + b0_df * _vec_norm(_bessel_grad(g, s - 2), p)
    return lhs, rhs


@register("hilbert_commutator", "||d^l [H, a] d^m f||_p <~ ||d^{l+m} a||_BMO ||f||_p")
def _hilbert(probe, point, grid, seed):
    l, m = int(point.get("l", 0)), int(point.get("m", 0))
    a, f = _pair(grid, seed)
    lhs = nm.lp_norm(rm.hilbert_commutator(a, f, l, m), probe.p())
    da = _ap(sy.i_power((l + m,)), a) if l + m else a
    return lhs, nm.bmo_norm(da) * nm.lp_norm(f, probe.p())


@register(
    "dmp",
    "||D^{a+b}(a D^{1-a-b} f) - D^a(a D^{1-a} f) + b grad a . D^{-1} grad f||_p <~ ||D a||_BMO ||f||_p",
)
def _dmp(probe, point, grid, seed):
    alpha, beta = float(point["alpha"]), float(point["beta"])
    a, f = _pair(grid, seed)
    lhs = nm.lp_norm(rm.dmp_remainder(a, f, alpha, beta), probe.p())
    return lhs, nm.bmo_norm(_frac(a, 1.0)) * nm.lp_norm(f, probe.p())


# --------------------------------------------------------------------------
# decay and growth probes (rhs is 1 where only the lhs is tracked)


@register("modulation_decay", "||J^s(phi e^{ikx}) - <k>^s phi e^{ikx}||_2 <~ k^{s-1}")
def _modulation_decay(probe, point, grid, seed):
    s, k = float(point["s"]), float(point["k"])
    width = float(point.get("width", 1.0))
    phi = sample(grid, Gaussian(grid.center, width))
    wave = Field(grid, phi.values * np.exp(1j * k * grid.x[..., 0]))
    diff = _ap(sy.bessel(s), wave) - wave * (1 + k * k) ** (s / 2)
    return nm.lp_norm(diff, 2), 1.0


@register(
    "kernel_decay",
    "sup |K_j| for the kernel of (<xi>^s - 1) on fattened band j; "
    "weighted: sup |K_j(x)| (1 + 2^j |x|)^{d+2} 2^{-j(2+d)}",
)
def _kernel_decay(probe, point, grid, seed):
    s, j = float(point["s"]), int(point["j"])
    n1, n2 = int(point.get("n1", 2)), int(point.get("n2", 2))
    fam = dy.make_family(point.get("ramp", "poly5"))
    K = sy.kernel_of(sy.bessel_tilde(s), fam, grid, j, n1, n2)
    a = np.abs(K.values)
    if not point.get("weighted", False):
        return float(a.max()), 1.0
    d = grid.dim
    disp = grid.x - grid.center
    r = np.sqrt(np.sum(disp**2, axis=-1))
    w = (1 + 2.0**j * r) ** (d + 2) * 2.0 ** (-j * (2 + d))
    return float((a * w).max()), 1.0


def _log_stack_setup(grid: Grid, point):
    s = float(point["s"])
    k = float(point.get("k", 2.0**15))
    width = float(point.get("width", 2.0**-9))
    b = sample(grid, Gaussian(grid.center, width))
    b = b * (1.0 / nm.lp_norm(b, 2))
    return s, zoo.modulated_bump(b, k, s)


@register(
    "log_stack_growth",
    "||J^s(fg) - f J^s g||_p / max(1, ||J^s f||_p ||g||_BMO) unbounded along g = log_stack(N)",
)
def _log_stack_growth(probe, point, grid, seed):
    s, f = _log_stack_setup(grid, point)
    g = zoo.log_stack(zoo.annular_bump(grid.dim), int(point["N"]), grid)
    p = probe.p()
    lhs = nm.lp_norm(rm.kp_commutator(f, g, s), p)
    rhs = max(1.0, nm.lp_norm(_ap(sy.bessel(s), f), p) * nm.bmo_norm(g))
    return lhs, rhs


def square_sum(f: Field, family: dy.LPFamily | None = None) -> Field:
    """``sum_j (P_j f)^2`` over the active bands (squares, not moduli)."""
    family = family or nm.DEFAULT_FAMILY
    spec = forward(f)
    lo, hi = dy.active_range(f.grid)
    acc = np.zeros(f.grid.shape, dtype=np.result_type(f.values, np.float64))
    for j in range(lo, hi + 1):
        pj = np.fft.ifftn(spec.coeffs * dy.band_multiplier(family, f.grid, j)) / f.grid.cell_volume
        if f.is_real:
            pj = pj.real
        acc += pj * pj
    return Field(f.grid, acc)


@register(
    "square_sum_growth",
    "||sum_j (P_j f)^2||_2 against ||f||_2 sup_j ||P_j f||_inf for spread lacunary f",
)
def _square_sum_growth(probe, point, grid, seed):
    f = zoo.spread_lacunary(float(point["delta"]), float(point["eps"]), int(point["J"]), grid)
    lhs = nm.lp_norm(square_sum(f), 2)
    return lhs, nm.lp_norm(f, 2) * float(nm.besov0_norm(f))


def _vec_l2(parts) -> float:
    return math.sqrt(sum(nm.lp_norm(c, 2) ** 2 for c in parts))


@register(
    "euler_growth",
    "||J^s((u.grad)u) - (u.grad)J^s u||_2 / ||J^s u||_2, max over the two divergence-free fields",
)
def _euler_growth(probe, point, grid, seed):
    s, m, k = float(point["s"]), int(point["m"]), float(point.get("k", 64.0))
    pair = zoo.divfree_pair(zoo.divfree_bump(), m, k, s, grid)
    best = None
    for u in (pair.u_o, pair.u):
        lhs = _vec_l2(rm.euler_commutator(u, s))
        rhs = _vec_l2([sy.apply(sy.bessel(s), c) for c in u])
        if best is None or lhs / rhs > best[0] / best[1]:
            best = (lhs, rhs)
    return best
