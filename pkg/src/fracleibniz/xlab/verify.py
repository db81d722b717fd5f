"""Identity and oracle checks run by ``fracleibniz verify``.

Every check compares two independently computed quantities and reports the
discrepancy against a fixed tolerance.  ``fast`` checks are the exact
identities, the one-dimensional bilinear-oracle sweep and the symbol
calculus; the full suite adds two-dimensional oracles, a closed-form Euler
commutator and the family constructors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .. import dyadic as dy
from .. import remainders as rm
from .. import symbols as sy
from .. import zoo
from ..field import Field, make_grid, product, random_smooth, rel_err

__all__ = ["Check", "CheckResult", "CHECKS", "MODULES", "run_checks", "oracle_coverage"]

MODULES = ("field", "dyadic", "symbols", "norms", "remainders", "zoo")


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    fast: bool
    tol: float
    fn: Callable[[], float]


@dataclass(frozen=True)
class CheckResult:
    check: Check
    value: float
    seconds: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.check.tol

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag}  [{self.check.module}] {self.check.name}: {self.value:.3e} "
            f"(tol {self.check.tol:.0e}, {self.seconds:.2f} s)"
        )


CHECKS: list[Check] = []


def _check(name, module, tol, fast=True):
    def deco(fn):
        CHECKS.append(Check(name, module, fast, tol, fn))
        return fn

    return deco


def oracle_coverage() -> list[str]:
    """Remainder operations without a registered oracle (should be empty)."""
    covered = set(rm.ORACLES) | {"euler_commutator"}
    return [op for op in rm.REMAINDER_OPS if op not in covered]


# --------------------------------------------------------------------------
# exact identities


@_check("every remainder operation has an oracle", "remainders", 0.0)
def _coverage():
    return float(len(oracle_coverage()))


@_check("product with sigma = 1 equals the alias-free product", "field", 1e-12)
def _unit_symbol():
    g = make_grid(1, 128, 2 * math.pi)
    f, h = random_smooth(g, 1), random_smooth(g, 2)
    one = rm.BilinearSymbol(lambda x, y: np.ones(x.shape[:-1], complex), "one")
    return rel_err(rm.bilinear_apply(one, f, h), product(f, h))


@_check("Bony split reconstructs fg, 100 pairs (d=1, n=512)", "dyadic", 1e-11)
def _bony():
    g = make_grid(1, 512, 64.0)
    fam = dy.make_family()
    worst = 0.0
    for seed in range(100):
        f, h = random_smooth(g, 2 * seed), random_smooth(g, 2 * seed + 1)
        diag, lh, hl = dy.bony_split(fam, f, h)
        worst = max(worst, rel_err(diag + lh + hl, product(f, h)))
    return worst


@_check("bands sum to one on the resolved annulus", "dyadic", 1e-12)
def _partition():
    worst = 0.0
    for ramp in ("poly5", "exp_flat"):
        fam = dy.make_family(ramp)
        for dim, n, L in ((1, 4096, 50.0), (2, 256, 30.0)):
            g = make_grid(dim, n, L)
            lo, hi = dy.resolved_annulus(g)
            mask = (g.xi_abs >= lo) & (g.xi_abs <= hi)
            j0, j1 = dy.active_range(g)
            total = sum(dy.band_multiplier(fam, g, j) for j in range(j0, j1 + 1))
            worst = max(worst, float(np.abs(total[mask] - 1).max()))
    return worst


@_check("refined D^s remainder vanishes at s = 2", "remainders", 1e-11)
def _refined_s2():
    worst = 0.0
    for dim, n in ((1, 256), (2, 64)):
        g = make_grid(dim, n, 20.0)
        f, h = random_smooth(g, 3), random_smooth(g, 4)
        r = rm.refined_ds_remainder(f, h, 2.0)
        worst = max(worst, rel_err(r, Field(g, np.zeros(g.shape)), scale=_l2(sy.apply(sy.power(2.0, dim), product(f, h)))))
    return worst


def _l2(f: Field) -> float:
    return float(np.linalg.norm(f.values))


@_check("classical Leibniz rule from A^{s,alpha} with A = d^gamma, gamma in {2,3}", "remainders", 1e-10)
def _classical_leibniz():
    g = make_grid(1, 256, 20.0)
    f, h = random_smooth(g, 5), random_smooth(g, 6)
    worst = 0.0
    for gamma in (2, 3):
        base = sy.i_power((gamma,))
        lead = sy.apply(base, product(f, h))
        # Pascal's rule written out independently of the symbol calculus
        pascal = sum(
            (product(sy.apply(sy.i_power((a,)), f), sy.apply(sy.i_power((gamma - a,)), h)) * math.comb(gamma, a)
             for a in range(gamma + 1)),
            Field(g, np.zeros(g.shape)),
        )
        worst = max(worst, rel_err(pascal, lead))
        for s1 in range(gamma + 1):
            spec = rm.RemainderSpec(gamma, s1, gamma - s1, True, False, base)
            worst = max(worst, rel_err(rm.leibniz_remainder(spec, f, h), Field(g, np.zeros(g.shape)), scale=_l2(lead)))
    return worst


# --------------------------------------------------------------------------
# bilinear oracles


ORACLE_S = (0.5, 1.0, 1.5, 2.7)


def _oracle_worst(name: str, dim: int, n: int, L: float, seeds: Iterable[int] = (0, 1)) -> float:
    case = rm.ORACLES[name]
    g = make_grid(dim, n, L)
    worst = 0.0
    for seed in seeds:
        f, h = random_smooth(g, 2 * seed + 11), random_smooth(g, 2 * seed + 12)
        for s in ORACLE_S:
            oracle = rm.bilinear_apply(case.symbol(s, g), f, h)
            # remainders can vanish identically (e.g. A = d at s = 1): measure
            # against the leading term as well
            scale = _l2(case.leading(f, h, s))
            worst = max(worst, rel_err(case.composed(f, h, s), oracle, scale=scale))
    return worst


for _name, _case in rm.ORACLES.items():
    if _case.dim == 1:
        _check(f"oracle: {_name} (d=1, n=128)", "remainders", 1e-9)(
            lambda _name=_name: _oracle_worst(_name, 1, 128, 2 * math.pi)
        )
    else:
        _check(f"oracle: {_name} (d=2, n=32)", "remainders", 1e-9, fast=False)(
            lambda _name=_name: _oracle_worst(_name, 2, 32, 16.0, seeds=(0,))
        )


@_check("oracle: euler_commutator (d=2, n=32)", "remainders", 1e-9, fast=False)
def _euler_oracle():
    g = make_grid(2, 32, 16.0)
    u = zoo.curl(random_smooth(g, 21))
    worst = 0.0
    for s in (0.5, 1.5, 2.5):
        E, O = rm.euler_commutator(u, s), rm.euler_oracle(u, s)
        worst = max(worst, max(rel_err(a, b) for a, b in zip(E, O)))
    return worst


@_check("Euler commutator of a two-mode shear matches hand mode algebra", "remainders", 1e-9, fast=False)
def _euler_shear():
    L, s = 2 * math.pi * 3, 1.7
    g = make_grid(2, 64, L)
    a = 2 * math.pi / L
    x1, x2 = g.x[..., 0], g.x[..., 1]
    u = (Field(g, np.sin(a * x2)), Field(g, np.sin(a * x1)))
    c = ((1 + 2 * a * a) ** (s / 2) - (1 + a * a) ** (s / 2)) * a
    want = (c * np.sin(a * x1) * np.cos(a * x2), c * np.cos(a * x1) * np.sin(a * x2))
    E = rm.euler_commutator(u, s)
    return max(rel_err(e, Field(g, w)) for e, w in zip(E, want))


@_check("Euler commutator: direct and block assemblies agree (divergence-free u)", "remainders", 1e-10, fast=False)
def _euler_routes():
    g = make_grid(2, 128, 16.0)
    u = zoo.curl(random_smooth(g, 31))
    E, B = rm.euler_commutator(u, 2.5), rm.euler_via_blocks(u, 2.5)
    return max(rel_err(a, b) for a, b in zip(B, E))


@_check("Leibniz remainder: swapping s1, s2 equals swapping f, g", "remainders", 1e-12)
def _leibniz_swap():
    g = make_grid(1, 128, 2 * math.pi)
    f, h = random_smooth(g, 7), random_smooth(g, 8)
    spec = rm.RemainderSpec(2.3, 1.6, 0.7)
    return rel_err(rm.leibniz_remainder(spec.swapped(), h, f), rm.leibniz_remainder(spec, f, h))


# --------------------------------------------------------------------------
# symbol calculus


@_check("sum_{|a|=1} d^a f D^{s,a} g + s df . D^{s-2} dg = 0", "symbols", 1e-10)
def _first_order():
    worst = 0.0
    for dim, n in ((1, 256), (2, 64)):
        g = make_grid(dim, n, 20.0)
        f, h = random_smooth(g, 9), random_smooth(g, 10)
        for s in (0.5, 1.3, 2.7):
            total = Field(g, np.zeros(g.shape))
            scale = 0.0
            for l in range(dim):
                alpha = tuple(int(i == l) for i in range(dim))
                df = sy.apply(sy.partial(l, dim), f)
                t1 = product(df, sy.apply(sy.dsalpha(s, alpha), h))
                t2 = product(df, sy.apply(sy.ds_minus2_partial(s, l, dim), h)) * s
                total = total + t1 + t2
                scale = max(scale, _l2(t1))
            worst = max(worst, _l2(total) / scale)
    return worst


@_check("J^d closed form matches complex-step derivative", "symbols", 1e-12)
def _jd_closed_form():
    rng = np.random.default_rng(0)
    worst = 0.0
    h = 1e-30
    for s in (0.5, 1.3, 2.7):
        xi = rng.normal(scale=5.0, size=(200, 2))
        for l in range(2):
            for m in range(2):
                step = np.zeros(2, complex)
                step[m] = 1j * h
                z = xi + step
                r2 = np.sum(z * z, axis=-1)
                F = ((1 + r2) ** (s / 2) - 1) * z[:, l]
                want = F.imag / h
                got = sy.bessel_deriv(s, l, m).evaluate(xi)
                worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want)))))
    return worst


# --------------------------------------------------------------------------
# families


@_check("divergence-free pair has zero divergence", "zoo", 1e-12, fast=False)
def _divfree():
    g = make_grid(2, 256, 4.0)
    pair = zoo.divfree_pair(zoo.divfree_bump(), 2, 16, 2.5, g)
    div = sy.apply(sy.partial(0, 2), pair.u[0]) + sy.apply(sy.partial(1, 2), pair.u[1])
    return float(np.abs(div.values).max())


@_check("resolution guard rejects an unresolvable log stack", "zoo", 0.0, fast=False)
def _guard():
    g = make_grid(1, 256, 2 * math.pi)
    try:
        zoo.log_stack(zoo.annular_bump(1), 12, g)
    except zoo.ResolutionError:
        return 0.0
    return 1.0


def run_checks(module: str | None = None, fast: bool = False, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run the selected checks; ``echo`` receives one line per check."""
    if module is not None and module not in MODULES:
        raise ValueError(f"unknown module {module!r}; choose from {MODULES}")
    out = []
    for chk in CHECKS:
        if module is not None and chk.module != module:
            continue
        if fast and not chk.fast:
            continue
        t0 = time.perf_counter()
        try:
            value = float(chk.fn())
        except Exception as exc:  # a crashing check is a failing check
            value = math.inf
            if echo:
                echo(f"ERROR [{chk.module}] {chk.name}: {type(exc).__name__}: {exc}")
        res = CheckResult(chk, value, time.perf_counter() - t0)
        if echo:
            echo(res.line())
        out.append(res)
    return out
