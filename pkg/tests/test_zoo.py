import math

import numpy as np
import pytest

from fracleibniz import norms as nm
from fracleibniz import symbols as sy
from fracleibniz import zoo
from fracleibniz.field import Field, Gaussian, forward, make_grid, random_smooth


def test_annular_bump_origin_value_1d():
    b = zoo.annular_bump(1)
    xi = np.linspace(-1, 1, 200001)
    numeric = np.trapezoid(b.hat(xi[:, None]), xi) / (2 * math.pi)
    assert math.isclose(b.origin_value(), numeric, rel_tol=1e-9)


def test_annular_bump_origin_value_2d():
    b = zoo.annular_bump(2)
    r = np.linspace(0, 1, 100001)
    numeric = 2 * math.pi * np.trapezoid(b.hat(np.stack([r, 0 * r], -1)) * r, r) / (2 * math.pi) ** 2
    assert math.isclose(b.origin_value(), numeric, rel_tol=1e-9)


def test_divfree_bump_mixed_derivative_at_origin():
    b = zoo.divfree_bump()
    r = np.linspace(2 / 3, 1, 4001)
    t = np.linspace(0, 2 * math.pi, 4001)
    R, T = np.meshgrid(r, t, indexing="ij")
    xi = np.stack([R * np.cos(T), R * np.sin(T)], -1)
    integrand = b.hat(xi) * xi[..., 0] * xi[..., 1] * R
    numeric = -np.trapezoid(np.trapezoid(integrand, t, axis=1), r) / (2 * math.pi) ** 2
    assert math.isclose(b.d12_origin(), numeric, rel_tol=1e-6)
    assert np.all(b.hat(xi) >= -1e-15)


def test_annular_bump_support():
    b = zoo.annular_bump(1)
    lo, hi = b.support
    xi = np.array([[lo - 1e-9], [hi + 1e-9], [0.75]])
    assert b.hat(xi).tolist() == [0.0, 0.0, 1.0]


@pytest.mark.parametrize("N", [2, 4, 6])
def test_log_stack_value_at_centre(N):
    g = make_grid(1, 16384, 400.0)
    f = zoo.log_stack(zoo.annular_bump(1), N, g, center=g.center)
    harmonic = sum(1 / j for j in range(1, N + 1))
    at_c = f.values[g.n // 2]
    assert math.isclose(at_c, harmonic * zoo.annular_bump(1).origin_value(), rel_tol=1e-3)


def test_log_stack_sup_grows_while_bmo_stays_bounded():
    g = make_grid(1, 2**15, 200.0)
    sups, bmos = [], []
    for N in (2, 4, 8):
        f = zoo.log_stack(zoo.annular_bump(1), N, g)
        sups.append(nm.lp_norm(f, math.inf))
        bmos.append(nm.bmo_norm(f))
    assert sups[0] < sups[1] < sups[2]
    assert max(bmos) / min(bmos) < 2


def test_log_stack_resolution_guard():
    g = make_grid(1, 256, 2 * math.pi)
    with pytest.raises(zoo.ResolutionError):
        zoo.log_stack(zoo.annular_bump(1), 12, g)
    with pytest.raises(ValueError):
        zoo.log_stack(zoo.annular_bump(2), 2, g)


def test_grad_log_stack_is_real_and_mean_free():
    g = make_grid(1, 4096, 100.0)
    f = zoo.grad_log_stack(zoo.annular_bump(1), 5, g)
    assert f.is_real and abs(f.values.sum()) < 1e-10


def test_lacunary_spectrum():
    N = 3
    f = zoo.lacunary(N)
    c = forward(f).coeffs / f.grid.boxlen
    for j in range(1, N + 1):
        assert math.isclose(abs(c[4**j]), j**-0.5, rel_tol=1e-12)
    assert math.isclose(nm.lp_norm(f, 2) ** 2, 2 * math.pi * sum(1 / j for j in range(1, N + 1)), rel_tol=1e-12)
    with pytest.raises(ValueError):
        zoo.lacunary(2, make_grid(1, 256, 7.0))


@pytest.mark.parametrize("delta,eps,J", [(0.05, 0.08, 12), (0.02, 0.2, 12), (0.02, 0.08, 9)])
def test_spread_lacunary_parameter_checks(delta, eps, J):
    with pytest.raises(ValueError):
        zoo.spread_lacunary(delta, eps, J)


def test_spread_lacunary_reduces_to_carriers_on_a_2pi_box():
    f = zoo.spread_lacunary(0.02, 0.08, 12)
    assert f.meta["window_lattice_points"] == 1
    c = forward(f).coeffs / f.grid.boxlen
    support = np.nonzero(np.abs(c) > 1e-14)[0]
    assert support.tolist() == [2**j for j in range(10, 13)]
    for j in range(10, 13):
        # a_j lam_j^{-1/2} window(0), divided by L for a series coefficient
        want = j**-0.52 * j**-0.04 / (2 * math.pi)
        assert math.isclose(abs(c[2**j]), want, rel_tol=1e-12)


def test_modulated_bump_cap():
    g = make_grid(1, 256, 2 * math.pi)
    with pytest.raises(zoo.ResolutionError):
        zoo.modulated_bump(Gaussian(g.center, 1.0), 64.0, 1.0, g)
    with pytest.raises(ValueError):
        zoo.modulated_bump(Gaussian(g.center, 1.0), 4.0, 1.0, g, kind="sin")
    f = zoo.modulated_bump(Gaussian(g.center, 0.5), 16.0, 1.0, g, kind="exp")
    assert not f.is_real and math.isclose(np.abs(f.values).max(), 1 / 16, rel_tol=1e-12)


def test_curl_is_divergence_free():
    g = make_grid(2, 64, 10.0)
    u = zoo.curl(random_smooth(g, 4))
    div = sy.apply(sy.partial(0, 2), u[0]) + sy.apply(sy.partial(1, 2), u[1])
    assert np.abs(div.values).max() < 1e-12


def test_divfree_pair():
    g = make_grid(2, 256, 4.0)
    pair = zoo.divfree_pair(zoo.divfree_bump(), 2, 16.0, 2.5, g)
    for u in (pair.u_o, pair.u):
        div = sy.apply(sy.partial(0, 2), u[0]) + sy.apply(sy.partial(1, 2), u[1])
        assert np.abs(div.values).max() < 1e-12
    assert pair.meta["b_width"] >= 4 * g.spacing
    # perturbation is small next to u_o
    du = np.abs(pair.u[0].values - pair.u_o[0].values).max()
    assert 0 < du < np.abs(pair.u_o[0].values).max()


def test_divfree_pair_guards():
    with pytest.raises(ValueError):
        zoo.divfree_pair(zoo.divfree_bump(), 1, 4.0, 1.0, make_grid(1, 64, 4.0))
    with pytest.raises(zoo.ResolutionError):
        zoo.divfree_pair(zoo.divfree_bump(), 3, 16.0, 1.0, make_grid(2, 64, 4.0))


@pytest.mark.parametrize(
    "family,params",
    [("log_stack", {"N": 8}), ("lacunary", {"N": 4}), ("spread_lacunary", {"J": 12, "eps": 0.08})],
)
def test_min_n_resolves_family(family, params):
    spec = zoo.FamilySpec(family, params)
    L = 2 * math.pi
    n = spec.min_n(L)
    assert spec.top_frequency() <= make_grid(1, n, L).nyquist * 6 / 7
    assert spec.top_frequency() > make_grid(1, n // 2, L).nyquist * 6 / 7


def test_build_dispatch():
    g = make_grid(1, 1024, 2 * math.pi)
    f = zoo.build(zoo.FamilySpec("log_stack", {"N": 4}), g)
    assert f.meta["family"] == "log_stack"
    with pytest.raises(ValueError):
        zoo.build(zoo.FamilySpec("modulated_bump", {"k": 4}), g)
    with pytest.raises(ValueError):
        zoo.FamilySpec("unknown").top_frequency()
