import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracleibniz import dyadic as dy
from fracleibniz import norms as nm
from fracleibniz.field import Field, make_grid, random_smooth

G1 = make_grid(1, 256, 2 * math.pi)
X = G1.x[..., 0]


# the L1 Riemann sum of |sin| is h * 2 cot(pi / n), not 4
@pytest.mark.parametrize("p,want", [(2, math.sqrt(math.pi)), (1, G1.spacing * 2 / math.tan(math.pi / 256)), (math.inf, 1.0)])
def test_lp_norm_of_sine(p, want):
    assert math.isclose(nm.lp_norm(Field(G1, np.sin(X)), p), want, rel_tol=1e-12)


def test_lp_norm_large_p_no_overflow():
    f = Field(G1, 1e200 * np.ones(G1.shape))
    assert math.isclose(nm.lp_norm(f, 8), 1e200 * (2 * math.pi) ** (1 / 8), rel_tol=1e-12)
    with pytest.raises(ValueError):
        nm.lp_norm(f, 0)


@given(st.integers(0, 1000), st.floats(-5, 5), st.sampled_from([1.0, 2.0, 3.5, math.inf]))
def test_lp_homogeneous(seed, c, p):
    f = random_smooth(G1, seed)
    assert math.isclose(nm.lp_norm(f * c, p), abs(c) * nm.lp_norm(f, p), rel_tol=1e-12, abs_tol=1e-300)


def test_bmo_of_step_is_one():
    f = Field(G1, np.where(X < math.pi, 1.0, -1.0))
    assert math.isclose(nm.bmo_norm(f), 1.0, rel_tol=1e-14)


@given(st.integers(0, 1000), st.floats(-3, 3), st.floats(-10, 10))
def test_bmo_invariances(seed, c, shift):
    g = make_grid(2, 32, 10.0)
    f = random_smooth(g, seed)
    base = nm.bmo_norm(f)
    assert math.isclose(nm.bmo_norm(f * c + Field(g, np.full(g.shape, shift))), abs(c) * base, rel_tol=1e-9, abs_tol=1e-12)


def test_bmo_below_twice_sup():
    f = random_smooth(G1, 3)
    assert nm.bmo_norm(f) <= 2 * nm.lp_norm(f, math.inf)


def test_cube_family_scales_and_offsets():
    cf = nm.CubeFamily(make_grid(1, 16, 1.0))
    assert cf.scales == [1, 2, 4, 8, 16]
    assert cf.offsets(4) == [0, 2] and cf.offsets(16) == [0]
    assert nm.CubeFamily(make_grid(1, 16, 1.0), shifted=False).offsets(4) == [0]


def test_besov0_of_single_band_wave():
    # phi = 1 on [7/12, 1], so cos(8x) sits entirely in band 3
    f = Field(G1, np.cos(8 * X))
    v = nm.besov0_norm(f)
    assert math.isclose(float(v), 1.0, rel_tol=1e-12)
    assert v.kind == "besov0" and v.bands == dy.active_range(G1)


def test_besov_weight():
    f = Field(G1, np.cos(8 * X))
    assert math.isclose(float(nm.besov_norm(f, 1.5, math.inf)), 8**1.5, rel_tol=1e-12)


def test_square_function_of_single_band_wave():
    f = Field(G1, np.cos(8 * X))
    sq = nm.square_function(f)
    assert np.allclose(sq.values, np.abs(np.cos(8 * X)), atol=1e-13)
    assert math.isclose(float(nm.hardy_sq_norm(f, 2)), math.sqrt(math.pi), rel_tol=1e-12)


def test_family_mismatch_refused():
    f = random_smooth(G1, 0)
    a = nm.besov0_norm(f, dy.make_family("poly5"))
    b = nm.besov0_norm(f, dy.make_family("exp_flat"))
    with pytest.raises(nm.FamilyMismatchError):
        a / b
    with pytest.raises(nm.FamilyMismatchError):
        a < b
    assert a / nm.besov0_norm(f) == 1.0
    assert float(a) * 2 == 2 * float(a)


def test_maximal_function():
    f = random_smooth(G1, 1)
    M = nm.maximal(f)
    assert np.all(M.values >= np.abs(f.values) - 1e-15)
    c = Field(G1, np.full(G1.shape, -2.0))
    assert np.allclose(nm.maximal(c).values, 2.0)
    g2 = make_grid(2, 32, 4.0)
    assert np.allclose(nm.maximal(Field(g2, np.ones(g2.shape))).values, 1.0)


def test_maximal_of_delta_decays_like_inverse_radius():
    v = np.zeros(G1.shape)
    v[128] = 1.0
    M = nm.maximal(Field(G1, v)).values
    # at distance r cells the best window has radius >= r, average <= 1/(2r+1)
    for r in (4, 16, 64):
        assert M[128 + r] <= 1 / (2 * r + 1) + 1e-15


@pytest.mark.parametrize(
    "kind,expect",
    [
        (nm.NormKind("lp", p=2), math.sqrt(math.pi)),
        (nm.NormKind("sup"), 1.0),
        (nm.NormKind("besov0"), 1.0),
        (nm.NormKind("hardy_sq", p=2), math.sqrt(math.pi)),
    ],
)
def test_norm_dispatch(kind, expect):
    assert math.isclose(float(kind(Field(G1, np.cos(8 * X)))), expect, rel_tol=1e-12)


def test_norm_kind_validation():
    with pytest.raises(ValueError):
        nm.NormKind("weird")
    with pytest.raises(ValueError):
        nm.NormKind("lp", p=-1)
