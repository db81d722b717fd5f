import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracleibniz.field import (
    Constant,
    Field,
    Gaussian,
    GridMismatchError,
    PlaneWave,
    Spectrum,
    forward,
    inverse,
    make_grid,
    nyquist_free,
    pointwise,
    product,
    random_smooth,
    rel_err,
    sample,
    synthesize,
    with_spectrum,
    worker_count,
)


@pytest.mark.parametrize("dim,n,L", [(0, 8, 1.0), (3, 8, 1.0), (1, 12, 1.0), (1, 1, 1.0), (1, 8, 0.0), (2, 8, -1.0)])
def test_grid_rejects_bad_parameters(dim, n, L):
    with pytest.raises(ValueError):
        make_grid(dim, n, L)


def test_grid_geometry():
    g = make_grid(2, 16, 8.0)
    assert g.spacing == 0.5
    assert g.shape == (16, 16)
    assert g.cell_volume == 0.25
    assert math.isclose(g.dfreq, 2 * math.pi / 8)
    assert math.isclose(g.nyquist, math.pi / 0.5)
    assert g.xi.shape == (16, 16, 2)
    assert g.x[3, 5].tolist() == [1.5, 2.5]


def test_grid_mismatch_is_refused():
    a = random_smooth(make_grid(1, 64, 10.0), 0)
    b = random_smooth(make_grid(1, 64, 11.0), 0)
    with pytest.raises(GridMismatchError):
        a + b
    with pytest.raises(GridMismatchError):
        product(a, b)


def test_field_shape_checked():
    with pytest.raises(ValueError):
        Field(make_grid(1, 8, 1.0), np.zeros(9))


@pytest.mark.parametrize("dim", [1, 2])
def test_round_trip(dim):
    g = make_grid(dim, 64, 12.0)
    f = random_smooth(g, 3)
    back = inverse(forward(f))
    assert back.is_real
    assert rel_err(back, f) < 1e-14


def test_transform_convention_matches_gaussian_transform():
    # hat of exp(-x^2/2) is sqrt(2 pi) exp(-xi^2/2)
    g = make_grid(1, 256, 40.0)
    f = sample(g, Gaussian(g.center, 1.0))
    coeffs = forward(f).coeffs * np.exp(1j * g.xi[..., 0] * g.center[0])
    want = math.sqrt(2 * math.pi) * np.exp(-g.xi[..., 0] ** 2 / 2)
    assert np.max(np.abs(coeffs - want)) < 1e-12


def test_plane_wave_sits_on_one_mode():
    g = make_grid(1, 64, 2 * math.pi)
    f = sample(g, PlaneWave((5.0,)))
    c = forward(f).coeffs
    assert np.argmax(np.abs(c)) == 5
    assert math.isclose(abs(c[5]), g.boxlen)
    assert np.sum(np.abs(c) > 1e-9) == 1


def test_constant_sample_is_real():
    g = make_grid(1, 8, 1.0)
    f = sample(g, Constant(3.0))
    assert f.is_real and np.all(f.values == 3.0)


@given(st.integers(0, 2**16), st.integers(0, 2**16))
def test_product_matches_pointwise_for_resolved_fields(s1, s2):
    g = make_grid(1, 512, 40.0)
    f, h = random_smooth(g, s1), random_smooth(g, s2)
    # random_smooth content is far below n/4, so dealiasing changes nothing
    assert rel_err(product(f, h), f * h) < 1e-12


def test_product_removes_aliasing():
    g = make_grid(1, 32, 2 * math.pi)
    x = g.x[..., 0]
    f = Field(g, np.cos(12 * x))
    # cos(12x)^2 = 1/2 + cos(24x)/2; mode 24 is beyond the grid and must not fold back
    p = product(f, f)
    assert np.allclose(p.values, 0.5, atol=1e-14)
    assert np.abs(((f * f).values - 0.5)).max() > 0.1


def test_product_of_real_fields_is_real_and_commutes(pair1):
    f, h = pair1
    p = product(f, h)
    assert p.is_real
    assert rel_err(product(h, f), p) < 1e-15


def test_complex_product_agrees_with_real_path(pair1):
    f, h = pair1
    fc = Field(f.grid, f.values.astype(complex))
    assert rel_err(product(fc, h).values.real, product(f, h)) < 1e-13


def test_nyquist_free_zeroes_every_nyquist_line():
    c = np.ones((8, 8))
    out = nyquist_free(c)
    assert np.all(out[4, :] == 0) and np.all(out[:, 4] == 0)
    assert out.sum() == 49


def test_synthesize_keeps_real_spectrum_hermitian():
    g = make_grid(1, 16, 1.0)
    rng = np.random.default_rng(0)
    c = rng.normal(size=16) + 1j * rng.normal(size=16)
    f = synthesize(g, c, real=True)
    assert f.is_real
    assert np.allclose(f.spectrum, np.fft.fftn(f.values) * g.cell_volume)
    assert not f.spectrum.flags.writeable


def test_spectrum_cache_survives_linear_ops(pair1):
    f, h = (with_spectrum(x) for x in pair1)
    s = 2.0 * (f + h) - h
    assert s.spectrum is not None
    assert np.allclose(s.spectrum, np.fft.fftn(s.values) * s.grid.cell_volume)
    assert pointwise("mul", f, h).spectrum is None


def test_pointwise_rejects_unknown_op(pair1):
    with pytest.raises(ValueError):
        pointwise("div", *pair1)
    with pytest.raises(ValueError):
        pointwise("add", pair1[0])


def test_inverse_respects_hermitian_flag(grid1):
    spec = Spectrum(grid1, np.ones(grid1.shape, complex), hermitian=False)
    assert not inverse(spec).is_real


def test_random_smooth_is_deterministic_and_mean_free(grid2):
    a, b = random_smooth(grid2, 7), random_smooth(grid2, 7)
    assert np.array_equal(a.values, b.values)
    assert abs(a.values.mean()) < 1e-14
    assert not np.array_equal(a.values, random_smooth(grid2, 8).values)


def test_gaussian_wrap_error_reported():
    g = make_grid(1, 64, 4.0)
    assert sample(g, Gaussian(g.center, 2.0)).meta["wrap_error"] > 1e-3
    assert sample(g, Gaussian(g.center, 0.2)).meta["wrap_error"] < 1e-12


def test_rel_err_scale_floor():
    assert rel_err(np.ones(4), np.zeros(4)) == 2.0
    assert rel_err(np.ones(4), np.zeros(4), scale=4.0) == 0.5


@pytest.mark.parametrize("env,want", [(None, 1), ("3", 3), ("0", 1), ("x", 1)])
def test_worker_count(monkeypatch, env, want):
    if env is None:
        monkeypatch.delenv("FRAC_THREADS", raising=False)
    else:
        monkeypatch.setenv("FRAC_THREADS", env)
    assert worker_count() == want
