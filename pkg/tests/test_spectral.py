"""Fourier-side building blocks against closed-form identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benlab.spectral import (
    Field,
    dealias,
    derivative,
    fractional_derivative,
    hilbert,
    inner,
    integrate,
    make_grid,
    norm,
    shift,
)

GRID = make_grid(256, 2 * np.pi * 8)


def band_limited(grid, seed, kmax=None):
    """Random real field supported on modes 1..kmax."""
    rng = np.random.default_rng(seed)
    kmax = grid.n // 8 if kmax is None else kmax
    hat = np.zeros(grid.n // 2 + 1, complex)
    hat[1:kmax] = rng.standard_normal(kmax - 1) + 1j * rng.standard_normal(kmax - 1)
    return Field.from_hat(grid, hat)


def test_make_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        make_grid(300, 10.0)
    with pytest.raises(ValueError):
        make_grid(8, 10.0)
    with pytest.raises(ValueError):
        make_grid(256, -1.0)


def test_grid_layout():
    g = make_grid(64, 2 * np.pi)
    # rfft wavenumbers 0, 1, ..., n/2 for a 2*pi box
    assert np.allclose(g.xi, np.arange(33))
    assert g.dx == pytest.approx(2 * np.pi / 64)
    assert g.x[0] == pytest.approx(-np.pi)


def test_hilbert_of_cosine_is_minus_sine():
    u = Field(GRID, np.cos(GRID.x))
    hu = hilbert(u)
    assert np.max(np.abs(hu.values + np.sin(GRID.x))) < 1e-12


def test_hilbert_squares_to_minus_identity_mod_mean():
    u = band_limited(GRID, 0)
    hhu = hilbert(hilbert(u))
    mean = integrate(u.values, GRID) / GRID.L
    assert np.max(np.abs(hhu.values + (u.values - mean))) < 1e-12 * norm(u, "linf")


def test_hilbert_dx_identity():
    # H u_x = -|xi| u, i.e. minus the first fractional derivative
    u = band_limited(GRID, 1)
    lhs = hilbert(derivative(u, 1))
    rhs = fractional_derivative(u, 1.0)
    assert np.max(np.abs(lhs.values + rhs.values)) < 1e-12 * norm(rhs, "linf")


def test_parseval():
    u = band_limited(GRID, 2)
    direct = np.sqrt(integrate(u.values**2, GRID))
    assert abs(norm(u, "l2") - direct) < 1e-12 * direct


def test_derivative_of_sine():
    u = Field(GRID, np.sin(2 * GRID.x))
    du = derivative(u, 1)
    assert np.max(np.abs(du.values - 2 * np.cos(2 * GRID.x))) < 1e-11


def test_second_derivative_matches_twice_first():
    u = band_limited(GRID, 3)
    d2 = derivative(u, 2)
    d11 = derivative(derivative(u, 1), 1)
    assert np.max(np.abs(d2.values - d11.values)) < 1e-10 * norm(d2, "linf")


def test_shift_closed_form():
    u = Field(GRID, np.sin(GRID.x))
    s = 0.7
    v = shift(u, s)
    assert np.max(np.abs(v.values - np.sin(GRID.x + s))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(-10, 10, allow_nan=False),
    b=st.floats(-10, 10, allow_nan=False),
    seed=st.integers(0, 100),
)
def test_shift_composes(a, b, seed):
    u = band_limited(GRID, seed)
    lhs = shift(u, a + b)
    rhs = shift(shift(u, a), b)
    scale = max(norm(u, "linf"), 1e-30)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10 * scale


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100))
def test_dealias_is_idempotent(seed):
    u = band_limited(GRID, seed, kmax=GRID.n // 2)
    once = dealias(u)
    twice = dealias(once)
    assert np.max(np.abs(once.values - twice.values)) < 1e-13 * max(
        norm(u, "linf"), 1e-30
    )


def test_dealias_kills_high_modes():
    hat = np.zeros(GRID.n // 2 + 1, complex)
    hat[GRID.n // 3 + 2] = 1.0
    u = dealias(Field.from_hat(GRID, hat))
    assert norm(u, "linf") < 1e-14


def test_inner_is_symmetric_and_positive():
    u = band_limited(GRID, 4)
    v = band_limited(GRID, 5)
    assert inner(u, v) == pytest.approx(inner(v, u), rel=1e-13)
    assert inner(u, u) > 0
    assert inner(u, u) == pytest.approx(norm(u, "l2") ** 2, rel=1e-12)


def test_h1_norm_decomposition():
    u = band_limited(GRID, 6)
    ux = derivative(u, 1)
    expected = np.sqrt(norm(u, "l2") ** 2 + norm(ux, "l2") ** 2)
    assert norm(u, "h1") == pytest.approx(expected, rel=1e-12)


def test_hhalf_seminorm_matches_half_derivative():
    u = band_limited(GRID, 7)
    half = norm(fractional_derivative(u, 0.5), "l2")
    assert norm(u, "hhalf") == pytest.approx(half, rel=1e-12)


def test_restricted_sup_norm():
    vals = np.where(np.abs(GRID.x) < 10, 1.0, 0.0)
    u = Field(GRID, vals)
    assert norm(u, "linf-restricted", interval=(20, GRID.L / 2)) == 0.0
    assert norm(u, "linf-restricted", interval=(0, 5)) == 1.0
    with pytest.raises(ValueError):
        norm(u, "linf-restricted")
    with pytest.raises(ValueError):
        norm(u, "linf-restricted", interval=(-GRID.L, GRID.L))


def test_from_hat_roundtrip():
    u = band_limited(GRID, 8)
    v = Field.from_hat(GRID, u.hat)
    assert np.max(np.abs(u.values - v.values)) < 1e-13 * norm(u, "linf")


def test_field_arithmetic():
    u = band_limited(GRID, 9)
    v = band_limited(GRID, 10)
    w = u + v - u
    assert np.max(np.abs(w.values - v.values)) < 1e-14 * max(norm(v, "linf"), 1)
    assert np.max(np.abs((u * 2.0).values - 2 * u.values)) == 0.0
    assert np.max(np.abs((-u).values + u.values)) == 0.0


def test_grid_mismatch_rejected():
    other = make_grid(128, GRID.L)
    u = band_limited(GRID, 11)
    v = band_limited(other, 11)
    with pytest.raises(ValueError):
        _ = u + v
