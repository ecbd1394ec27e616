"""Spherical functions, Plancherel density, transform and its inverse."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from drkernels.geometry import (Decay, RadialFunction, lq_norm_left,
                                space_params)
from drkernels.kernels import kernel_as_radial, kernel_grid
from drkernels.quadrature import NonConvergenceError
from drkernels.spherical import (build_grid, c_function, calibrate,
                                 density_values, inverse_spherical, phi,
                                 plancherel_density, spherical_transform)

RH3 = space_params(2, 0)
HEIS = space_params(2, 1)
DR42 = space_params(4, 2)
QUAT = space_params(4, 3)
ALL = [RH3, HEIS, DR42, QUAT]
IDS = ["RH3", "HEIS", "DR42", "QUAT"]


def test_phi_is_one_at_origin():
    for p in (RH3, HEIS):
        for s in (0.3, 2.0, 6.0):
            sol = phi(p, s, 1e-3)
            assert abs(sol.samples[0] - 1.0) < 1e-5


def test_phi_rh3_closed_form():
    r = np.linspace(0.1, 20.0, 200)
    for s in (0.7, 2.2, 5.0):
        sol = phi(RH3, s, r)
        want = np.sin(s * r) / (2.0 * s * np.sinh(0.5 * r))
        assert np.max(np.abs(sol.samples - want)) < 1e-9


def test_phi_bounded_by_one():
    # positive-definite for real s, so |phi_s| <= phi_s(0) = 1
    r = np.linspace(0.2, 15.0, 60)
    sol = phi(HEIS, 1.5, r)
    assert np.all(np.abs(sol.samples) <= 1.0 + 1e-12)
    assert np.max(np.abs(sol.samples.imag)) < 1e-12


def test_phi_zero_mode_linear_growth():
    # u0 = phi_0 e^{Qr/2} settles onto a + b r far out
    r = np.array([15.0, 20.0, 30.0])
    sol = phi(HEIS, 0.0, r)
    u = sol.samples * np.exp(0.5 * HEIS.Q * r)
    ratio = u / (1.0 + r)
    assert np.all(ratio > 0.05) and np.all(ratio < 20.0)
    assert abs(ratio[2] / ratio[1] - 1.0) < 0.1


def test_density_rh3_quadratic():
    s = np.linspace(0.5, 5.0, 10)
    dens = density_values(RH3, s)
    assert np.allclose(dens, 4.0 * s * s, rtol=1e-8)
    # small-s branch continues the same law
    assert plancherel_density(RH3, 0.01) == pytest.approx(4e-4, rel=1e-6)


def test_density_small_s_branch_continuous():
    for p in (HEIS, DR42):
        below = plancherel_density(p, 0.02 * (1.0 - 1e-7))
        above = plancherel_density(p, 0.02 * (1.0 + 1e-7))
        assert abs(below - above) < 1e-5 * above


def test_density_rejects_negative():
    with pytest.raises(ValueError):
        plancherel_density(HEIS, -0.1)


def test_c_function_conjugate_pair():
    est = c_function(HEIS, 1.3)
    assert est.residual < 1e-9
    assert abs(est.c_minus - est.c_plus.conjugate()) < 1e-8 * abs(est.c_plus)
    assert est.plancherel_density == pytest.approx(1.0 / abs(est.c_plus) ** 2)


@pytest.mark.parametrize("p", ALL, ids=IDS)
def test_calibration_constant_pattern(p):
    # the pinned inversion constant lands on 2^{k-1} / pi
    cal = calibrate(p)
    want = 2.0 ** (p.k - 1) / math.pi
    assert abs(cal.c_S - want) < 1e-8 * want
    assert cal.reference_error < 1e-5


def test_calibration_reference_radius_stability():
    a = calibrate(HEIS)
    b = calibrate(HEIS, r_ref=1.3)
    assert abs(a.c_S - b.c_S) < 1e-6 * a.c_S


def test_transform_gaussian_multiplier():
    q2 = 0.25 * HEIS.Q ** 2
    f = kernel_as_radial(HEIS, 1.0, tol=1e-12)
    s = np.array([0.5, 1.0, 2.0, 4.0])
    vals, errs = spherical_transform(HEIS, f, s)
    want = np.exp(-q2 - s * s)
    assert np.max(np.abs(vals - want) / want) < 1e-6
    assert np.all(errs < 1e-8)


def test_transform_scalar_in_scalar_out():
    f = kernel_as_radial(RH3, 1.0)
    out = spherical_transform(RH3, f, 1.5)
    assert isinstance(out[0], complex) and isinstance(out[1], float)
    vals, errs = spherical_transform(RH3, f, np.array([1.5]))
    assert vals.shape == (1,) and errs.shape == (1,)
    assert abs(out[0] - vals[0]) < 1e-14


def test_transform_rejects_negative_s():
    f = kernel_as_radial(RH3, 1.0)
    with pytest.raises(ValueError):
        spherical_transform(RH3, f, np.array([-0.5, 1.0]))


def test_transform_linearity():
    f = kernel_as_radial(RH3, 1.0)
    g = RadialFunction(lambda r: 2.5 * f.evaluator(r), f.decay,
                       scaled_evaluator=lambda r: 2.5 * f.scaled_evaluator(r))
    grid = build_grid(RH3, f.decay, 4.0)
    s = np.array([0.7, 3.1])
    a, _ = spherical_transform(RH3, f, s, grid=grid)
    b, _ = spherical_transform(RH3, g, s, grid=grid)
    assert np.allclose(b, 2.5 * a, rtol=1e-13)


def test_grid_modes():
    decaying = build_grid(HEIS, Decay(exp_rate=2.0, gauss_rate=0.25), 4.0)
    assert decaying.mode == "decaying" and len(decaying.eta) == 0
    fresnel = build_grid(HEIS, Decay(exp_rate=0.5 * HEIS.Q, gauss_rate=0.0,
                                     phase_rate=0.25), 4.0)
    assert fresnel.mode == "regularized" and len(fresnel.eta) > 0
    with pytest.raises(NonConvergenceError):
        build_grid(HEIS, Decay(exp_rate=0.5 * HEIS.Q), 4.0)


@pytest.mark.parametrize("p", [RH3, HEIS], ids=["RH3", "HEIS"])
def test_plancherel_identity(p):
    # int |h_1|^2 A dr = c_S int |H h_1|^2 dens ds
    f = kernel_as_radial(p, 1.0, tol=1e-12)
    lhs = lq_norm_left(p, f, 2, tol=1e-10) ** 2
    q2 = 0.25 * p.Q ** 2
    cal = calibrate(p)
    rhs, _ = quad(lambda s: plancherel_density(p, s)
                  * math.exp(-2.0 * (q2 + s * s)), 0.0, 7.0, limit=200)
    assert abs(cal.c_S * rhs - lhs) < 1e-6 * lhs


def test_inverse_round_trip():
    tau = 0.8
    r = np.array([0.5, 2.0, 5.0])
    for p in (RH3, HEIS):
        q2 = 0.25 * p.Q ** 2
        cal = calibrate(p)
        got = inverse_spherical(p, cal,
                                lambda s: np.exp(-q2 * tau - tau * s * s), r)
        want, _ = kernel_grid(p, tau, r, tol=1e-12)
        assert np.max(np.abs(got - want) / np.abs(want)) < 1e-6


def test_inverse_linearity_and_scalar():
    cal = calibrate(RH3)

    def m(s):
        return np.exp(-0.25 - s * s)

    one = inverse_spherical(RH3, cal, m, 2.0, s_max=8.0)
    assert isinstance(one, complex)
    doubled = inverse_spherical(RH3, cal, lambda s: 2.0 * m(s),
                                np.array([2.0]), s_max=8.0)
    assert abs(doubled[0] - 2.0 * one) < 1e-13 * abs(one)


def test_ode_cache_distinguishes_overlapping_grids():
    # two equal-length grids sharing endpoints and the 1/3 and 2/3
    # entries must not alias in the solver cache; a sampled key
    # collides here and returns phi values for the wrong radii
    base = np.linspace(0.5, 6.0, 13)
    other = base.copy()
    other[1] = 0.77
    sol_a = phi(HEIS, 1.3, base)
    sol_b = phi(HEIS, 1.3, other)
    ref = phi(HEIS, 1.3, np.array([0.77]))
    assert sol_b.samples[1] == pytest.approx(ref.samples[0], rel=1e-10)
    assert abs(sol_a.samples[1] - sol_b.samples[1]) > 1e-4
