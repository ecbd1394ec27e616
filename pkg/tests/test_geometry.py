"""Radial geometry: volume density, group law, distance, weighted norms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drkernels.geometry import (Decay, GroupPoint, HTypeInstance,
                                RadialFunction, density_A, distance,
                                distance_to_identity, group_inverse,
                                group_product, log_density_derivative,
                                lq_norm_left, space_params, volume_V)
from drkernels.quadrature import NonConvergenceError


def test_space_params_basic():
    p = space_params(2, 1)
    assert (p.m, p.k) == (2, 1)
    assert p.Q == 2
    assert p.n == 4


def test_space_params_all_test_spaces():
    # (m, k) -> (Q, n)
    table = {(2, 0): (1, 3), (2, 1): (2, 4), (4, 2): (4, 7), (4, 3): (5, 8)}
    for (m, k), (q, n) in table.items():
        p = space_params(m, k)
        assert p.Q == q and p.n == n


def test_space_params_rejects_odd_m():
    with pytest.raises(ValueError):
        space_params(3, 1)
    with pytest.raises(ValueError):
        space_params(-2, 0)
    with pytest.raises(ValueError):
        space_params(2, -1)


def test_density_rh3_closed_form():
    p = space_params(2, 0)
    assert density_A(p, 2.0) == pytest.approx(4.0 * math.sinh(1.0) ** 2,
                                              rel=1e-15)
    r = np.linspace(0.3, 12.0, 50)
    assert np.allclose(density_A(p, r), 4.0 * np.sinh(0.5 * r) ** 2,
                       rtol=1e-14)


def test_density_general_product_form():
    r = np.linspace(0.2, 10.0, 40)
    for m, k in ((2, 1), (4, 2), (4, 3)):
        p = space_params(m, k)
        want = (2.0 * np.sinh(0.5 * r)) ** (m + k) * np.cosh(0.5 * r) ** k
        assert np.allclose(density_A(p, r), want, rtol=1e-13)


def test_density_growth_rate_is_Q():
    # A(r) ~ e^{Qr} up to constants; check the log-slope far out
    for m, k in ((2, 0), (2, 1), (4, 3)):
        p = space_params(m, k)
        slope = (math.log(density_A(p, 31.0)) -
                 math.log(density_A(p, 30.0)))
        assert slope == pytest.approx(p.Q, abs=1e-8)


def test_log_density_derivative_matches_fd():
    r = np.linspace(0.4, 8.0, 23)
    h = 1e-6
    for m, k in ((2, 0), (4, 3)):
        p = space_params(m, k)
        fd = (np.log(density_A(p, r + h)) - np.log(density_A(p, r - h))) / (2 * h)
        assert np.allclose(log_density_derivative(p, r), fd, atol=5e-9)


def test_volume_matches_density_integral():
    from scipy.integrate import quad
    p = space_params(2, 1)
    for r in (0.5, 2.0, 6.0):
        direct, _ = quad(lambda x: density_A(p, x), 0.0, r, limit=200)
        assert volume_V(p, r) == pytest.approx(direct, rel=1e-9)


def test_distance_pure_center_slice():
    p = space_params(2, 1)
    for a in (0.1, 0.5, 2.0, 7.0):
        g = GroupPoint(np.zeros(2), np.zeros(1), a)
        assert distance_to_identity(p, g) == pytest.approx(
            abs(math.log(a)), rel=1e-12, abs=1e-12)


def test_distance_first_layer_frozen():
    # |X|^2 = 8, Z = 0, a = 1: cosh(d/2) = 1 + |X|^2/8 = 2
    p = space_params(2, 1)
    g = GroupPoint(np.array([2.0 * math.sqrt(2.0), 0.0]), np.zeros(1), 1.0)
    assert distance_to_identity(p, g) == pytest.approx(
        2.0 * math.acosh(2.0), rel=1e-12)


def test_distance_identity_is_zero():
    p = space_params(4, 2)
    e = GroupPoint(np.zeros(4), np.zeros(2), 1.0)
    assert distance_to_identity(p, e) == 0.0


_coords = st.floats(min_value=-3.0, max_value=3.0,
                    allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(x=st.lists(_coords, min_size=2, max_size=2),
       z=_coords, a=st.floats(min_value=0.05, max_value=5.0))
def test_group_axioms_heis(x, z, a):
    inst = HTypeInstance.heisenberg(1)
    g = GroupPoint(np.array(x), np.array([z]), a)
    ge = group_product(inst, g, inst.identity())
    assert np.allclose(ge.X, g.X) and np.allclose(ge.Z, g.Z)
    assert ge.a == pytest.approx(g.a, rel=1e-12)
    prod = group_product(inst, g, group_inverse(inst, g))
    assert np.allclose(prod.X, 0.0, atol=1e-12)
    assert np.allclose(prod.Z, 0.0, atol=1e-12)
    assert prod.a == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(x=st.lists(_coords, min_size=2, max_size=2),
       y=st.lists(_coords, min_size=2, max_size=2),
       w=st.lists(_coords, min_size=2, max_size=2),
       a=st.floats(min_value=0.2, max_value=4.0),
       b=st.floats(min_value=0.2, max_value=4.0))
def test_group_associativity_heis(x, y, w, a, b):
    inst = HTypeInstance.heisenberg(1)
    g1 = GroupPoint(np.array(x), np.zeros(1), a)
    g2 = GroupPoint(np.array(y), np.array([0.3]), b)
    g3 = GroupPoint(np.array(w), np.array([-0.7]), 1.3)
    left = group_product(inst, group_product(inst, g1, g2), g3)
    right = group_product(inst, g1, group_product(inst, g2, g3))
    assert np.allclose(left.X, right.X, atol=1e-10)
    assert np.allclose(left.Z, right.Z, atol=1e-10)
    assert left.a == pytest.approx(right.a, rel=1e-12)


def test_distance_symmetric_under_inverse():
    inst = HTypeInstance.heisenberg(1)
    g = GroupPoint(np.array([0.8, -1.1]), np.array([0.4]), 1.7)
    h = GroupPoint(np.array([-0.2, 0.5]), np.array([-1.0]), 0.6)
    assert distance(inst, g, h) == pytest.approx(distance(inst, h, g),
                                                 rel=1e-12)
    gi = group_inverse(inst, g)
    assert distance_to_identity(inst.params, g) == pytest.approx(
        distance_to_identity(inst.params, gi), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(x=st.lists(_coords, min_size=4, max_size=4),
       z=st.lists(_coords, min_size=3, max_size=3))
def test_j_map_h_type(x, z):
    # Kaplan's condition: J_Z X orthogonal to X and |J_Z X| = |Z| |X|
    inst = HTypeInstance.quaternionic(1)
    X = np.array(x)
    Z = np.array(z)
    JX = inst.j_map(Z) @ X
    assert abs(float(JX @ X)) <= 1e-10 * max(1.0, float(X @ X))
    zn2 = float(Z @ Z)
    assert float(JX @ JX) == pytest.approx(zn2 * float(X @ X),
                                           rel=1e-10, abs=1e-12)


def test_lq_norm_left_exponential_oracle():
    # f = e^{-2Qr} on RH3, q = 1: the weighted integral collapses to
    # int_0^inf e^{-2r} 4 sinh^2(r/2) e^{r} ... = 1/3 exactly
    p = space_params(2, 0)
    f = RadialFunction(lambda r: np.exp(-2.0 * p.Q * np.asarray(r)) + 0j,
                       Decay(2.0 * p.Q))
    val = lq_norm_left(p, f, 1.0, tol=1e-12)
    assert val == pytest.approx(1.0 / 3.0, rel=1e-10)


def test_lq_norm_left_backends_agree():
    p = space_params(2, 1)
    f = RadialFunction(lambda r: np.exp(-1.5 * p.Q * np.asarray(r)) + 0j,
                       Decay(1.5 * p.Q))
    a = lq_norm_left(p, f, 2.0, backend="panels")
    b = lq_norm_left(p, f, 2.0, backend="quadpack")
    assert a == pytest.approx(b, rel=1e-8)


def test_lq_norm_left_divergence_raises():
    # e^{-Qr/2} against the e^{Qr} volume growth: q = 1 diverges
    p = space_params(2, 0)
    f = RadialFunction(lambda r: np.exp(-0.5 * p.Q * np.asarray(r)) + 0j,
                       Decay(0.5 * p.Q))
    with pytest.raises(NonConvergenceError):
        lq_norm_left(p, f, 1.0)


def test_lq_norm_homogeneous_in_scaling():
    p = space_params(2, 0)

    def make(lam):
        return RadialFunction(
            lambda r: lam * np.exp(-2.0 * p.Q * np.asarray(r)) + 0j,
            Decay(2.0 * p.Q))

    base = lq_norm_left(p, make(1.0), 2.0)
    scaled = lq_norm_left(p, make(-3.5), 2.0)
    assert scaled == pytest.approx(3.5 * base, rel=1e-11)
