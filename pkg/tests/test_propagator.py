"""Admissible pairs, functional calculus and Schrodinger evolution."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drkernels.geometry import Decay, RadialFunction, lq_norm_left, space_params
from drkernels.propagator import (AdmissiblePair, EvolutionRecord, Multiplier,
                                  apply_multiplier, distinguished_slice,
                                  evolve_distinguished, evolve_schrodinger,
                                  inhomogeneous_solution, is_admissible,
                                  strichartz_window_norm)

RH3 = space_params(2, 0)
HEIS = space_params(2, 1)


def _gaussian(sigma=1.0):
    rate = 0.5 / (sigma * sigma)
    Q = RH3.Q

    def plain(r):
        rr = np.asarray(r, dtype=float)
        return np.exp(-rate * rr * rr)

    def scaled(r):
        rr = np.asarray(r, dtype=float)
        return np.exp(0.5 * Q * rr - rate * rr * rr)

    return RadialFunction(plain, Decay(0.0, rate), 0.0,
                          scaled_evaluator=scaled)


def test_admissible_examples():
    # n = 4: the line 2/p + 4/q = 2 bounds the region
    assert is_admissible(HEIS, AdmissiblePair(2, 4))
    assert is_admissible(HEIS, AdmissiblePair(math.inf, 2))
    assert not is_admissible(HEIS, AdmissiblePair(2, 5))
    assert not is_admissible(HEIS, AdmissiblePair(4, 4))
    assert not is_admissible(HEIS, AdmissiblePair(math.inf, 4))
    assert not is_admissible(HEIS, AdmissiblePair(2, math.inf))
    assert not is_admissible(HEIS, AdmissiblePair(1, 4))


def test_admissible_exact_boundary():
    # p = 8/3 puts the scaling line at 1/q = 5/16 exactly
    onthe = AdmissiblePair(Fraction(8, 3), Fraction(16, 5))
    assert is_admissible(HEIS, onthe)
    below = AdmissiblePair(Fraction(8, 3), Fraction(16, 5) + Fraction(1, 500))
    assert not is_admissible(HEIS, below)


@given(xb=st.integers(3, 40), xa=st.integers(1, 20),
       yb=st.integers(3, 40), ya=st.integers(1, 19))
@settings(max_examples=80, deadline=None)
def test_admissible_matches_defining_inequality(xb, xa, yb, ya):
    x = Fraction(min(xa, xb), xb)
    y = Fraction(ya, yb)
    if not (0 < x <= Fraction(1, 2) and 0 < y < Fraction(1, 2)):
        return
    pair = AdmissiblePair(1 / x, 1 / y)
    want = 2 * x + HEIS.n * y >= Fraction(HEIS.n, 2)
    assert is_admissible(HEIS, pair) == want


def test_multiplier_bounded_check():
    Multiplier(lambda s: np.ones_like(s)).check_bounded()
    with pytest.raises(ValueError):
        Multiplier(lambda s: 1e9 * s).check_bounded()


@pytest.fixture(scope="module")
def rh3_record():
    f = _gaussian()
    t = np.linspace(-2.0, 2.0, 17)
    return f, evolve_schrodinger(RH3, f, t, r_max=40.0, s_max=8.0)


def test_record_shapes_and_conservation(rh3_record):
    f, rec = rh3_record
    assert isinstance(rec, EvolutionRecord)
    assert rec.u.shape == (rec.t.size, rec.r.size)
    assert rec.l2_drift < 1e-6
    want = lq_norm_left(RH3, f, 2, tol=1e-10)
    assert abs(rec.l2[8] - want) < 1e-6 * want


def test_zero_time_round_trip(rh3_record):
    f, rec = rh3_record
    assert rec.t[8] == 0.0
    mask = (rec.r > 0.5) & (rec.r < 3.0)
    got = rec.u[8][mask]
    want = f(rec.r[mask])
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-6


def test_time_reversal_is_conjugation(rh3_record):
    # real data, real spectrum: u(-t) = conj u(t) slice by slice
    _, rec = rh3_record
    scale = float(np.max(np.abs(rec.u)))
    for i in range(rec.t.size):
        j = rec.t.size - 1 - i
        assert np.max(np.abs(np.conj(rec.u[j]) - rec.u[i])) < 1e-12 * scale


def test_strichartz_window_additivity(rh3_record):
    _, rec = rh3_record
    pair = AdmissiblePair(2, 4)
    full = strichartz_window_norm(rec, pair, (0.0, 2.0))
    a = strichartz_window_norm(rec, pair, (0.0, 1.0))
    b = strichartz_window_norm(rec, pair, (1.0, 2.0))
    assert abs(full ** 2 - (a ** 2 + b ** 2)) < 1e-12 * full ** 2
    assert a <= full and b <= full


def test_strichartz_sup_window(rh3_record):
    _, rec = rh3_record
    pair = AdmissiblePair(math.inf, 2)
    got = strichartz_window_norm(rec, pair, (0.0, 2.0))
    want = max(rec.spatial_norm(i, 2) for i in range(8, 17))
    assert got == pytest.approx(want, rel=1e-12)


def test_strichartz_window_off_grid_raises(rh3_record):
    _, rec = rh3_record
    pair = AdmissiblePair(2, 4)
    with pytest.raises(ValueError):
        strichartz_window_norm(rec, pair, (0.0, 0.93))
    with pytest.raises(ValueError):
        strichartz_window_norm(rec, pair, (1.0, 2.5))


def test_spatial_norm_sup(rh3_record):
    _, rec = rh3_record
    assert rec.spatial_norm(8, math.inf) == pytest.approx(
        float(np.max(np.abs(rec.u[8]))))


def test_apply_multiplier_identity():
    f = _gaussian()
    g = apply_multiplier(RH3, lambda s: np.ones_like(s), f, s_max=8.0)
    r = np.array([0.5, 1.0, 2.0])
    got = g(r)
    want = f(r)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-6
    # scaled evaluator carries exactly the e^{Qr/2} weight
    assert np.allclose(g.scaled_evaluator(r),
                       got * np.exp(0.5 * RH3.Q * r), rtol=1e-12)


def test_distinguished_twist():
    f = _gaussian()
    rec = evolve_distinguished(RH3, f, np.array([0.0, 0.5]),
                               r_max=30.0, s_max=8.0)
    assert rec.twisted and rec.initial == "twisted core"
    a = math.exp(-2.0)
    lo, hi = distinguished_slice(rec, 1, np.array([a, 1.0 / a]))
    # same core radius, modular weight a^{-Q/2} on each side
    assert abs(lo / hi) == pytest.approx(a ** (-RH3.Q), rel=1e-10)
    with pytest.raises(ValueError):
        distinguished_slice(rec, 1, np.array([-0.5]))
    with pytest.raises(ValueError):
        distinguished_slice(rec, 1, np.array([math.exp(-50.0)]))


def test_inhomogeneous_zero_forcing_is_free():
    f = _gaussian()
    zero = RadialFunction(lambda r: np.zeros_like(np.asarray(r, float)),
                          f.decay, 0.0,
                          scaled_evaluator=lambda r:
                          np.zeros_like(np.asarray(r, float)))
    t = np.array([0.0, 0.5, 1.0])
    free = evolve_schrodinger(RH3, f, t, r_max=30.0, s_max=6.0)
    rec = inhomogeneous_solution(RH3, f, zero, t, r_max=30.0, s_max=6.0)
    scale = float(np.max(np.abs(free.u)))
    assert np.max(np.abs(rec.u - free.u)) < 1e-10 * scale


def test_inhomogeneous_constant_forcing_closed_form():
    # constant F: spectral solution is hF (1 - e^{-it omega}) / (i omega)
    g = _gaussian()
    t = np.array([0.0, 1.0])
    rec = inhomogeneous_solution(RH3, None, g, t, r_max=40.0, s_max=8.0,
                                 tol=1e-4)
    assert float(np.max(np.abs(rec.u[0]))) < 1e-8 * float(
        np.max(np.abs(rec.u[1])))

    def m(s):
        om = s * s + 0.25 * RH3.Q ** 2
        return (1.0 - np.exp(-1j * om)) / (1j * om)

    want_f = apply_multiplier(RH3, m, g, s_max=8.0)
    r = np.array([0.5, 1.0, 2.0])
    want = want_f(r)
    got_re = np.interp(r, rec.r, rec.u[1].real)
    got_im = np.interp(r, rec.r, rec.u[1].imag)
    got = got_re + 1j * got_im
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-3
