"""Acceptance gate: every headline quantitative claim at desk scale.

Each criterion prints one PASS/FAIL line with its measured figure
against the pinned tolerance.  run() is the single source of truth for
"green": the CLI `acceptance` subcommand and the test suite both call
it.  A space restriction narrows the space-parameterised criteria;
criteria pinned to specific spaces (the RH3 closed forms, the n = 4
Strichartz pairs, ...) keep their pinned set when the restriction does
not intersect it.

Grid and window choices below are deliberate and documented inline:
they are the coarsest settings at which every measured figure sits well
inside its tolerance, so the whole gate stays a desk-scale run.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import Decay, RadialFunction, space_params
from .kernels import (heat_residual, kernel_as_radial, kernel_grid,
                      sigma_on_slice)

_SPACES = ((2, 0), (2, 1), (4, 2), (4, 3))
_NAME = {(2, 0): "RH3", (2, 1): "HEIS", (4, 2): "DR42", (4, 3): "QUAT"}

_T_LARGE = (20.0, 2000.0)   # past the transition region, empirically clean
_PPD = 5.0                  # decay-fit sample density, points per decade


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    summary: str
    seconds: float = 0.0


def _pick(pinned, spaces):
    """Restriction of a pinned space set, falling back to the pinned set."""
    chosen = tuple(s for s in pinned if s in spaces)
    return chosen or tuple(pinned)


def _names(spaces):
    return " ".join(_NAME.get(s, f"({s[0]},{s[1]})") for s in spaces)


def _gaussian_data(p, sigma):
    rate = 1.0 / (2.0 * sigma * sigma)
    q_half = 0.5 * p.Q

    def ev(r):
        return np.exp(-rate * np.asarray(r, dtype=float) ** 2) + 0j

    def ev_scaled(r):
        r = np.asarray(r, dtype=float)
        return np.exp(q_half * r - rate * r ** 2) + 0j

    return RadialFunction(ev, Decay(0.0, rate), 0.0, ev_scaled)


# ---------------------------------------------------------------------------
# criteria

def _c1_transform_identity(spaces):
    """max_s,tau |Hh_tau(s) - e^{-Q^2 tau/4} e^{-tau s^2}| <= 1e-4."""
    from .spherical import spherical_transform

    tol = 1e-4
    s = np.linspace(0.1, 8.0, 33)
    taus = (0.25, 1.0, 4.0, 0.5 + 0.5j, 0.7j)
    worst = 0.0
    worst_at = ""
    for mk in spaces:
        p = space_params(*mk)
        for tau in taus:
            h = kernel_as_radial(p, tau, tol=1e-12)
            measured, _ = spherical_transform(p, h, s)
            target = np.exp(-p.Q ** 2 * tau / 4.0) * np.exp(-tau * s * s)
            # the relative error is floored where e^{-tau s^2} underflows
            # (tau = 4, s = 8 is ~ e^{-256}); everything meaningful sits
            # far above the floor
            denom = abs(np.exp(-p.Q ** 2 * tau / 4.0)) * np.maximum(
                np.abs(np.exp(-tau * s * s)), 1e-6)
            rel = float(np.max(np.abs(measured - target) / denom))
            if rel > worst:
                worst, worst_at = rel, f"{_NAME[mk]} tau={tau}"
    return worst <= tol, (f"max rel err {worst:.2e} <= {tol:.0e} "
                          f"({worst_at}; {_names(spaces)})")


def _c2_rh3_closed_forms(_spaces):
    """RH3: phi_s vs sin(sr)/(2s sinh(r/2)); density vs 4 s^2."""
    from .spherical import density_values, phi

    p = space_params(2, 0)
    r = np.linspace(0.1, 20.0, 400)
    phi_err = 0.0
    for s in (0.5, 1.3, 2.7, 5.0):
        exact = np.sin(s * r) / (2.0 * s * np.sinh(0.5 * r))
        sol = phi(p, s, r)
        phi_err = max(phi_err, float(np.max(np.abs(sol.samples - exact))))
    s_grid = np.linspace(0.5, 5.0, 46)
    dens = density_values(p, s_grid)
    dens_err = float(np.max(np.abs(dens / (4.0 * s_grid ** 2) - 1.0)))
    ok = phi_err <= 1e-8 and dens_err <= 1e-3
    return ok, (f"phi sup err {phi_err:.2e} <= 1e-08, "
                f"density rel err {dens_err:.2e} <= 1e-03")


def _c3_heat_residual(spaces):
    """PDE residual <= 1e-4 on tau in [0.5,2] x r in [0.5,10], both step sizes."""
    tol = 1e-4
    taus = (0.5, 1.0, 2.0)
    r = np.array([0.5, 2.0, 5.0, 10.0])
    worst = 0.0
    worst_at = ""
    for mk in spaces:
        p = space_params(*mk)
        for tau in taus:
            base = float(np.max(heat_residual(p, tau, r)))
            halved = float(np.max(heat_residual(p, tau, r, dt=5e-6, dr=1e-4)))
            res = max(base, halved)
            if res > worst:
                worst, worst_at = res, f"{_NAME[mk]} tau={tau}"
    return worst <= tol, (f"max residual {worst:.2e} <= {tol:.0e} "
                          f"({worst_at}; steps and halved steps)")


def _c4_upper_bound(spaces):
    """Sup ratio against the two-regime envelope: finite, < 5% drift."""
    from .estimates import verify_upper_bound

    parts = []
    ok = True
    for mk in spaces:
        # base refine 1.5: the sup location for the widest spaces is not
        # resolved at the default grid and the drift check sits on 5%
        rep = verify_upper_bound(space_params(*mk), refine=1.5)
        regimes_hit = all(v > 0 for v in rep.regime_counts.values())
        ok = ok and rep.valid and regimes_hit
        parts.append(f"{_NAME[mk]} sup {rep.ratio:.3g} "
                     f"drift {rep.refinement_drift:.1%}")
    return ok, "; ".join(parts)


def _c5_lower_bound(spaces):
    """Inf ratio over the concentration zone r > 1 + 4t: K > 0, < 5% drift."""
    from .estimates import verify_lower_bound

    parts = []
    ok = True
    for mk in _pick(((2, 0), (2, 1)), spaces):
        rep = verify_lower_bound(space_params(*mk))
        ok = ok and rep.valid and rep.ratio > 0
        parts.append(f"{_NAME[mk]} K {rep.ratio:.3g} "
                     f"drift {rep.refinement_drift:.1%}")
    return ok, "; ".join(parts)


def _c6_decay_slopes(spaces):
    """log-log decay slopes: -n/2 small time, -3/2 large time (Lq and Aq)."""
    from .estimates import decay_fit

    # QUAT stays out of the pinned set: its odd-k norms push this one
    # criterion past the desk-scale budget without changing coverage of
    # the even/odd code paths (HEIS is odd)
    worst = 0.0
    worst_at = ""
    ok = True
    for mk in _pick(((2, 0), (2, 1), (4, 2)), spaces):
        p = space_params(*mk)
        checks = []
        for q in (4.0, math.inf):
            fit = decay_fit(p, q, "small", points_per_decade=_PPD, tol=1e-6)
            checks.append((fit.slope, -0.5 * p.n, f"small q={q:g}"))
        for q in (4.0, math.inf):
            fit = decay_fit(p, q, "large", t_range=_T_LARGE,
                            points_per_decade=_PPD, tol=1e-6)
            checks.append((fit.slope, -1.5, f"large q={q:g}"))
        fit = decay_fit(p, 4.0, "large", t_range=_T_LARGE,
                        points_per_decade=_PPD, norm="aq", tol=1e-6)
        checks.append((fit.slope, -1.5, "large Aq q=4"))
        for slope, target, label in checks:
            dev = abs(slope - target)
            ok = ok and dev <= 0.15
            if dev > worst:
                worst, worst_at = dev, f"{_NAME[mk]} {label}"
    return ok, (f"max slope deviation {worst:.3f} <= 0.15 ({worst_at}; "
                f"{_names(_pick(((2, 0), (2, 1), (4, 2)), spaces))})")


def _c7_l2_conservation(spaces):
    """L2 drift <= 1e-3 on t in [0,5]; time reversal <= 1e-6."""
    from .propagator import evolve_schrodinger

    drift_max = 0.0
    rev_max = 0.0
    picked = _pick(((2, 0), (2, 1)), spaces)
    for mk in picked:
        p = space_params(*mk)
        f = _gaussian_data(p, 1.0)
        t = np.linspace(0.0, 5.0, 26)
        fwd = evolve_schrodinger(p, f, t, initial="gaussian")
        bwd = evolve_schrodinger(p, f, -t, initial="gaussian conj")
        drift_max = max(drift_max, float(fwd.l2_drift))
        scale = float(np.max(np.abs(fwd.u)))
        rev_max = max(rev_max, float(
            np.max(np.abs(np.conj(fwd.u) - bwd.u)) / scale))
    ok = drift_max <= 1e-3 and rev_max <= 1e-6
    return ok, (f"L2 drift {drift_max:.2e} <= 1e-03, "
                f"time reversal {rev_max:.2e} <= 1e-06 ({_names(picked)})")


def _c8_semigroup_cross_route(spaces):
    """h_1.2 direct vs inverse of the tau=0.5 x tau=0.7 multiplier product."""
    from .spherical import (build_grid, calibrate, inverse_spherical,
                            spherical_transform)

    tol = 1e-4
    s_max = 10.5     # |H h_1.2| density-weighted tail < 1e-11 there
    r_vals = np.linspace(0.5, 10.0, 20)
    worst = 0.0
    worst_at = ""
    for mk in spaces:
        p = space_params(*mk)
        cal = calibrate(p)
        h05 = kernel_as_radial(p, 0.5, tol=1e-12)
        h07 = kernel_as_radial(p, 0.7, tol=1e-12)
        g05 = build_grid(p, h05.decay, s_max)
        g07 = build_grid(p, h07.decay, s_max)

        def product(s, _p=p, _h05=h05, _h07=h07, _g05=g05, _g07=g07):
            s = np.atleast_1d(np.asarray(s, dtype=float))
            v5, _ = spherical_transform(_p, _h05, s, grid=_g05)
            v7, _ = spherical_transform(_p, _h07, s, grid=_g07)
            return v5 * v7

        recon = inverse_spherical(p, cal, product, r_vals, s_max=s_max)
        direct, _ = kernel_grid(p, 1.2, r_vals)
        rel = float(np.max(np.abs(recon - direct) / np.abs(direct)))
        if rel > worst:
            worst, worst_at = rel, _NAME[mk]
    return worst <= tol, (f"max rel err {worst:.2e} <= {tol:.0e} "
                          f"({worst_at}; {_names(spaces)})")


def _c9_weighted_growth(spaces):
    """|sigma_t| slope (n-1)/2 in log log(1/a); 10x growth beyond a=0.1."""
    from .estimates import weighted_growth_check

    t = 0.25         # small |t| keeps the a-window wide
    ok = True
    parts = []
    for mk in _pick(((2, 1), (2, 0)), spaces):
        p = space_params(*mk)
        fit = weighted_growth_check(p, t)
        target = 0.5 * (p.n - 1)
        ref = float(np.abs(sigma_on_slice(p, t, 0.1))[0])
        growth = float(np.max(fit.norms)) / ref
        ok = ok and abs(fit.slope - target) <= 0.25 and growth >= 10.0
        parts.append(f"{_NAME[mk]} slope {fit.slope:.3f} "
                     f"(want {target:g}+-0.25) growth {growth:.0f}x")
    return ok, "; ".join(parts)


def _c10_admissibility(spaces):
    """Predicate vs direct inequality on a 200-point (1/p, 1/q) lattice."""
    from .propagator import AdmissiblePair, is_admissible

    half = Fraction(1, 2)
    xs = [Fraction(i, 38) for i in range(20)]   # 0 .. 1/2 in 1/p
    ys = [Fraction(j, 18) for j in range(10)]   # 0 .. 1/2 in 1/q
    assert len(xs) * len(ys) == 200
    mismatches = 0
    for mk in spaces:
        p = space_params(*mk)
        n = p.n
        for x in xs:
            for y in ys:
                pv = math.inf if x == 0 else 1 / x
                qv = math.inf if y == 0 else 1 / y
                got = is_admissible(p, AdmissiblePair(pv, qv))
                want = ((x == 0 and y == half)
                        or (0 < x <= half and 0 < y < half
                            and 2 * x + n * y >= Fraction(n, 2)))
                mismatches += got != want
    total = 200 * len(spaces)
    return mismatches == 0, (f"{total - mismatches}/{total} lattice points "
                             f"agree exactly ({_names(spaces)})")


def _c11_strichartz(_spaces):
    """n=4 window ratios finite, < 2% drift; convolution ratios finite."""
    from .estimates import convolution_check
    from .propagator import (AdmissiblePair, evolve_schrodinger,
                             strichartz_window_norm)
    from .estimates import lq_norm_left

    p = space_params(2, 1)            # the n = 4 test space
    f = _gaussian_data(p, 1.0)
    window = (0.0, 2.0)
    coarse = evolve_schrodinger(p, f, np.linspace(0.0, 2.0, 41),
                                initial="gaussian")
    fine = evolve_schrodinger(p, f, np.linspace(0.0, 2.0, 81),
                              initial="gaussian")
    l2 = lq_norm_left(p, f, 2.0)
    ok = True
    parts = []
    for pq in ((2.0, 4.0), (4.0, 4.0), (math.inf, 2.0)):
        pair = AdmissiblePair(*pq)
        r1 = strichartz_window_norm(coarse, pair, window) / l2
        r2 = strichartz_window_norm(fine, pair, window) / l2
        drift = abs(r2 - r1) / r1
        ok = ok and math.isfinite(r2) and r2 > 0 and drift <= 0.02
        label = "inf" if pq[0] == math.inf else f"{pq[0]:g}"
        parts.append(f"({label},{pq[1]:g}) ratio {r2:.3f} drift {drift:.2%}")

    conv_worst = 0.0
    for sigma in (0.7, 1.3):
        g = _gaussian_data(p, sigma)
        for tau in (1.0, 0.6 + 0.4j):
            kappa = kernel_as_radial(p, tau, tol=1e-10)
            ratio = convolution_check(p, g, kappa, 4.0)
            ok = ok and math.isfinite(ratio) and ratio > 0
            conv_worst = max(conv_worst, ratio)
    parts.append(f"conv ratios finite (max {conv_worst:.3f})")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------------------
# driver

_CRITERIA = (
    (1, "transform-identity", _c1_transform_identity),
    (2, "rh3-closed-forms", _c2_rh3_closed_forms),
    (3, "heat-pde-residual", _c3_heat_residual),
    (4, "upper-bound-envelope", _c4_upper_bound),
    (5, "lower-bound-zone", _c5_lower_bound),
    (6, "decay-slopes", _c6_decay_slopes),
    (7, "l2-conservation", _c7_l2_conservation),
    (8, "semigroup-cross-route", _c8_semigroup_cross_route),
    (9, "weighted-growth", _c9_weighted_growth),
    (10, "admissibility-lattice", _c10_admissibility),
    (11, "strichartz-windows", _c11_strichartz),
)


def run(space=None, stream=None, only=None):
    """Run the acceptance criteria and print one PASS/FAIL line each.

    space: optional SpaceParams restricting the space-parameterised
    criteria.  only: optional iterable of criterion indices.  Returns
    the list of CriterionResult in criterion order.
    """
    stream = sys.stdout if stream is None else stream
    spaces = _SPACES if space is None else ((space.m, space.k),)
    wanted = None if only is None else set(only)
    results = []
    for index, name, fn in _CRITERIA:
        if wanted is not None and index not in wanted:
            continue
        t0 = time.perf_counter()
        try:
            passed, summary = fn(spaces)
        except Exception as exc:  # the gate reports, it does not crash
            passed, summary = False, f"error: {type(exc).__name__}: {exc}"
        seconds = time.perf_counter() - t0
        results.append(CriterionResult(index, name, passed, summary, seconds))
        status = "PASS" if passed else "FAIL"
        print(f"{status} {index:2d} {name:<22s} {summary} [{seconds:.1f}s]",
              file=stream, flush=True)
    return results
