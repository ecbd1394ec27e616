"""End-to-end gate: every advertised guarantee at its stated tolerance.

One test per criterion, each running the full pinned space set, so a
red line here points at the exact broken guarantee.  This is the slow
part of the suite; run it alone with `pytest tests/test_acceptance.py -v`.
"""

from drkernels import acceptance


def _run(index):
    res = acceptance.run(only={index})
    assert len(res) == 1 and res[0].index == index
    return res[0]


def test_transform_identity():
    """Forward transform of h_tau hits the exact Gaussian multiplier."""
    r = _run(1)
    assert r.passed, r.summary


def test_rh3_closed_forms():
    r = _run(2)
    assert r.passed, r.summary


def test_heat_pde_residual():
    r = _run(3)
    assert r.passed, r.summary


def test_upper_bound_envelope():
    """Two-regime sup ratio is finite and stable under refinement."""
    r = _run(4)
    assert r.passed, r.summary


def test_lower_bound_zone():
    r = _run(5)
    assert r.passed, r.summary


def test_decay_slopes():
    r = _run(6)
    assert r.passed, r.summary


def test_l2_conservation():
    r = _run(7)
    assert r.passed, r.summary


def test_semigroup_cross_route():
    """Abel route agrees with reconstruction from a multiplier product."""
    r = _run(8)
    assert r.passed, r.summary


def test_weighted_growth():
    r = _run(9)
    assert r.passed, r.summary


def test_admissibility_lattice():
    r = _run(10)
    assert r.passed, r.summary


def test_strichartz_windows():
    r = _run(11)
    assert r.passed, r.summary
