"""Backend selection for the hot loops: numba when available, numpy otherwise.

Set DRKERNELS_DISABLE_NUMBA=1 to force the pure-numpy/pure-Python path
even when numba is installed (the benchmark harness uses this to compare
the two).  The choice is made once at import time.
"""

import os

import numpy as np

from . import _accel

_FLAG = os.environ.get("DRKERNELS_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    njit = None
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and not _DISABLED

if USING_NUMBA:
    # helpers called from inside the jitted loops must be jitted first and
    # rebound in the module namespace so type inference can see them
    _accel._powi = njit(cache=True)(_accel._powi)
    _eval_sum_loop = njit(cache=True)(_accel.eval_sum_loop)
    phi_rk = njit(cache=True)(_accel.phi_rk)
else:
    _eval_sum_loop = _accel.eval_sum_loop
    phi_rk = _accel.phi_rk


def backend_name():
    return "numba" if USING_NUMBA else "numpy"


def eval_sum(coeff, rpow, jpow, a1, a2, b1, b2, two_e, tau, shift, re_offset, r,
             zeta=None):
    """Evaluate a compiled monomial sum (with its Gaussian factor) at radii r.

    tau is complex time with Re tau >= 0; the result picks up the
    factor exp(shift*r + re_offset) on top of the exact sum value.
    `zeta` overrides the Gaussian exponent coefficient 1/(4 tau), which
    lets callers drop its real (decay) part while keeping the tau^-j
    amplitudes intact.  Returns a complex array of the same shape as r.
    """
    r = np.ascontiguousarray(r, dtype=np.float64)
    out = np.empty(r.shape, dtype=np.complex128)
    jmax = int(jpow.max()) if jpow.size else 0
    tinv = 1.0 / complex(tau)
    tau_inv_pows = tinv ** np.arange(jmax + 1)
    if zeta is None:
        zeta = 0.25 * tinv
    zeta = complex(zeta)
    if USING_NUMBA:
        _eval_sum_loop(coeff, rpow, jpow, a1, a2, b1, b2, float(two_e),
                       tau_inv_pows, zeta, float(shift), float(re_offset), r, out)
    else:
        _accel.eval_sum_numpy(coeff, rpow, jpow, a1, a2, b1, b2, float(two_e),
                              tau_inv_pows, zeta, float(shift), float(re_offset), r, out)
    return out
