"""Radial geometry of the solvable extension S = N x R+ of an H-type group.

A space is fixed by the pair (m, k): m the dimension of the first layer
of N, k the dimension of the center.  Homogeneous dimension
Q = (m + 2k)/2, manifold dimension n = m + k + 1.  The radial volume
density is

    A(r) = 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2),

and every radial integral against the left Haar measure reduces to
int f(r) A(r) dr.

Group-level operations (products, inverses, the geodesic distance of a
point from the identity) are provided for explicit Heisenberg-type and
quaternionic models; all radial analysis depends on (m, k) alone.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import NonConvergenceError, integrate_decaying, integrate_panels, integrate_quadpack


@dataclass(frozen=True)
class SpaceParams:
    """Structure constants (m, k) with derived dimensions.

    m must be even and >= 2 (H-type first layers have even dimension);
    k >= 0, with k = 0 the degenerate real-hyperbolic case.
    """

    m: int
    k: int

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ValueError("m must be an even integer >= 2, got %r" % (self.m,))
        if self.k < 0:
            raise ValueError("k must be >= 0, got %r" % (self.k,))

    @property
    def Q(self):
        # m even makes this exact
        return (self.m + 2 * self.k) // 2

    @property
    def n(self):
        return self.m + self.k + 1


def space_params(m, k):
    return SpaceParams(int(m), int(k))


@dataclass(frozen=True)
class Decay:
    """Envelope metadata for a radial function.

    |f(r)| <~ (1 + r)^poly_degree * exp(-exp_rate * r - gauss_rate * r^2),
    with an oscillatory factor of quadratic phase rate `phase_rate`
    (phase ~ phase_rate * r^2) when nonzero.  gauss_rate == 0 together
    with phase_rate > 0 marks a Fresnel-type tail that is only
    summable after regularisation.
    """

    exp_rate: float
    gauss_rate: float = 0.0
    phase_rate: float = 0.0
    poly_degree: float = 0.0


@dataclass
class RadialFunction:
    """A radial function given by a vectorised evaluator.

    evaluator(r_array) -> complex array.  scaled_evaluator, when
    present, returns f(r) * exp(+Q r / 2) for the owning space and is
    what far-field quadrature uses to dodge underflow.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    decay: Decay
    r_min: float = 0.0
    scaled_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, r):
        return self.evaluator(np.asarray(r, dtype=float))


@dataclass
class GroupPoint:
    """(X, Z, a) coordinates: first layer, center, positive A-component."""

    X: np.ndarray
    Z: np.ndarray
    a: float

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Z = np.asarray(self.Z, dtype=float)
        if not self.a > 0:
            raise ValueError("a-coordinate must be positive")


@dataclass(frozen=True)
class HTypeInstance:
    """An explicit H-type group: structure matrices U[i] with
    [X, Y]_i = X . U[i] . Y, each U[i] skew and the family satisfying
    the Clifford relations that make J_Z orthogonal for unit Z."""

    params: SpaceParams
    U: np.ndarray = field(repr=False)

    @classmethod
    def heisenberg(cls, d):
        """Heisenberg group H^d: m = 2d, k = 1, standard symplectic form."""
        m = 2 * d
        U = np.zeros((1, m, m))
        U[0, :d, d:] = np.eye(d)
        U[0, d:, :d] = -np.eye(d)
        return cls(space_params(m, 1), U)

    @classmethod
    def quaternionic(cls, d):
        """Quaternionic Heisenberg group: m = 4d, k = 3, built from left
        multiplication by i, j, k on H^d."""
        li = np.array([[0.0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
        lj = np.array([[0.0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])
        lk = np.array([[0.0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
        m = 4 * d
        U = np.zeros((3, m, m))
        for b, mat in enumerate((li, lj, lk)):
            for c in range(d):
                U[b, 4 * c:4 * c + 4, 4 * c:4 * c + 4] = mat
        return cls(space_params(m, 3), U)

    @classmethod
    def from_name(cls, name):
        """Parse 'heisenberg:d' or 'quaternionic:d'."""
        kind, _, ds = name.partition(":")
        d = int(ds) if ds else 1
        if kind == "heisenberg":
            return cls.heisenberg(d)
        if kind == "quaternionic":
            return cls.quaternionic(d)
        raise ValueError("unknown H-type family %r" % (kind,))

    def bracket(self, X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return np.einsum("i,bij,j->b", X, self.U, Y)

    def j_map(self, Z):
        """J_Z defined by <J_Z X, Y> = <Z, [X, Y]>."""
        Z = np.asarray(Z, dtype=float)
        return -np.einsum("b,bij->ij", Z, self.U)

    def identity(self):
        p = self.params
        return GroupPoint(np.zeros(p.m), np.zeros(p.k), 1.0)


def group_product(inst, x, y):
    """(X,Z,a)(X',Z',a') = (X + a^{1/2} X', Z + a Z' + (a^{1/2}/2)[X,X'], a a')."""
    ra = math.sqrt(x.a)
    X = x.X + ra * y.X
    Z = x.Z + x.a * y.Z + 0.5 * ra * inst.bracket(x.X, y.X)
    return GroupPoint(X, Z, x.a * y.a)


def group_inverse(inst, x):
    ra = math.sqrt(x.a)
    return GroupPoint(-x.X / ra, -x.Z / x.a, 1.0 / x.a)


def distance_to_identity(p, x):
    """Geodesic distance r(x) from the identity.

    cosh^2(r/2) = ((a^{1/2} + a^{-1/2})/2 + a^{-1/2} |X|^2 / 8)^2
                  + a^{-1} |Z|^2 / 4.
    The right-hand side is >= 1 for every group point; values that dip
    below 1 - 1e-12 indicate corrupted input and raise.
    """
    a = x.a
    ra = math.sqrt(a)
    xx = float(np.dot(x.X, x.X))
    zz = float(np.dot(x.Z, x.Z))
    core = 0.5 * (ra + 1.0 / ra) + xx / (8.0 * ra)
    rhs = core * core + zz / (4.0 * a)
    if rhs < 1.0 - 1e-12:
        raise ValueError("distance formula produced cosh^2 < 1: %r" % (rhs,))
    rhs = max(rhs, 1.0)
    return 2.0 * math.acosh(math.sqrt(rhs))


def distance(inst, x, y):
    return distance_to_identity(inst.params, group_product(inst, group_inverse(inst, x), y))


def density_A(p, r):
    """Radial volume density A(r) = 2^{m+k} sinh^{m+k}(r/2) cosh^k(r/2)."""
    r = np.asarray(r, dtype=float)
    return (2.0 ** (p.m + p.k) * np.sinh(0.5 * r) ** (p.m + p.k)
            * np.cosh(0.5 * r) ** p.k)


def density_A_scaled(p, r):
    """A(r) e^{-Q r}; bounded (tends to 2^{-k}), safe at any radius."""
    r = np.asarray(r, dtype=float)
    em = np.exp(-r)
    return 2.0 ** (-p.k) * (1.0 - em) ** (p.m + p.k) * (1.0 + em) ** p.k


def log_density_derivative(p, r):
    """A'(r)/A(r) = ((m+k)/2) coth(r/2) + (k/2) tanh(r/2)."""
    r = np.asarray(r, dtype=float)
    th = np.tanh(0.5 * r)
    return 0.5 * (p.m + p.k) / th + 0.5 * p.k * th


def volume_V(p, r):
    """V(r) = int_0^r A; vectorised via cumulative panels.

    Grows like r^n near zero and like e^{Qr} at infinity.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    order = np.argsort(r_arr)
    pts = np.concatenate([[0.0], r_arr[order]])
    out = np.empty_like(r_arr)
    acc = 0.0
    for i in range(len(r_arr)):
        lo, hi = pts[i], pts[i + 1]
        if hi > lo:
            seg, _ = integrate_panels(lambda t: density_A(p, t), lo, hi, tol=1e-12)
            acc += seg.real
        out[order[i]] = acc
    if np.isscalar(r) or np.asarray(r).ndim == 0:
        return float(out[0])
    return out


def modular_delta(p, a):
    """Modular function delta(X, Z, a) = a^{-Q}."""
    return np.asarray(a, dtype=float) ** (-p.Q)


def weight_delta_q(p, q, a):
    """Interpolating weight delta_q = delta^{1 - q/2}."""
    return modular_delta(p, a) ** (1.0 - 0.5 * q)


def lq_norm_left(p, f, q, *, tol=1e-9, backend="panels"):
    """L^q norm of a radial function against the left Haar measure.

    ||f||_q = (int_0^inf |f(r)|^q A(r) dr)^{1/q} for finite q >= 1.
    Divergent integrands (decay metadata too weak, or a tail that
    refuses to decay numerically) raise NonConvergenceError.
    """
    if q < 1 or not math.isfinite(q):
        raise ValueError("q must be finite and >= 1; sup-norms live in estimates")
    d = f.decay
    eff = q * d.exp_rate - p.Q
    if d.gauss_rate <= 0 and eff <= 1e-9:
        raise NonConvergenceError(
            "integrand |f|^q A grows or stalls at infinity (net rate %g)" % eff)

    def integrand(r):
        return np.abs(f(r)) ** q * density_A(p, r)

    a0 = f.r_min
    if backend == "quadpack":
        # finite cap: QUADPACK's infinite-interval map probes radii far
        # beyond float range for A(r); truncate where the integrand has
        # provably died, staying clear of sinh overflow
        if d.gauss_rate > 0:
            r_cap = math.sqrt(math.log(1e18) / (q * d.gauss_rate)) + 20.0
        else:
            r_cap = math.log(1e18) / eff + 20.0
        r_cap = min(r_cap, 1300.0 / max(p.m + p.k, 1))
        val, _ = integrate_quadpack(lambda x: complex(integrand(np.array([x]))[0]),
                                    a0, r_cap, tol=tol)
    else:
        rate = max(eff, q * d.gauss_rate, 0.05)
        val, _ = integrate_decaying(integrand, a0, tol=tol, rate=rate)
    return float(val.real) ** (1.0 / q)
