"""Complex-time heat and Schrodinger kernels on Damek-Ricci spaces.

Radial harmonic analysis on solvable extensions S = N x R+ of H-type
groups: exact symbolic inverse Abel transforms, spherical function
solvers, kernel evaluation for complex time with Re tau >= 0, and the
quantitative estimate checks built on top of them (pointwise envelopes,
Lebesgue and convolution-norm decay, weighted growth, Strichartz-type
window norms).

The parameter pair (m, k) fixes the space: m is the dimension of the
first layer of N, k the dimension of the center.  Everything radial
depends only on (m, k); explicit group models (Heisenberg, quaternionic)
are available for the group-level operations.
"""

from .geometry import (
    SpaceParams,
    space_params,
    GroupPoint,
    HTypeInstance,
    RadialFunction,
    Decay,
    density_A,
    volume_V,
    distance_to_identity,
)
from .symbolic import SymbolicSum, Monomial, gaussian_seed, apply_D1, apply_D2, inverse_abel_chain
from .kernels import kernel_h, schrodinger_kernel, sigma_kernel
from .spherical import spherical_transform, inverse_spherical, calibrate, phi, plancherel_density

__version__ = "0.1.0"

__all__ = [
    "SpaceParams",
    "space_params",
    "GroupPoint",
    "HTypeInstance",
    "RadialFunction",
    "Decay",
    "density_A",
    "volume_V",
    "distance_to_identity",
    "SymbolicSum",
    "Monomial",
    "gaussian_seed",
    "apply_D1",
    "apply_D2",
    "inverse_abel_chain",
    "kernel_h",
    "schrodinger_kernel",
    "sigma_kernel",
    "spherical_transform",
    "inverse_spherical",
    "calibrate",
    "phi",
    "plancherel_density",
    "__version__",
]
