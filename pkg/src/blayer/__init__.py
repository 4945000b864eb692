"""Numerical checks for boundary-layer instability at high tangential frequency.

Submodules: numerics (grids, profiles, norms, shear flows), spectral
(eigenproblem, X, W, constants), profiles (V, U_k, R_k), evolution
(hyperbolic time stepping, Duhamel, inflation), prandtl (classical model),
io, svg, config, verify and cli.
"""

__version__ = "0.1.0"

__all__ = ["errors", "ComplexProfile", "Grid1D", "ShearFlow", "WeightedNormParams",
           "cumulative_integral", "differentiate", "heaviside_profile", "wnorm", "build_W",
           "continuation_oracle", "solve_eigenproblem", "solve_X", "spectral_constants_hyperbolic"]

from . import errors  # noqa: F401
from .numerics import (ComplexProfile, Grid1D, ShearFlow, WeightedNormParams,  # noqa: F401
                       cumulative_integral, differentiate, heaviside_profile, wnorm)
from .spectral import (build_W, continuation_oracle, solve_eigenproblem, solve_X,  # noqa: F401
                       spectral_constants_hyperbolic)
