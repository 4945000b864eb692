"""
The classical boundary layer model
==================================

Same construction with fourth-root scalings. For the quadratic flow the
remainder vanishes and the growing mode is exact, which pins down gamma_P
without any reference value.
"""

import math

import numpy as np

from blayer.evolution import window
from blayer.numerics import ShearFlow
from blayer.prandtl import (build_profile_set_prandtl, evolve_prandtl, growth_crossover,
                            prandtl_forcing, prandtl_grid, quadratic_oracle,
                            spectral_constants_prandtl)
from blayer.spectral import solve_eigenproblem, spectral_constants_hyperbolic

eig = solve_eigenproblem()
quad = ShearFlow("quadratic", a=2.0, kappa=1.0)
pq = spectral_constants_prandtl(quad, eig)
print(f"quadratic flow: gamma_P = {pq.gamma:.10f} after {pq.iterations} secant steps")

o = quadratic_oracle(pq, quad, 256)
print(f"||R_k|| = {o.norm_R:.1e}, slope / (sigma0 sqrt k) = {o.slope_ratio:.6f}")

bump = ShearFlow("gaussian-bump", a=2.0)
pb = spectral_constants_prandtl(bump, eig)
k = 256
ps = build_profile_set_prandtl(k, pb, bump, prandtl_grid(bump, k))
f = prandtl_forcing(ps, pb, bump)
T = window(k, pb.sigma0, pb.sigma0 / 2, 0.5)
tr = evolve_prandtl(k, bump, ps.U, T, f, reference=lambda t: np.exp(f.rate * t) * ps.U.values)
print(f"bump flow, forced run at k = {k}: deviation {tr.ref_error:.2e}")

s0h = spectral_constants_hyperbolic(eig, bump).sigma0
print(f"sigma0 hyperbolic = {s0h:.4f}, classical = {pb.sigma0:.4f}; "
      f"the square-root rate wins once k > {growth_crossover(s0h, pb.sigma0):.2f}")
print(f"at k = 4096: {s0h * 4096 ** (1 / 3):.2f} vs {pb.sigma0 * math.sqrt(4096):.2f}")
