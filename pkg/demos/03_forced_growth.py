"""
Exact growing solution and Duhamel's formula
============================================

With the remainder fed back as a forcing, exp(i tau k^{1/3} t) U_k solves
the frequency-k system exactly. The time stepper reproduces it, and the
forced run equals the homogeneous run plus the integrated impulse runs.
"""

from pathlib import Path

import numpy as np

from blayer.evolution import duhamel_check, evolve, exact_state, remainder_forcing, window
from blayer.numerics import ShearFlow
from blayer.profiles import build_profile_set, y_grid
from blayer.spectral import build_W, solve_eigenproblem, solve_X, spectral_constants_hyperbolic
from blayer.svg import line_plot

flow = ShearFlow("gaussian-bump", a=2.0)
sc = spectral_constants_hyperbolic(solve_eigenproblem(), flow)
w = build_W(solve_X(sc.gamma))

k = 256
ps = build_profile_set(k, w, sc, flow, y_grid(flow, k))
lam = 1j * sc.tau * k ** (1 / 3)
T = window(k, sc.sigma0, sc.sigma0 / 2)
tr = evolve(k, flow, exact_state(ps, sc), T, remainder_forcing(ps, sc),
            reference=lambda t: np.exp(lam * t) * ps.U.values)
print(f"k = {k}, T = {T:.4f}, {len(tr.times) - 1} steps")
print(f"largest relative deviation from the exact solution: {tr.ref_error:.2e}")
print(f"fitted growth rate / sigma0 k^(1/3) = {tr.log_slope() / (sc.sigma0 * k ** (1 / 3)):.5f}")

exact = ps.norm_U * np.exp(sc.sigma0 * k ** (1 / 3) * tr.times)
line_plot(Path("demo_out") / "forced_k256.svg",
          [(tr.times, tr.norms, "numerical"), (tr.times, exact, "exact")],
          xlabel="t", ylabel="||u(t)||", logy=True, dashed=(1,))

k = 64
ps = build_profile_set(k, w, sc, flow, y_grid(flow, k))
for M in (8, 16, 32, 64):
    d = duhamel_check(ps, sc, flow, window(k, sc.sigma0, sc.sigma0 / 2) / 2, M)
    print(f"Duhamel, M = {M:2d}: relative discrepancy {d.discrepancy:.2e}")
