"""
Critical layer profiles
=======================

Build U_k, V_k and the remainder R_k for a range of k, check the jump
relations of the inner corrector and watch U_k approach i U' H(y - a).
"""

from pathlib import Path

from blayer.numerics import ShearFlow
from blayer.profiles import bounds_sweep, build_V, build_profile_set, y_grid
from blayer.spectral import build_W, solve_eigenproblem, solve_X, spectral_constants_hyperbolic
from blayer.svg import line_plot

out = Path("demo_out")
flow = ShearFlow("gaussian-bump", a=2.0)
sc = spectral_constants_hyperbolic(solve_eigenproblem(), flow)
w = build_W(solve_X(sc.gamma))

v = build_V(w, sc, flow)
print("jumps of V, V', V'':", v.jumps)
print("expected:           ", (-sc.tau, 0.0, -flow.d2a))

ks = [64, 128, 256, 512, 1024, 2048, 4096]
table = bounds_sweep(ks, w, sc, flow)
for r in table.rows:
    print(f"k={int(r.k):5d}  ||U_k||={r.norm_U:.4f}  k^(4/3)||R_k||={r.k43_norm_R:.3f}  gap={r.limit_gap:.3e}")
print(f"distance to the limit decays like k^{table.limit_rate():.3f}")

k = 256
ps = build_profile_set(k, w, sc, flow, y_grid(flow, k))
y = ps.grid.nodes
sel = (y > 1) & (y < 3)
line_plot(out / "profiles_k256.svg",
          [(y[sel], ps.U.values.real[sel], "Re U_k"), (y[sel], ps.U.values.imag[sel], "Im U_k"),
           (y[sel], (y[sel] >= flow.a) * flow.derivative(1, y[sel]), "U' H")],
          title="k = 256", xlabel="y", dashed=(2,))
print("wrote", out / "profiles_k256.svg")
