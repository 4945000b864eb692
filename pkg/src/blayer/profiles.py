"""Boundary-layer corrector V and the frequency-k profiles of the hyperbolic model.

With s = y - a, c = (|U''(a)|/2)^{1/3}, z = c k^{1/3} s and
Q = k^{-2/3} tau + U''(a) s^2/2:

    U_k = i U' H + i U''(a) s (W - H) + i k^{-1/3} c tau W' + i k^{1/3} c U''(a) s^2/2 W'
    V_k = U H + k^{-2/3} tau W + U''(a) s^2/2 (W - H)
    R_k = i k^{-4/3} H U''' + (W - H) F1 + W' F2

    F1 = i tau U'' s (U - U'' s^2/2) - i tau (U' - U'' s) Q + k^{-1} tau U'' s
         + k^{-1/3} U U'' s - k^{-1/3} U' Q
    F2 = c Q (i tau k^{1/3} (U - U'' s^2/2) + k^{-2/3} tau + U)

U_k = i V_k' holds identically, and substituting exp(i tau k^{1/3} t) U_k
into the frequency-k system leaves exactly -k^{4/3} R_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InconsistentSpectralInputs, ResolutionError
from .numerics import (ComplexProfile, Grid1D, ShearFlow, WeightedNormParams,
                       cumulative_integral, grid_through, heaviside_profile, wnorm)
from .spectral import (SpectralConstants, WProfile, hyperbolic_gamma,
                       w_equation_residual)

__all__ = [
    "VProfile", "ProfileSetK", "build_V", "build_profile_set", "bounds_sweep",
    "y_grid", "layer_width", "fit_exponent", "one_sided_limits",
]


def fit_exponent(ks, values) -> float:
    """Least squares slope of log(values) against log(k)."""
    return float(np.polyfit(np.log(np.asarray(ks, float)), np.log(np.asarray(values, float)), 1)[0])


def layer_width(k: float, curvature: float, power: float = 1 / 3) -> float:
    return k ** (-power) * (2 / abs(curvature)) ** power


def y_grid(shear: ShearFlow, k: float, alpha: float = 1.0, nodes_per_layer: float = 32,
           power: float = 1 / 3, n_min: int = 600, length: Optional[float] = None) -> Grid1D:
    """[0, L] with L = a + max(10/alpha, 6) and a on the grid."""
    if length is None:
        length = shear.a + (max(10 / alpha, 6) if alpha > 0 else 6)
    n = max(n_min, int(np.ceil(nodes_per_layer * length / layer_width(k, shear.d2a, power))) + 1)
    return grid_through(0.0, length, n, shear.a)


@dataclass(frozen=True, eq=False)
class VProfile:
    V: ComplexProfile
    limits: dict
    jumps: tuple
    errors: tuple


def one_sided_limits(f: np.ndarray, j0: int, h: float):
    """Value, first and second derivative at node j0 from each side.

    Quadratic through three nodes: j0-1, j0-2, j0-3 on the left and
    j0, j0+1, j0+2 on the right (H(0) = 1 puts the node on the right side).
    """
    def quad(p0, p1, p2, step):
        # samples at 0, step, 2*step; returns value, slope, curvature at 0
        d1 = (-3 * p0 + 4 * p1 - p2) / (2 * step)
        d2 = (p0 - 2 * p1 + p2) / step**2
        return p0, d1, d2

    rv, r1, r2 = quad(f[j0], f[j0 + 1], f[j0 + 2], h)
    # left: samples at -h, -2h, -3h extrapolated to 0
    l1, l2, l3 = f[j0 - 1], f[j0 - 2], f[j0 - 3]
    lv = 3 * l1 - 3 * l2 + l3
    ls = (5 * l1 - 8 * l2 + 3 * l3) / (2 * h)
    lc = (l1 - 2 * l2 + l3) / h**2
    return (lv, ls, lc), (rv, r1, r2)


def check_spectral_inputs(w: WProfile, sc: SpectralConstants, shear: ShearFlow,
                          tol: float = 1e-2):
    """Reject constants that do not fit the stored W profile or the flow."""
    u2 = shear.d2a
    c = (abs(u2) / 2) ** (1 / 3)
    sign = 1 if u2 > 0 else -1
    if sc.model != "hyperbolic":
        raise InconsistentSpectralInputs("constants are not for the hyperbolic model")
    g_ref = hyperbolic_gamma(sc.alpha, sign)
    problems = []
    if abs(sc.gamma - g_ref) > 1e-8 * abs(g_ref):
        problems.append("gamma does not match alpha")
    if abs(sc.tau - c * sc.gamma) > 1e-8 * abs(sc.tau):
        problems.append("tau does not match gamma and the curvature")
    if abs(sc.sigma0 + np.imag(sc.tau)) > 1e-12 * abs(sc.tau):
        problems.append("sigma0 differs from -Im(tau)")
    res = w_equation_residual(w, sc.gamma)
    if res > tol:
        problems.append(f"W equation residual {res:.2e} with the given gamma")
    if problems:
        raise InconsistentSpectralInputs("; ".join(problems))


def build_V(w: WProfile, sc: SpectralConstants, shear: ShearFlow, grid: Optional[Grid1D] = None,
            rtol: float = 1e-3, check: bool = True) -> VProfile:
    """V(zt) = (tau + U''(a) zt^2/2)(W(c zt) - H(zt)) and its jumps at zt = 0."""
    if check:
        check_spectral_inputs(w, sc, shear)
    u2 = shear.d2a
    c = (abs(u2) / 2) ** (1 / 3)
    if grid is None:
        half = 4.0 / c
        grid = grid_through(-half, half, int(2 * half / 1e-4) + 1, 0.0)
    zt = grid.nodes
    j0 = grid.marked if grid.marked is not None else grid.index_of(0.0)
    W, _ = w.interpolant()(c * zt)
    H = heaviside_profile(grid, 0.0).values
    V = (sc.tau + u2 * zt**2 / 2) * (W - H)
    left, right = one_sided_limits(V, j0, grid.h)
    jumps = tuple(r - l for l, r in zip(left, right))
    targets = (-sc.tau, 0.0, -u2)
    scales = (abs(sc.tau), abs(sc.tau) * c, abs(u2))
    errors = tuple(abs(j - t) / s for j, t, s in zip(jumps, targets, scales))
    limits = {"minus": left, "plus": right}
    if check and max(errors) > rtol:
        raise InconsistentSpectralInputs(f"jump conditions violated: {errors}")
    return VProfile(ComplexProfile(grid, V), limits, jumps, errors)


@dataclass(frozen=True, eq=False)
class ProfileSetK:
    k: float
    U: ComplexProfile
    V: ComplexProfile
    R: ComplexProfile
    F1: ComplexProfile
    F2: ComplexProfile
    V_formula: ComplexProfile
    norm_U: float
    norm_R: float
    v_discrepancy: float
    alpha: float

    @property
    def k43_norm_R(self) -> float:
        return self.k ** (4 / 3) * self.norm_R

    @property
    def grid(self) -> Grid1D:
        return self.U.grid


def _layer_terms(k, w: WProfile, sc: SpectralConstants, shear: ShearFlow, grid: Grid1D):
    y = grid.nodes
    a = shear.a
    s = y - a
    H = (s >= -1e-12 * grid.h).astype(float)
    u2 = shear.d2a
    c = (abs(u2) / 2) ** (1 / 3)
    W, Wp = w.interpolant()(c * k ** (1 / 3) * s)
    U0, U1, U2, U3 = shear.all_derivatives(y, 3)
    return y, s, H, u2, c, W, Wp, U0, U1, U3


def build_profile_set(k: float, w: WProfile, sc: SpectralConstants, shear: ShearFlow,
                      grid: Optional[Grid1D] = None, alpha: float = 1.0,
                      min_nodes: int = 8) -> ProfileSetK:
    if k < 1:
        raise ValueError("k must be >= 1")
    if grid is None:
        grid = y_grid(shear, k, alpha)
    width = layer_width(k, shear.d2a)
    if width / grid.h < min_nodes:
        raise ResolutionError(f"layer width {width:.3g} has {width / grid.h:.1f} nodes at k={k}", k)
    y, s, H, u2, c, W, Wp, U0, U1, U3 = _layer_terms(k, w, sc, shear, grid)
    tau = sc.tau
    k13 = k ** (1 / 3)
    Uk = (1j * U1 * H + 1j * u2 * s * (W - H) + 1j * c * tau * Wp / k13
          + 1j * k13 * c * u2 * s**2 / 2 * Wp)
    Uk[0] = 0.0
    Vf = U0 * H + tau * W / k13**2 + u2 * s**2 / 2 * (W - H)
    Q = tau / k13**2 + u2 * s**2 / 2
    F1 = (1j * tau * u2 * s * (U0 - u2 * s**2 / 2) - 1j * tau * (U1 - u2 * s) * Q
          + tau * u2 * s / k + U0 * u2 * s / k13 - U1 * Q / k13)
    F2 = c * Q * (1j * tau * k13 * (U0 - u2 * s**2 / 2) + tau / k13**2 + U0)
    R = 1j * H * U3 / k ** (4 / 3) + (W - H) * F1 + Wp * F2
    prof = ComplexProfile(grid, Uk)
    V = cumulative_integral(prof) * (-1j)
    p = WeightedNormParams(alpha, 0)
    Vfp = ComplexProfile(grid, Vf)
    disc = wnorm(V - Vfp, p) / max(wnorm(Vfp, p), 1e-300)
    return ProfileSetK(k, prof, V, ComplexProfile(grid, R), ComplexProfile(grid, F1),
                       ComplexProfile(grid, F2), Vfp, wnorm(prof, p),
                       wnorm(ComplexProfile(grid, R), p), disc, alpha)


def limit_profile(shear: ShearFlow, grid: Grid1D) -> ComplexProfile:
    """i U_s'(y) H(y - a)."""
    H = heaviside_profile(grid, shear.a)
    return H * (1j * shear.derivative(1, grid.nodes))


@dataclass(frozen=True)
class BoundsRow:
    k: float
    norm_U: float
    k43_norm_R: float
    limit_gap: float
    norm_U_W1: float


@dataclass(frozen=True)
class BoundsTable:
    rows: tuple
    norm_limit: float

    @property
    def ks(self):
        return [r.k for r in self.rows]

    @property
    def ratio_U(self) -> float:
        u = [r.norm_U for r in self.rows]
        return max(u) / min(u)

    @property
    def min_U(self) -> float:
        return min(r.norm_U for r in self.rows)

    @property
    def max_R(self) -> float:
        return max(r.k43_norm_R for r in self.rows)

    def plateau_ratio(self) -> float:
        """Spread of k^{4/3}||R_k|| over the top octave, relative to the last k."""
        top = self.rows[-1]
        sel = [r.k43_norm_R for r in self.rows if r.k >= top.k / 2]
        ref = top.k43_norm_R
        return max(max(sel) / ref, ref / min(sel))

    def limit_rate(self) -> float:
        return fit_exponent(self.ks, [r.limit_gap for r in self.rows])


def bounds_sweep(ks: Iterable[float], w: WProfile, sc: SpectralConstants, shear: ShearFlow,
                 alpha: float = 1.0, nodes_per_layer: float = 32) -> BoundsTable:
    rows = []
    norm_limit = None
    for k in sorted(ks):
        grid = y_grid(shear, k, alpha, nodes_per_layer)
        ps = build_profile_set(k, w, sc, shear, grid, alpha)
        lim = limit_profile(shear, grid)
        p = WeightedNormParams(alpha, 0)
        gap = wnorm(ps.U - lim, p)
        if norm_limit is None:
            norm_limit = wnorm(lim, p)
        rows.append(BoundsRow(k, ps.norm_U, ps.k43_norm_R, gap,
                              wnorm(ps.U, WeightedNormParams(alpha, 1))))
    if not rows:
        raise ValueError("empty k list")
    return BoundsTable(tuple(rows), norm_limit)
