"""Classical Prandtl counterpart.

The connecting profile solves q^2 W' + i d^3[q W] = 0 with q = gamma + s z^2
(s = sign U''(a)); gamma is located by a secant search on the log-derivative
mismatch of the two decaying branches. With lz = (|U''(a)|/2)^{1/4},
zt = k^{1/4}(y - a), tau = (|U''(a)|/2)^{1/2} gamma and D = U - U(a) - U''(a)s^2/2:

    U_k = i U' H + i U''(a) s (W - H) + i k^{-1/4} lz (tau + U''(a) zt^2/2) W'
    R_k = i k^{-1} H U''' + F1 (W - H) + F2 W'
    F1 = D U''(a) s - (U' - U''(a) s)(k^{-1/2} tau + U''(a) s^2/2)
    F2 = lz k^{1/4} D (k^{-1/2} tau + U''(a) s^2/2)

The diffusion term is stiff, so time stepping is IMEX: implicit second
differences, explicit transport, with the ARS(4,4,3) tableau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowUpError, ConfigurationError, ResolutionError, SpectralFailure
from .evolution import (ExponentialForcing, InflationRecord, InflationReport, StateVector,
                        Trajectory, inflation_constant, parallel_map, window)
from .numerics import (ComplexProfile, Grid1D, ShearFlow, WeightedNormParams,
                       cumulative_integral, grid_through, wnorm)
from .profiles import fit_exponent, layer_width, limit_profile, y_grid
from .spectral import (Eigenpair, SpectralConstants, WProfile, XProfile, build_W,
                       hyperbolic_gamma, log_derivative_mismatch, solve_X)

__all__ = [
    "PrandtlSpectral", "PrandtlProfileSetK", "spectral_constants_prandtl",
    "build_profile_set_prandtl", "evolve_prandtl", "inflation_experiment_prandtl",
    "quadratic_oracle", "prandtl_forcing", "growth_crossover", "prandtl_grid",
    "norm_alpha",
]

# ARS(4,4,3): explicit and implicit tableaux, stiffly accurate
_AE = np.array([[0, 0, 0, 0, 0],
                [1 / 2, 0, 0, 0, 0],
                [11 / 18, 1 / 18, 0, 0, 0],
                [5 / 6, -5 / 6, 1 / 2, 0, 0],
                [1 / 4, 7 / 4, 3 / 4, -7 / 4, 0]])
_AI = np.array([[0, 0, 0, 0, 0],
                [0, 1 / 2, 0, 0, 0],
                [0, 1 / 6, 1 / 2, 0, 0],
                [0, -1 / 2, 1 / 2, 1 / 2, 0],
                [0, 3 / 2, -3 / 2, 1 / 2, 1 / 2]])
_CE = _AE.sum(axis=1)


@dataclass(frozen=True, eq=False)
class PrandtlSpectral:
    gamma: complex
    tau: complex
    sigma0: float
    x: XProfile
    w: WProfile
    defect: float
    curvature: float
    iterations: int

    @property
    def lz(self) -> float:
        return (abs(self.curvature) / 2) ** 0.25

    @property
    def constants(self) -> SpectralConstants:
        return SpectralConstants(float("nan"), self.gamma, self.tau, self.sigma0, "prandtl",
                                 self.curvature, math.sqrt(abs(self.curvature) / 2))


def _seed(eig: Optional[Eigenpair], sign: int) -> complex:
    # cube-root rotation of the hyperbolic constant turned into the square-root one
    alpha = 1.0 if eig is None else eig.alpha
    gh = hyperbolic_gamma(alpha, -1)
    g = abs(gh) ** 1.5 * np.exp(-3j * np.pi / 4)
    return complex(g if sign < 0 else -np.conj(g))


def spectral_constants_prandtl(shear: ShearFlow, eig: Optional[Eigenpair] = None,
                               halfwidth: float = 12.0, n: int = 4001, tol: float = 1e-6,
                               seed: Optional[complex] = None, maxiter: int = 40) -> PrandtlSpectral:
    """Secant search in C for the connecting gamma, then X, W and tau."""
    if abs(shear.derivative(1, shear.a)) > 1e-12:
        raise SpectralFailure("U_s'(a) must vanish")
    u2 = shear.d2a
    sign = 1 if u2 > 0 else -1
    g0 = _seed(eig, sign) if seed is None else complex(seed)
    g1 = g0 * (1 + 1e-3)
    f0 = log_derivative_mismatch(g0, halfwidth, "prandtl", sign)
    f1 = log_derivative_mismatch(g1, halfwidth, "prandtl", sign)
    it = 0
    while it < maxiter:
        it += 1
        if f1 == f0:
            break
        g2 = g1 - f1 * (g1 - g0) / (f1 - f0)
        if not g2.imag < 0:
            raise SpectralFailure(f"root search left the lower half plane at {g2}")
        g0, f0 = g1, f1
        g1 = g2
        f1 = log_derivative_mismatch(g1, halfwidth, "prandtl", sign)
        if abs(g1 - g0) <= 1e-13 * abs(g1):
            break
    x = solve_X(g1, halfwidth, n, "prandtl", sign, tol)
    w = build_W(x)
    tau = math.sqrt(abs(u2) / 2) * g1
    return PrandtlSpectral(complex(g1), complex(tau), float(-tau.imag), x, w, x.defect, float(u2), it)


def norm_alpha(shear: ShearFlow, alpha: float) -> float:
    """Non-decaying flows are measured without weight."""
    return alpha if shear.decaying else 0.0


def prandtl_grid(shear: ShearFlow, k: float, alpha: float = 1.0,
                 nodes_per_layer: float = 32) -> Grid1D:
    length = None if shear.decaying else shear.a + 8.0
    return y_grid(shear, k, norm_alpha(shear, alpha), nodes_per_layer, power=0.25, length=length)


def fit_mask(shear: ShearFlow, grid: Grid1D):
    """Drop the last 10% of the domain for non-decaying flows."""
    if shear.decaying:
        return None
    return grid.nodes <= 0.9 * grid.hi


@dataclass(frozen=True, eq=False)
class PrandtlProfileSetK:
    k: float
    U: ComplexProfile
    V: ComplexProfile
    R: ComplexProfile
    F1: ComplexProfile
    F2: ComplexProfile
    norm_U: float
    norm_R: float
    norm_U_W1: float
    alpha: float

    @property
    def k_norm_R(self) -> float:
        return self.k * self.norm_R

    @property
    def grid(self):
        return self.U.grid


def build_profile_set_prandtl(k: float, spec: PrandtlSpectral, shear: ShearFlow,
                              grid: Optional[Grid1D] = None, alpha: float = 1.0,
                              min_nodes: int = 8) -> PrandtlProfileSetK:
    alpha = norm_alpha(shear, alpha)
    if grid is None:
        grid = prandtl_grid(shear, k, alpha)
    width = layer_width(k, shear.d2a, 0.25)
    if width / grid.h < min_nodes:
        raise ResolutionError(f"layer width {width:.3g} has {width / grid.h:.1f} nodes at k={k}", k)
    y = grid.nodes
    a = shear.a
    s = y - a
    H = (s >= -1e-12 * grid.h).astype(float)
    u2 = shear.d2a
    lz = spec.lz
    tau = spec.tau
    k14 = k ** 0.25
    zt = k14 * s
    W, Wp = spec.w.interpolant()(lz * zt)
    U0, U1, _, U3 = shear.all_derivatives(y, 3)
    Ua = float(shear(a))
    Uk = 1j * U1 * H + 1j * u2 * s * (W - H) + 1j * lz * (tau + u2 * zt**2 / 2) * Wp / k14
    Uk[0] = 0.0
    D = U0 - Ua - u2 * s**2 / 2
    Q = tau / math.sqrt(k) + u2 * s**2 / 2
    F1 = D * u2 * s - (U1 - u2 * s) * Q
    F2 = lz * k14 * D * Q
    R = 1j * H * U3 / k + F1 * (W - H) + F2 * Wp
    prof = ComplexProfile(grid, Uk)
    mask = fit_mask(shear, grid)
    p0 = WeightedNormParams(alpha, 0)
    return PrandtlProfileSetK(k, prof, cumulative_integral(prof) * (-1j), ComplexProfile(grid, R),
                              ComplexProfile(grid, F1), ComplexProfile(grid, F2),
                              wnorm(prof, p0, mask), wnorm(ComplexProfile(grid, R), p0, mask),
                              wnorm(prof, WeightedNormParams(alpha, 1), mask), alpha)


def prandtl_forcing(ps: PrandtlProfileSetK, spec: PrandtlSpectral, shear: ShearFlow):
    """f_k(t) = -k exp(lam t) R_k, lam = i tau sqrt(k) - i k U(a)."""
    return ExponentialForcing(-ps.k * ps.R.values, _rate(ps.k, spec, shear))


def _rate(k, spec, shear):
    return 1j * spec.tau * math.sqrt(k) - 1j * k * float(shear(shear.a))


def prandtl_dt(k: float, shear: ShearFlow, grid: Grid1D) -> float:
    y = grid.nodes
    cu = np.max(np.abs(shear(y))) + np.max(np.abs(shear.derivative(1, y))) * grid.hi
    return min(0.25 / (k * cu), 0.5 * grid.h)


def evolve_prandtl(k: float, shear: ShearFlow, u0: ComplexProfile, horizon: float,
                   forcing: Optional[Callable] = None, alpha: float = 1.0,
                   dt: Optional[float] = None, reference: Optional[Callable] = None,
                   weight_rate: float = 0.0, mask=None) -> Trajectory:
    """d_t u + i k U u + k U' v - u'' = f, Dirichlet at both ends."""
    grid = u0.grid
    alpha = norm_alpha(shear, alpha)
    if mask is None:
        mask = fit_mask(shear, grid)
    sel = slice(None) if mask is None else mask
    dmax = prandtl_dt(k, shear, grid)
    if dt is None:
        n = max(1, int(math.ceil(horizon / dmax - 1e-9)))
        dt = horizon / n
    else:
        n = int(round(horizon / dt))
        if dt > 4 * dmax:
            raise ConfigurationError(f"dt = {dt:.3e} violates the explicit limit {4 * dmax:.3e}")
    y = grid.nodes
    h = grid.h
    ikU = 1j * k * shear(y)
    kU1 = -1j * k * shear.derivative(1, y)

    def fe(t, v):
        c = np.empty_like(v)
        c[0] = 0.0
        np.cumsum((v[1:] + v[:-1]) * (0.5 * h), out=c[1:])
        out = -(ikU * v + kU1 * c)
        if forcing is not None:
            out += forcing(t)
        return out

    def fi(v):
        o = np.zeros_like(v)
        o[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        return o

    m = grid.n - 2
    ab = np.zeros((3, m), complex)
    g = _AI[1, 1] * dt / h**2
    ab[0, 1:] = -g
    ab[1] = 1 + 2 * g
    ab[2, :-1] = -g
    wt = np.exp(alpha * y)
    v = np.array(u0.values)
    v[0] = v[-1] = 0.0
    times = np.empty(n + 1)
    norms = np.empty(n + 1)
    times[0], norms[0] = 0.0, np.max((wt * np.abs(v))[sel])
    err = 0.0
    for it in range(1, n + 1):
        t = (it - 1) * dt
        Ke, Ki = [], []
        for st in range(5):
            rhs = v.copy()
            for j in range(st):
                rhs += dt * (_AE[st, j] * Ke[j] + _AI[st, j] * Ki[j])
            if st == 0:
                Y = rhs
            else:
                Y = np.zeros_like(v)
                Y[1:-1] = solve_banded((1, 1), ab, rhs[1:-1], check_finite=False)
            Y[0] = Y[-1] = 0.0
            if st < 4:
                Ke.append(fe(t + _CE[st] * dt, Y))
                Ki.append(fi(Y))
        v = Y
        tn = it * dt
        nv = np.max((wt * np.abs(v))[sel])
        if not nv < 1e300:
            raise BlowUpError(f"norm overflow at t = {tn:.6g}", tn)
        times[it] = tn
        norms[it] = nv * math.exp(-weight_rate * tn) if weight_rate else nv
        if reference is not None:
            ex = reference(tn)
            err = max(err, np.max((wt * np.abs(v - ex))[sel]) / np.max((wt * np.abs(ex))[sel]))
    final = StateVector(ComplexProfile(grid, v), ComplexProfile(grid, np.zeros(grid.n)), n * dt)
    return Trajectory(times, norms, dt, k, grid, alpha, "prandtl",
                      err if reference is not None else None, {}, final)


@dataclass(frozen=True)
class OracleResult:
    k: float
    slope_ratio: float
    max_error: float
    horizon: float
    norm_R: float
    steps: int


def quadratic_oracle(spec: PrandtlSpectral, shear: Optional[ShearFlow] = None, k: float = 256,
                     efolds: float = 1.0, nodes: int = 2001) -> OracleResult:
    """Homogeneous run from U_k for the quadratic flow against exp(lam t) U_k."""
    if shear is None:
        shear = ShearFlow("quadratic", a=2.0, kappa=1.0)
    grid = grid_through(0.0, shear.a + 8.0, nodes, shear.a)
    ps = build_profile_set_prandtl(k, spec, shear, grid)
    lam = _rate(k, spec, shear)
    horizon = efolds / (spec.sigma0 * math.sqrt(k))
    U = ps.U.values
    tr = evolve_prandtl(k, shear, ps.U, horizon, None, 0.0,
                        reference=lambda t: np.exp(lam * t) * U)
    slope = tr.log_slope()
    return OracleResult(k, slope / (spec.sigma0 * math.sqrt(k)), tr.ref_error, horizon,
                        ps.norm_R, len(tr.times) - 1)


def _prandtl_inflation_one(job):
    k, spec, shear, sigma, alpha, npl = job
    grid = prandtl_grid(shear, k, alpha, npl)
    ps = build_profile_set_prandtl(k, spec, shear, grid, alpha)
    nd = ps.norm_U
    T = window(k, spec.sigma0, sigma, 0.5)
    tr = evolve_prandtl(k, shear, ps.U * (1 / nd), T, None, alpha, weight_rate=sigma * math.sqrt(k))
    j = int(np.argmax(tr.norms))
    return (k, T, float(tr.norms[j]), float(tr.times[j]), nd, ps.norm_U, ps.norm_U_W1,
            len(tr.times) - 1, grid.n, ps.k_norm_R)


def inflation_experiment_prandtl(ks: Iterable[float], spec: PrandtlSpectral, shear: ShearFlow,
                                 sigma_frac: float = 0.5, alpha: float = 1.0,
                                 nodes_per_layer: float = 32, workers: int = 1) -> InflationReport:
    """S_k = sup over t <= ln k/(2(sigma0-sigma)sqrt k) of e^{-sigma t sqrt k}||u_k(t)||."""
    if not 0 < sigma_frac < 1:
        raise ValueError("sigma fraction must lie in (0, 1)")
    sigma = sigma_frac * spec.sigma0
    jobs = [(k, spec, shear, sigma, alpha, nodes_per_layer) for k in sorted(ks)]
    out = parallel_map(_prandtl_inflation_one, jobs, workers)
    c_low = 1.0
    C_R = max(o[9] / o[4] for o in out)
    Cs = inflation_constant(spec.sigma0, sigma, c_low, C_R)
    recs = tuple(InflationRecord(k, sigma, T, S, ta, Cs * math.sqrt(k), nd, nu, nu1, st, nn)
                 for (k, T, S, ta, nd, nu, nu1, st, nn, _) in out)
    return InflationReport(recs, spec.sigma0, sigma_frac, Cs, "prandtl", "U")


@dataclass(frozen=True)
class PrandtlBoundsTable:
    ks: tuple
    norm_U: tuple
    k_norm_R: tuple
    limit_gap: tuple
    norm_U_W1: tuple

    def plateau_ratio(self) -> float:
        top = self.ks[-1]
        sel = [r for k, r in zip(self.ks, self.k_norm_R) if k >= top / 2]
        ref = self.k_norm_R[-1]
        return max(max(sel) / ref, ref / min(sel))

    def limit_rate(self) -> float:
        return fit_exponent(self.ks, self.limit_gap)


def bounds_sweep_prandtl(ks: Iterable[float], spec: PrandtlSpectral, shear: ShearFlow,
                         alpha: float = 1.0, nodes_per_layer: float = 32) -> PrandtlBoundsTable:
    rows = []
    for k in sorted(ks):
        grid = prandtl_grid(shear, k, alpha, nodes_per_layer)
        ps = build_profile_set_prandtl(k, spec, shear, grid, alpha)
        gap = wnorm(ps.U - limit_profile(shear, grid), WeightedNormParams(ps.alpha, 0),
                    fit_mask(shear, grid))
        rows.append((k, ps.norm_U, ps.k_norm_R, gap, ps.norm_U_W1))
    return PrandtlBoundsTable(*map(tuple, zip(*rows)))


def growth_crossover(sigma0_h: float, sigma0_p: float) -> float:
    """k above which sigma0_p sqrt(k) exceeds sigma0_h k^{1/3}."""
    return (sigma0_h / sigma0_p) ** 6
