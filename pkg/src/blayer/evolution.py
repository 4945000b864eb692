"""Time evolution of the frequency-k hyperbolic system.

    (d_t + 1)(d_t u + i k U u + k U' v) - u'' = f,   v = -i int_0^y u

written as the first order pair u_t = w, w_t = -w - B(w) - B(u) + u'' + f
with B(u) = i k U u + k U' v, and advanced with classical RK4.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import BlowUpError, ConfigurationError, DemoInfeasible
from .numerics import ComplexProfile, Grid1D, ShearFlow, WeightedNormParams, wnorm
from .profiles import ProfileSetK, build_profile_set, fit_exponent, y_grid
from .spectral import SpectralConstants, WProfile

__all__ = [
    "StateVector", "Trajectory", "InflationRecord", "InflationReport",
    "ExponentialForcing", "apply_B", "evolve", "admissible_dt", "substitution_residual",
    "duhamel_check", "inflation_experiment", "inflation_demo", "window",
    "mode_norm", "parallel_map", "remainder_forcing", "DuhamelResult", "DemoReport",
]


def parallel_map(fn, items, workers: int = 1):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def window(k: float, sigma0: float, sigma: float, power: float = 1 / 3) -> float:
    """T_k = power ln(k) / ((sigma0 - sigma) k^power)."""
    if not 0 < sigma < sigma0:
        raise ValueError("need 0 < sigma < sigma0")
    return power * math.log(k) / ((sigma0 - sigma) * k**power)


def mode_norm(g: ComplexProfile, k: float, m: float, alpha: float = 1.0, s: int = 0) -> float:
    """H^m W^{s,inf}_alpha norm of the single mode (1+k^2)^{-m/2} e^{ikx} g."""
    return (1 + k * k) ** (m / 2) * (1 + k * k) ** (-m / 2) * wnorm(g, WeightedNormParams(alpha, s))


@dataclass(frozen=True, eq=False)
class StateVector:
    u: ComplexProfile
    w: ComplexProfile
    t: float = 0.0

    def __post_init__(self):
        if abs(self.u.values[0]) > 0:
            raise ValueError("u must vanish at y = 0")


@dataclass(frozen=True)
class ExponentialForcing:
    """f(t, y) = exp(rate t) profile(y)."""
    profile: np.ndarray
    rate: complex

    def __call__(self, t):
        return np.exp(self.rate * t) * self.profile


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    norms: np.ndarray
    dt: float
    k: float
    grid: Grid1D
    alpha: float
    model: str = "hyperbolic"
    ref_error: Optional[float] = None
    snapshots: dict = field(default_factory=dict)
    final: Optional[StateVector] = None

    def log_slope(self, t0: float = 0.0) -> float:
        sel = self.times >= t0
        return float(np.polyfit(self.times[sel], np.log(self.norms[sel]), 1)[0])


def admissible_dt(k: float, shear: ShearFlow, grid: Grid1D, cfl: float = 0.5) -> float:
    y = grid.nodes
    cu = np.max(np.abs(shear(y))) + np.max(np.abs(shear.derivative(1, y))) * grid.hi
    return cfl * min(grid.h, 1 / (k * cu))


class _System:
    def __init__(self, k, shear, grid):
        y = grid.nodes
        self.k = k
        self.h = grid.h
        self.ikU = 1j * k * shear(y)
        self.kU1 = -1j * k * shear.derivative(1, y)

    def B(self, u):
        v = np.empty_like(u)
        v[0] = 0.0
        np.cumsum((u[1:] + u[:-1]) * (0.5 * self.h), out=v[1:])
        return self.ikU * u + self.kU1 * v

    def d2(self, u):
        o = np.zeros_like(u)
        o[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / self.h**2
        return o

    def rhs(self, t, u, w, forcing):
        dw = -w - self.B(w + u) + self.d2(u)
        if forcing is not None:
            dw += forcing(t)
        dw[0] = dw[-1] = 0.0
        return w, dw


def apply_B(k: float, shear: ShearFlow, u: ComplexProfile) -> ComplexProfile:
    """i k U u + k U' v with v = -i int_0^y u."""
    return u.with_values(_System(k, shear, u.grid).B(u.values))


def evolve(k: float, shear: ShearFlow, initial: StateVector, horizon: float,
           forcing: Optional[Callable] = None, alpha: float = 1.0, cfl: float = 0.5,
           dt: Optional[float] = None, reference: Optional[Callable] = None,
           snapshot_steps: Sequence[int] = (), weight_rate: float = 0.0,
           progress: Optional[Callable] = None) -> Trajectory:
    """RK4 integration to `horizon`; norms are sampled after every step.

    reference(t) -> array, if given, is compared with u(t) in the weighted
    norm and the largest relative deviation is stored. weight_rate > 0
    records e^{-weight_rate t}||u(t)|| instead of ||u(t)||.
    """
    grid = initial.u.grid
    dmax = admissible_dt(k, shear, grid, 1.0)
    if dt is None:
        dt0 = admissible_dt(k, shear, grid, cfl)
        n = max(1, int(math.ceil(horizon / dt0 - 1e-9)))
        dt = horizon / n
    else:
        n = int(round(horizon / dt))
        if abs(n * dt - horizon) > 1e-9 * max(horizon, dt):
            raise ConfigurationError("horizon is not a whole number of steps")
    if dt > dmax * (1 + 1e-12):
        raise ConfigurationError(f"dt = {dt:.3e} exceeds the stability limit {dmax:.3e}")
    sysk = _System(k, shear, grid)
    wt = np.exp(alpha * grid.nodes)
    u = np.array(initial.u.values)
    w = np.array(initial.w.values)
    u[-1] = 0.0
    t0 = initial.t
    times = np.empty(n + 1)
    norms = np.empty(n + 1)
    times[0], norms[0] = t0, np.max(wt * np.abs(u))
    snaps = {}
    want = set(int(s) for s in snapshot_steps)
    if 0 in want:
        snaps[0] = (t0, u.copy(), w.copy())
    err = 0.0
    f = forcing
    for i in range(1, n + 1):
        t = t0 + (i - 1) * dt
        k1u, k1w = sysk.rhs(t, u, w, f)
        k2u, k2w = sysk.rhs(t + dt / 2, u + dt / 2 * k1u, w + dt / 2 * k1w, f)
        k3u, k3w = sysk.rhs(t + dt / 2, u + dt / 2 * k2u, w + dt / 2 * k2w, f)
        k4u, k4w = sysk.rhs(t + dt, u + dt * k3u, w + dt * k3w, f)
        u = u + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w = w + dt / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        u[0] = u[-1] = 0.0
        tn = t0 + i * dt
        nu = np.max(wt * np.abs(u))
        if not nu < 1e300:
            raise BlowUpError(f"norm overflow at t = {tn:.6g}", tn)
        times[i] = tn
        norms[i] = nu * math.exp(-weight_rate * (tn - t0)) if weight_rate else nu
        if reference is not None:
            ex = reference(tn)
            err = max(err, np.max(wt * np.abs(u - ex)) / np.max(wt * np.abs(ex)))
        if i in want:
            snaps[i] = (tn, u.copy(), w.copy())
        if progress is not None and (i % max(1, n // 10) == 0 or i == n):
            progress(i, n, tn)
    final = StateVector(ComplexProfile(grid, u), ComplexProfile(grid, w), t0 + n * dt)
    return Trajectory(times, norms, dt, k, grid, alpha, "hyperbolic",
                      err if reference is not None else None, snaps, final)


def remainder_forcing(ps: ProfileSetK, sc: SpectralConstants) -> ExponentialForcing:
    """f_k(t) = -k^{4/3} exp(i tau k^{1/3} t) R_k."""
    return ExponentialForcing(-ps.k ** (4 / 3) * ps.R.values, 1j * sc.tau * ps.k ** (1 / 3))


def exact_state(ps: ProfileSetK, sc: SpectralConstants) -> StateVector:
    lam = 1j * sc.tau * ps.k ** (1 / 3)
    return StateVector(ps.U, ps.U * lam)


def substitution_residual(ps: ProfileSetK, sc: SpectralConstants, shear: ShearFlow,
                    exclude_critical: bool = True) -> float:
    """Weighted sup of the substitution residual over k^{4/3}||R_k||.

    The node at y = a is skipped by default: U_k is only C^2 there and the
    second difference across it carries an O(h) error.
    """
    g = ps.grid
    y, h, k = g.nodes, g.h, ps.k
    U, V = ps.U.values, ps.V.values
    lam = 1j * sc.tau * k ** (1 / 3)
    d2 = (U[2:] - 2 * U[1:-1] + U[:-2]) / h**2
    s = slice(1, -1)
    r = ((lam + 1) * (lam * U[s] + 1j * k * shear(y[s]) * U[s] + k * V[s] * shear.derivative(1, y[s]))
         - d2 + k ** (4 / 3) * ps.R.values[s])
    r = np.exp(ps.alpha * y[s]) * np.abs(r)
    if exclude_critical and g.marked is not None:
        r[g.marked - 1] = 0.0
    return float(r.max() / (k ** (4 / 3) * ps.norm_R))


@dataclass(frozen=True)
class DuhamelResult:
    discrepancy: float
    lhs_norm: float
    rhs_norm: float
    horizon: float
    M: int
    dt: float


def duhamel_check(ps: ProfileSetK, sc: SpectralConstants, shear: ShearFlow,
                  horizon: float, M: int = 64, forcing: Optional[Callable] = None,
                  cfl: float = 0.5, workers: int = 1) -> DuhamelResult:
    """Forced run against T(t)data + int_0^t T(t-s)(0, f(s)) ds (composite Simpson)."""
    if M % 2:
        raise ValueError("Simpson quadrature needs an even M")
    if forcing is None:
        forcing = remainder_forcing(ps, sc)
    grid = ps.grid
    dt0 = admissible_dt(ps.k, shear, grid, cfl)
    per = max(1, int(math.ceil(horizon / (M * dt0))))
    nsteps = per * M
    dt = horizon / nsteps
    data = exact_state(ps, sc)
    lhs = evolve(ps.k, shear, data, horizon, forcing, ps.alpha, dt=dt).final.u.values
    hom = evolve(ps.k, shear, data, horizon, None, ps.alpha, dt=dt).final.u.values
    s = np.linspace(0, horizon, M + 1)
    jobs = [(ps.k, shear, grid, forcing(s[j]), (M - j) * per, dt) for j in range(M + 1)]
    parts = parallel_map(_impulse_run, jobs, workers)
    wq = np.ones(M + 1)
    wq[1:-1:2] = 4
    wq[2:-1:2] = 2
    wq *= (horizon / M) / 3
    integral = sum(c * p for c, p in zip(wq, parts))
    rhs = hom + integral
    p = WeightedNormParams(ps.alpha, 0)
    L = ComplexProfile(grid, lhs)
    R = ComplexProfile(grid, rhs)
    return DuhamelResult(wnorm(L - R, p) / wnorm(L, p), wnorm(L, p), wnorm(R, p), horizon, M, dt)


def _impulse_run(job):
    k, shear, grid, f, nsteps, dt = job
    w0 = np.array(f, complex)
    w0[0] = w0[-1] = 0.0
    zero = ComplexProfile(grid, np.zeros(grid.n))
    if nsteps == 0:
        return np.zeros(grid.n, complex)
    tr = evolve(k, shear, StateVector(zero, ComplexProfile(grid, w0)), nsteps * dt, dt=dt)
    return tr.final.u.values


# norm inflation

@dataclass(frozen=True)
class InflationRecord:
    k: float
    sigma: float
    T: float
    S: float
    t_argmax: float
    C_ref: float
    data_norm: float
    norm_U: float
    norm_U_W1: float
    steps: int
    n_nodes: int


@dataclass(frozen=True)
class InflationReport:
    records: tuple
    sigma0: float
    sigma_frac: float
    C_sigma: float
    model: str = "hyperbolic"
    normalization: str = "max"

    @property
    def ks(self):
        return [r.k for r in self.records]

    @property
    def S(self):
        return [r.S for r in self.records]

    def exponent(self) -> float:
        return fit_exponent(self.ks, self.S)

    def increasing(self) -> bool:
        s = self.S
        return all(b > a for a, b in zip(s, s[1:]))


def data_normalization(ps: ProfileSetK, lam: complex, kind: str = "max") -> float:
    p1 = wnorm(ps.U, WeightedNormParams(ps.alpha, 1))
    p0 = abs(lam) * ps.norm_U
    if kind == "max":
        return max(p1, p0)
    if kind == "sum":
        return p1 + p0
    if kind == "U":
        return ps.norm_U
    raise ValueError(f"unknown normalization {kind!r}")


def _inflation_one(job):
    k, w, sc, shear, sigma, alpha, npl, kind, horizon = job
    grid = y_grid(shear, k, alpha, npl)
    ps = build_profile_set(k, w, sc, shear, grid, alpha)
    lam = 1j * sc.tau * k ** (1 / 3)
    nd = data_normalization(ps, lam, kind)
    data = StateVector(ps.U * (1 / nd), ps.U * (lam / nd))
    T = window(k, sc.sigma0, sigma)
    tr = evolve(k, shear, data, T if horizon is None else horizon, None, alpha,
                weight_rate=sigma * k ** (1 / 3))
    j = int(np.argmax(tr.norms))
    return (k, T, float(tr.norms[j]), float(tr.times[j]), nd, ps.norm_U,
            wnorm(ps.U, WeightedNormParams(alpha, 1)), len(tr.times) - 1, grid.n,
            ps.k43_norm_R)


def inflation_constant(sigma0: float, sigma: float, c_low: float, C_R: float) -> float:
    """(c/2)(sigma0 - sigma)/((sigma0 - sigma) + C_R)."""
    d = sigma0 - sigma
    return 0.5 * c_low * d / (d + C_R)


def inflation_experiment(ks: Iterable[float], w: WProfile, sc: SpectralConstants, shear: ShearFlow,
                         sigma_frac: float = 0.5, alpha: float = 1.0, nodes_per_layer: float = 32,
                         normalization: str = "max", workers: int = 1,
                         constants: Optional[tuple] = None) -> InflationReport:
    """Windowed sup S_k of e^{-sigma t k^{1/3}}||u_k(t)|| from unit-size profile data.

    constants = (c, C_R) feeds the reference C_sigma k^{1/3}; by default they
    are the smallest ||U_k|| and the largest k^{4/3}||R_k|| met in the sweep,
    both divided by the data normalization so they sit on the scale of S_k.
    """
    if not 0 < sigma_frac < 1:
        raise ValueError("sigma fraction must lie in (0, 1)")
    sigma = sigma_frac * sc.sigma0
    ks = sorted(ks)
    jobs = [(k, w, sc, shear, sigma, alpha, nodes_per_layer, normalization, None) for k in ks]
    out = parallel_map(_inflation_one, jobs, workers)
    if constants is None:
        c_low = min(o[5] / o[4] for o in out)
        C_R = max(o[9] / o[4] for o in out)
    else:
        c_low, C_R = constants
    Cs = inflation_constant(sc.sigma0, sigma, c_low, C_R)
    recs = tuple(InflationRecord(k, sigma, T, S, ta, Cs * k ** (1 / 3), nd, nu, nu1, st, nn)
                 for (k, T, S, ta, nd, nu, nu1, st, nn, _) in out)
    return InflationReport(recs, sc.sigma0, sigma_frac, Cs, "hyperbolic", normalization)


@dataclass(frozen=True)
class DemoReport:
    k: float
    mu: float
    m: float
    delta: float
    T_k: float
    C_sigma_k: float
    initial_norm: float
    sup_norm: float
    product: float
    t_sup: float

    @property
    def passed(self) -> bool:
        return self.initial_norm <= 1 + 1e-12 and self.product >= 1


def admissible_delta(report: InflationReport, mu: float):
    """Smallest delta over the sweep with T_k <= delta and C_sigma(k) k^{1/3-mu} >= 1/delta.

    C_sigma(k) = S_k k^{-1/3} is the constant realized by the sweep itself.
    """
    best = None
    for r in report.records:
        d = max(r.T, r.k**mu / r.S)
        if best is None or d < best[0] - 1e-12:
            best = (d, r)
    return best


def inflation_demo(report: InflationReport, w: WProfile, sc: SpectralConstants, shear: ShearFlow,
                   mu: float = 0.0, m: float = 0.0, delta: Optional[float] = None,
                   alpha: float = 1.0, nodes_per_layer: float = 32) -> DemoReport:
    """Unit-size single-mode data whose H^{m-mu} size exceeds 1/delta before time delta."""
    if not 0 <= mu < 1 / 3:
        raise ValueError("mu must lie in [0, 1/3)")
    if delta is None:
        delta, rec = admissible_delta(report, mu)
    else:
        ok = [r for r in report.records if r.T <= delta and r.S * r.k ** (-mu) >= 1 / delta]
        if not ok:
            raise DemoInfeasible(f"no admissible k in the sweep for delta = {delta}")
        rec = ok[0]
    k = rec.k
    grid = y_grid(shear, k, alpha, nodes_per_layer)
    ps = build_profile_set(k, w, sc, shear, grid, alpha)
    lam = 1j * sc.tau * k ** (1 / 3)
    nd = data_normalization(ps, lam, report.normalization)
    data = StateVector(ps.U * (1 / nd), ps.U * (lam / nd))
    init = max(mode_norm(data.u, k, m, alpha, 1), mode_norm(data.w, k, m, alpha, 0))
    tr = evolve(k, shear, data, delta, None, alpha)
    factor = (1 + k * k) ** (-mu / 2)
    j = int(np.argmax(tr.norms))
    sup = factor * float(tr.norms[j])
    return DemoReport(k, mu, m, delta, rec.T, rec.S * k ** (-1 / 3), init, sup, sup * delta,
                      float(tr.times[j]))
