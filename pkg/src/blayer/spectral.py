"""Auxiliary eigenproblem, the layer profile X and the connecting profile W.

The eigenproblem

    A f = f''/(x^2+1) + 6 x f'/(x^2+1)^2 + 6 f/(x^2+1)^2 = alpha f

is discretized by centered differences with zero end values. X solves
the rotated equation

    gamma q^2 X + q X'' + 6 s (z X' + X) = 0,   q = gamma + s z^2,

where s = sign U_s''(a) (s = -1 gives the familiar (gamma - z^2) form).
For the classical model the first term reads -i q^2 X instead of
gamma q^2 X. W is the normalized running integral of X.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.linalg import eigh_tridiagonal

from .errors import (DegenerateCurvature, GridError, NonConvergence,
                     SpectralFailure, ZeroAverageError)
from .numerics import ComplexProfile, Grid1D, ShearFlow, cumulative_integral

__all__ = [
    "Eigenpair", "XProfile", "WProfile", "SpectralConstants", "LayerInterpolant",
    "solve_eigenproblem", "solve_X", "matching_defect", "build_W",
    "spectral_constants_hyperbolic", "continuation_oracle", "hyperbolic_gamma",
    "eigen_operator_apply",
]

MODELS = ("hyperbolic", "prandtl")


@dataclass(frozen=True, eq=False)
class Eigenpair:
    alpha: float
    f: ComplexProfile
    residual: float
    alpha_raw: float
    alpha_fine: float
    candidates: tuple
    envelope: float

    @property
    def halfwidth(self):
        return self.f.grid.hi


def _fd_coefficients(x, h):
    xi = x[1:-1]
    q = xi**2 + 1
    lo = (1 / h**2 - 3 * xi / (q * h)) / q
    hi = (1 / h**2 + 3 * xi / (q * h)) / q
    d = -2 / (h**2 * q) + 6 / q**2
    return lo, d, hi


def eigen_operator_apply(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Discrete A applied to f at interior nodes."""
    h = x[1] - x[0]
    lo, d, hi = _fd_coefficients(x, h)
    return lo * f[:-2] + d * f[1:-1] + hi * f[2:]


def _envelope_ratio(x, absf, rate):
    # max of |f| e^{rate x^2} on the outer half over its value at the inner edge
    half = 0.5 * np.max(np.abs(x))
    outer = np.abs(x) >= half
    g = absf[outer] * np.exp(rate * x[outer] ** 2)
    edge = np.abs(np.abs(x[outer]) - np.min(np.abs(x[outer]))) < 1e-12 * half
    ref = np.max(g[edge])
    return float(np.max(g) / ref) if ref > 0 else np.inf


def _raw_eigen(halfwidth, n, window):
    x = np.linspace(-halfwidth, halfwidth, n)
    h = x[1] - x[0]
    lo, d, hi = _fd_coefficients(x, h)
    sub, sup = lo[1:], hi[:-1]
    if np.any(sub * sup <= 0):
        raise NonConvergence("discrete operator cannot be symmetrized; refine the grid")
    w, v = eigh_tridiagonal(d, np.sqrt(sub * sup), select="v", select_range=window)
    # undo the diagonal similarity D^{-1} A D = S
    scale = np.concatenate([[0.0], np.cumsum(0.5 * np.log(sub / sup))])
    v = v * np.exp(scale - scale.max())[:, None]
    return x, w, v


def solve_eigenproblem(halfwidth: float = 12.0, n: int = 4000, window=(0.0, 1e3),
                       tol: float = 1e-7, extrapolate: bool = True) -> Eigenpair:
    """Positive eigenvalue of A with a Gaussian-decaying eigenvector.

    With extrapolate=True the returned alpha is the Richardson combination
    of the n-node grid and the grid of half spacing (2n-1 nodes); the raw
    values are kept in alpha_raw and alpha_fine. The residual is the
    discrete one, ||A_h f - alpha_raw f|| / ||f|| over interior nodes.
    """
    if halfwidth < 8 or n < 500:
        raise GridError("need halfwidth >= 8 and at least 500 nodes")
    x, w, v = _raw_eigen(halfwidth, n, (max(window[0], 0.0), window[1]))
    good = []
    for j in np.argsort(w):
        if w[j] <= 0:
            continue
        f = np.zeros(n)
        f[1:-1] = v[:, j]
        f /= f[np.argmax(np.abs(f))]
        env = _envelope_ratio(x, np.abs(f), np.sqrt(w[j]) / 4)
        if env <= 10:
            good.append((float(w[j]), f, env))
    if not good:
        raise SpectralFailure("no positive eigenvalue with a decaying eigenvector in window")
    alpha_raw, f, env = good[0]
    res = np.max(np.abs(eigen_operator_apply(f, x) - alpha_raw * f[1:-1])) / np.max(np.abs(f))
    if res > tol:
        raise NonConvergence(f"eigen residual {res:.3e} above {tol:.1e}")
    alpha_fine = alpha_raw
    alpha = alpha_raw
    if extrapolate:
        lo_w = max(0.5 * alpha_raw, 0.0)
        _, wf, _ = _raw_eigen(halfwidth, 2 * n - 1, (lo_w, 2 * alpha_raw))
        if len(wf) == 0:
            raise NonConvergence("eigenvalue lost under refinement")
        alpha_fine = float(wf[np.argmin(np.abs(wf - alpha_raw))])
        alpha = (4 * alpha_fine - alpha_raw) / 3
    grid = Grid1D(-halfwidth, halfwidth, n)
    return Eigenpair(alpha, ComplexProfile(grid, f), float(res), alpha_raw, alpha_fine,
                     tuple(g[0] for g in good), env)


def hyperbolic_gamma(alpha: float, sign: int = -1) -> complex:
    g = alpha ** (1 / 3) * np.exp(-2j * np.pi / 3)
    return complex(g if sign < 0 else -np.conj(g))


# X and W

@dataclass(frozen=True, eq=False)
class XProfile:
    X: ComplexProfile
    Xprime: ComplexProfile
    gamma: complex
    defect: float
    integral: complex
    envelope: float
    model: str = "hyperbolic"
    sign: int = -1


@dataclass(frozen=True, eq=False)
class WProfile:
    W: ComplexProfile
    Wprime: ComplexProfile
    residual: float
    x: XProfile

    def interpolant(self) -> "LayerInterpolant":
        return LayerInterpolant(self)


class LayerInterpolant:
    """W and W' at arbitrary real arguments.

    W' is a cubic Hermite spline through (X/I, X'/I) and W is its exact
    antiderivative, so the pair is consistent and W is C^2. Outside the
    window W is extended by 0 and 1, W' by 0.
    """

    def __init__(self, w: WProfile):
        x = w.x
        z = x.X.nodes
        I = x.integral
        self.lo, self.hi = z[0], z[-1]
        self._wp = CubicHermiteSpline(z, x.X.values / I, x.Xprime.values / I)
        anti = self._wp.antiderivative()
        self._w = anti
        self._w0 = anti(self.lo)
        self._wspan = anti(self.hi) - self._w0

    def __call__(self, z):
        z = np.asarray(z, float)
        zc = np.clip(z, self.lo, self.hi)
        W = (self._w(zc) - self._w0) / self._wspan
        W = np.where(z > self.hi, 1.0, np.where(z < self.lo, 0.0, W))
        Wp = np.where(np.abs(z) > self.hi, 0.0, self._wp(zc) / self._wspan)
        return W, Wp

    def second(self, z):
        z = np.asarray(z, float)
        return np.where(np.abs(z) > self.hi, 0.0, self._wp(np.clip(z, self.lo, self.hi), 1) / self._wspan)


def _x_system(gamma, model, sign):
    if model == "hyperbolic":
        def rhs(z, y):
            q = gamma + sign * z * z
            return [y[1], -(gamma * q * q * y[0] + 6 * sign * (z * y[1] + y[0])) / q]

        def slope(z):
            return np.sqrt(-gamma * (gamma + sign * z * z))
    elif model == "prandtl":
        def rhs(z, y):
            q = gamma + sign * z * z
            return [y[1], 1j * q * y[0] - 6 * sign * (z * y[1] + y[0]) / q]

        def slope(z):
            return np.sqrt(1j * (gamma + sign * z * z))
    else:
        raise ValueError(f"unknown model {model!r}")
    return rhs, slope


def _shoot(gamma, halfwidth, model, sign, z_eval=None, rtol=1e-12):
    """Integrate inward from both ends; returns branch values at 0 and on z_eval."""
    if not np.imag(gamma) < 0:
        raise SpectralFailure(f"gamma = {gamma} is not in the lower half plane")
    rhs, slope = _x_system(complex(gamma), model, sign)
    out = []
    for side in (1, -1):
        z0 = side * halfwidth
        r = slope(z0)
        r = r if r.real > 0 else -r
        y0 = np.array([1.0, -side * r], complex)
        t_eval = None
        if z_eval is not None:
            pts = z_eval[z_eval * side >= 0]
            t_eval = pts[np.argsort(-side * pts)]
        sol = solve_ivp(rhs, (z0, 0.0), y0, method="DOP853", rtol=rtol,
                        atol=1e-300, t_eval=t_eval)
        if sol.status != 0:
            raise NonConvergence(f"shooting failed: {sol.message}")
        out.append(sol)
    return out


def _branch_match(sp, sm, gamma):
    Xp, Dp = sp.y[0, -1], sp.y[1, -1]
    Xm, Dm = sm.y[0, -1], sm.y[1, -1]
    g = abs(gamma)
    npl = np.sqrt(abs(Xp) ** 2 + abs(Dp) ** 2 / g)
    nmi = np.sqrt(abs(Xm) ** 2 + abs(Dm) ** 2 / g)
    wr = Xp * Dm - Xm * Dp
    defect = abs(wr) / (np.sqrt(g) * npl * nmi)
    # least squares scale putting the minus branch on the plus branch at 0
    c = (Xp * np.conj(Xm) + Dp * np.conj(Dm) / g) / nmi**2
    return float(defect), c


def matching_defect(gamma: complex, halfwidth: float = 12.0, model: str = "hyperbolic",
                    sign: int = -1) -> float:
    """Normalized Wronskian of the two decaying branches at z = 0, in [0, 1]."""
    sp, sm = _shoot(gamma, halfwidth, model, sign)
    return _branch_match(sp, sm, gamma)[0]


def log_derivative_mismatch(gamma: complex, halfwidth: float = 12.0,
                            model: str = "prandtl", sign: int = -1) -> complex:
    """X_-'/X_- - X_+'/X_+ at 0; analytic in gamma, zero at a connecting gamma."""
    sp, sm = _shoot(gamma, halfwidth, model, sign)
    return complex(sm.y[1, -1] / sm.y[0, -1] - sp.y[1, -1] / sp.y[0, -1])


def solve_X(gamma: complex, halfwidth: float = 12.0, n: int = 4001, model: str = "hyperbolic",
            sign: int = -1, tol: float = 1e-6, avg_tol: float = 1e-8) -> XProfile:
    """Decaying solution of the X equation on [-Z, Z] by two-sided shooting."""
    if n % 2 == 0 or n < 5:
        raise GridError("z-grid needs an odd node count so that z = 0 is a node")
    if np.exp(-np.sqrt(abs(gamma)) * halfwidth**2 / 4) > 1e-12:
        raise GridError(f"half width {halfwidth} too small for |gamma| = {abs(gamma):.3g}")
    grid = Grid1D(-halfwidth, halfwidth, n)
    z = grid.nodes
    mid = n // 2
    sp, sm = _shoot(gamma, halfwidth, model, sign, z_eval=z)
    defect, c = _branch_match(sp, sm, gamma)
    if defect > tol:
        raise SpectralFailure(f"matching defect {defect:.3e} above {tol:.1e} for gamma = {gamma}")
    X = np.empty(n, complex)
    D = np.empty(n, complex)
    X[mid:] = sp.y[0, ::-1]
    D[mid:] = sp.y[1, ::-1]
    X[:mid + 1] = c * sm.y[0]
    D[:mid + 1] = c * sm.y[1]
    X[mid] = 0.5 * (sp.y[0, -1] + c * sm.y[0, -1])
    D[mid] = 0.5 * (sp.y[1, -1] + c * sm.y[1, -1])
    j = np.argmax(np.abs(X))
    norm = X[j]
    X /= norm
    D /= norm
    I = complex(trapezoid(X, dx=grid.h))
    if abs(I) < avg_tol * trapezoid(np.abs(X), dx=grid.h):
        raise ZeroAverageError("X has vanishing average")
    env = _envelope_ratio(z, np.abs(X), np.sqrt(abs(gamma)) / 4)
    return XProfile(ComplexProfile(grid, X), ComplexProfile(grid, D), complex(gamma),
                    defect, I, env, model, sign)


def _w_residual(W, Wp, z, h, gamma, model, sign):
    q = gamma + sign * z * z
    F = q * W
    d3 = (F[4:] - 2 * F[3:-1] + 2 * F[1:-3] - F[:-4]) / (2 * h**3)
    # classical model: q^2 W' + i d^3[qW] = 0, multiplied by -i
    coef = gamma if model == "hyperbolic" else -1j
    lead = coef * q[2:-2] ** 2 * Wp[2:-2]
    return float(np.max(np.abs(lead + d3)))


def build_W(x: XProfile) -> WProfile:
    """W = running integral of X over I, W' = X / I."""
    if x.integral == 0:
        raise ZeroAverageError("X has zero integral")
    W = cumulative_integral(x.X) * (1 / x.integral)
    Wp = x.X * (1 / x.integral)
    z, h = x.X.nodes, x.X.grid.h
    res = _w_residual(W.values, Wp.values, z, h, x.gamma, x.model, x.sign)
    return WProfile(W, Wp, res, x)


def w_equation_residual(w: WProfile, gamma: complex) -> float:
    """Residual of the W equation with a caller supplied gamma."""
    z, h = w.W.nodes, w.W.grid.h
    return _w_residual(w.W.values, w.Wprime.values, z, h, gamma, w.x.model, w.x.sign)


@dataclass(frozen=True)
class SpectralConstants:
    alpha: float
    gamma: complex
    tau: complex
    sigma0: float
    model: str = "hyperbolic"
    curvature: float = -2.0
    scale: float = 1.0

    @property
    def sign(self) -> int:
        return 1 if self.curvature > 0 else -1


def spectral_constants_hyperbolic(eig: Eigenpair, shear: ShearFlow) -> SpectralConstants:
    """gamma = alpha^{1/3} e^{-2 i pi/3}, tau = (|U''(a)|/2)^{1/3} gamma.

    For U''(a) > 0 the conjugate branch -conj(gamma) is used.
    """
    if not eig.alpha > 0:
        raise SpectralFailure("eigenvalue must be positive")
    u2 = shear.d2a
    if u2 == 0:
        raise DegenerateCurvature("U_s''(a) = 0")
    sign = 1 if u2 > 0 else -1
    g = hyperbolic_gamma(eig.alpha, sign)
    c = (abs(u2) / 2) ** (1 / 3)
    tau = c * g
    return SpectralConstants(float(eig.alpha), g, complex(tau), float(-tau.imag),
                             "hyperbolic", float(u2), float(c))


def continuation_oracle(eig: Eigenpair, gamma: complex, points: Sequence[float],
                        sign: int = -1, rtol: float = 1e-11) -> np.ndarray:
    """f continued along the ray z -> alpha^{-1/6} e^{-i pi/6} z, at real z.

    Starts from f(0), f'(0) of the real eigenvector; negative z follow the
    ray of argument 5 pi/6. Only meant for |z| <= 2.
    """
    pts = np.asarray(points, float)
    if np.any(np.abs(pts) > 2 + 1e-12):
        raise ValueError("continuation is only reliable for |z| <= 2")
    alpha = eig.alpha
    rho = alpha ** (-1 / 6) * np.exp(-1j * np.pi / 6)
    spl = CubicSpline(eig.f.nodes, eig.f.values.real)
    f0, d0 = float(spl(0.0)), float(spl(0.0, 1))

    def rhs(t, y):
        x = rho * t
        q = x * x + 1
        fp = y[1] / rho
        return [y[1], rho**2 * (q * alpha * y[0] - 6 * x * fp / q - 6 * y[0] / q)]

    out = np.empty(len(pts), complex)
    for side in (1, -1):
        sel = np.nonzero((pts * side > 0))[0]
        if len(sel) == 0:
            continue
        order = sel[np.argsort(side * pts[sel])]
        sol = solve_ivp(rhs, (0.0, pts[order[-1]]), np.array([f0, rho * d0], complex),
                        method="DOP853", rtol=rtol, atol=1e-14, t_eval=pts[order])
        if sol.status != 0:
            raise NonConvergence(f"continuation failed: {sol.message}")
        out[order] = sol.y[0]
    out[pts == 0] = f0
    return np.conj(out) if sign > 0 else out
