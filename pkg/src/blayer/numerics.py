"""Grids, complex profiles, weighted norms and the shear flows.

Everything here is immutable once built. Profiles are thin wrappers
around a complex numpy array tied to a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import make_interp_spline

from .errors import DegenerateCurvature, GridError, InvalidProfileError

__all__ = [
    "Grid1D", "ComplexProfile", "WeightedNormParams", "ShearFlow",
    "wnorm", "differentiate", "cumulative_integral", "heaviside_profile",
    "grid_through",
]


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform grid on [lo, hi] with n nodes, optionally marking one node."""

    lo: float
    hi: float
    n: int
    marked: Optional[int] = None
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2 or not self.hi > self.lo:
            raise GridError(f"bad grid [{self.lo}, {self.hi}] with {self.n} nodes")
        x = np.linspace(self.lo, self.hi, self.n)
        x.flags.writeable = False
        object.__setattr__(self, "nodes", x)
        if self.marked is not None and not 0 <= self.marked < self.n:
            raise GridError("marked index outside grid")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def mark_point(self) -> Optional[float]:
        return None if self.marked is None else float(self.nodes[self.marked])

    def index_of(self, x: float) -> int:
        j = int(round((x - self.lo) / self.h))
        if not 0 <= j < self.n or abs(self.nodes[j] - x) > 1e-12 * max(self.h, abs(x)):
            raise GridError(f"{x} is not a node")
        return j

    def spec(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "n": self.n, "marked": self.marked}

    def __eq__(self, other):
        return (isinstance(other, Grid1D) and self.n == other.n
                and self.lo == other.lo and self.hi == other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi, self.n))


def grid_through(lo: float, hi: float, n_min: int, point: float) -> Grid1D:
    """Uniform grid with at least n_min nodes having `point` as a node.

    The spacing is chosen so that point-lo is an integer number of cells;
    hi is then moved by less than one cell to land on a node.
    """
    if not lo <= point <= hi:
        raise GridError(f"point {point} outside [{lo}, {hi}]")
    h0 = (hi - lo) / max(n_min - 1, 1)
    if point == lo:
        h = h0
    else:
        h = (point - lo) / max(1, int(np.ceil((point - lo) / h0 - 1e-9)))
    cells = int(round((hi - lo) / h))
    if lo + cells * h < hi - 1e-9 * h:
        cells += 1
    hi2 = lo + cells * h
    marked = int(round((point - lo) / h))
    return Grid1D(lo, hi2, cells + 1, marked)


@dataclass(frozen=True, eq=False)
class ComplexProfile:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise InvalidProfileError(f"expected {self.grid.n} samples, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidProfileError("profile has non-finite samples")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def nodes(self):
        return self.grid.nodes

    def with_values(self, values) -> "ComplexProfile":
        return ComplexProfile(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _vals(other))

    def __sub__(self, other):
        return self.with_values(self.values - _vals(other))

    def __mul__(self, c):
        return self.with_values(self.values * _vals(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _vals(x):
    return x.values if isinstance(x, ComplexProfile) else x


@dataclass(frozen=True)
class WeightedNormParams:
    alpha: float = 1.0
    s: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("weight rate must be >= 0")
        if self.s not in (0, 1):
            raise ValueError("derivative order must be 0 or 1")


def wnorm(profile: ComplexProfile, params: WeightedNormParams = WeightedNormParams(),
          mask=None) -> float:
    """sup_j e^{alpha y_j}|f_j|, plus the same for f' when s = 1."""
    v = profile.values
    if not np.all(np.isfinite(v)):
        raise InvalidProfileError("profile has non-finite samples")
    w = np.exp(params.alpha * profile.nodes)
    sel = slice(None) if mask is None else mask
    out = float(np.max((w * np.abs(v))[sel], initial=0.0))
    if params.s == 1:
        if profile.grid.n < 3:
            raise GridError("W^{1,inf} norm needs at least 3 nodes")
        d = np.gradient(v, profile.grid.h, edge_order=2)
        out += float(np.max((w * np.abs(d))[sel], initial=0.0))
    return out


def differentiate(profile: ComplexProfile, order: int = 1) -> ComplexProfile:
    """Second order centered differences, one-sided second order at the ends."""
    g = profile.grid
    if g.n < 5:
        raise GridError("differentiation needs at least 5 nodes")
    f, h = profile.values, g.h
    if order == 1:
        d = np.gradient(f, h, edge_order=2)
    elif order == 2:
        d = np.empty_like(f)
        d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    else:
        raise ValueError("order must be 1 or 2")
    return profile.with_values(d)


def cumulative_integral(profile: ComplexProfile) -> ComplexProfile:
    """Trapezoidal running integral from the first node."""
    return profile.with_values(
        cumulative_trapezoid(profile.values, dx=profile.grid.h, initial=0.0))


def heaviside_profile(grid: Grid1D, a: float) -> ComplexProfile:
    """H(y - a) with H(a) = 1."""
    if not grid.lo <= a <= grid.hi:
        raise GridError(f"step location {a} outside grid")
    return ComplexProfile(grid, (grid.nodes >= a - 1e-12 * grid.h).astype(complex))


# shear flows

FAMILIES = ("gaussian-bump", "quadratic", "user-table")


@dataclass(frozen=True, eq=False)
class ShearFlow:
    """Base flow U_s(y) with derivatives up to order four.

    gaussian-bump: U = -kappa (y-a)^2 exp(-beta (y-a)^2)
    quadratic:     U = kappa (y-a)^2 / 2  (does not decay)
    user-table:    quintic spline through tabulated samples
    """

    family: str = "gaussian-bump"
    a: float = 2.0
    kappa: float = 1.0
    beta: float = 1.0
    table: Optional[tuple] = None
    _derivs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown shear family {self.family!r}")
        if not self.a > 0:
            raise ValueError("critical point must be positive")
        if self.family == "gaussian-bump":
            if self.kappa <= 0 or self.beta < 0:
                raise ValueError("need kappa > 0, beta >= 0")
            derivs = _gaussian_derivs(self.kappa, self.beta, self.a)
        elif self.family == "quadratic":
            p = Polynomial([0.0, 0.0, self.kappa / 2])
            derivs = tuple(_shifted_poly(p.deriv(j) if j else p, self.a) for j in range(5))
        else:
            if self.table is None:
                raise ValueError("user-table shear needs (y, U) samples")
            y, u = (np.asarray(t, float) for t in self.table)
            spl = make_interp_spline(y, u, k=5)
            derivs = tuple(spl.derivative(j) if j else spl for j in range(5))
        object.__setattr__(self, "_derivs", derivs)
        if abs(self.d2a) <= 1e-9:
            raise DegenerateCurvature("U_s''(a) = 0")

    @classmethod
    def from_samples(cls, y: Sequence[float], u: Sequence[float], a: float):
        return cls("user-table", a=a, table=(tuple(map(float, y)), tuple(map(float, u))))

    def derivative(self, j: int, y) -> np.ndarray:
        return np.asarray(self._derivs[j](np.asarray(y, float)), float)

    def __call__(self, y):
        return self.derivative(0, y)

    def all_derivatives(self, y, upto: int = 4):
        return [self.derivative(j, y) for j in range(upto + 1)]

    @property
    def d2a(self) -> float:
        return float(self.derivative(2, self.a))

    @property
    def decaying(self) -> bool:
        return self.family != "quadratic"

    def is_hyperbolic_admissible(self, tol: float = 1e-12) -> bool:
        return (abs(self.derivative(0, self.a)) <= tol
                and abs(self.derivative(1, self.a)) <= tol)

    def params(self) -> dict:
        return {"family": self.family, "a": self.a, "kappa": self.kappa, "beta": self.beta}


def _shifted_poly(p: Polynomial, a: float) -> Callable:
    return lambda y: p(np.asarray(y, float) - a) + 0.0 * np.asarray(y, float)


def _gaussian_derivs(kappa, beta, a):
    # d/ds [P(s) e^{-beta s^2}] = (P' - 2 beta s P) e^{-beta s^2}
    polys = [Polynomial([0.0, 0.0, -kappa])]
    s = Polynomial([0.0, 1.0])
    for _ in range(4):
        p = polys[-1]
        polys.append(p.deriv() - 2 * beta * s * p)

    def make(p):
        def f(y):
            t = np.asarray(y, float) - a
            return p(t) * np.exp(-beta * t * t)
        return f
    return tuple(make(p) for p in polys)
