import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blayer.errors import DegenerateCurvature, GridError, SpectralFailure
from blayer.numerics import ShearFlow
from blayer.spectral import (build_W, continuation_oracle, eigen_operator_apply,
                             hyperbolic_gamma, matching_defect, solve_eigenproblem, solve_X,
                             spectral_constants_hyperbolic, w_equation_residual)


def closed_form_f(x):
    # exact eigenfunction of A for the eigenvalue 1
    return np.exp(-x**2 / 2) / (x**2 + 1) ** 2


# eigenproblem

def test_eigenvalue_matches_closed_form(eig):
    assert abs(eig.alpha - 1) <= 1e-8
    errs = []
    for n in (2001, 4001):
        e = solve_eigenproblem(12.0, n, extrapolate=False)
        errs.append(np.max(np.abs(e.f.values.real - closed_form_f(e.f.nodes))))
    # the eigenvector carries the O(h^2) discretization error
    assert errs[1] <= (24 / 4000) ** 2
    assert abs(np.log2(errs[0] / errs[1]) - 2) <= 0.2


def test_closed_form_is_eigenfunction():
    # exact derivatives: f' = L f, f'' = (L^2 + L') f
    x = np.linspace(-6, 6, 1201)
    q = x**2 + 1
    f = closed_form_f(x)
    L = -x - 4 * x / q
    dL = -1 - 4 / q + 8 * x**2 / q**2
    Af = (L**2 + dL) * f / q + 6 * x * L * f / q**2 + 6 * f / q**2
    assert np.max(np.abs(Af - f)) <= 1e-14


def test_discrete_operator_second_order():
    errs = []
    for n in (2001, 4001):
        x = np.linspace(-6, 6, n)
        f = closed_form_f(x)
        errs.append(np.max(np.abs(eigen_operator_apply(f, x) - f[1:-1])))
    assert abs(np.log2(errs[0] / errs[1]) - 2) <= 0.1


def test_eigen_residual_and_doubling(eig):
    assert eig.residual <= 1e-7
    e2 = solve_eigenproblem(12.0, 8000)
    assert abs(eig.alpha - e2.alpha) / e2.alpha <= 1e-5


def test_eigenvector_parity(eig):
    f = eig.f.values
    assert min(np.max(np.abs(f - f[::-1])), np.max(np.abs(f + f[::-1]))) <= 1e-8


def test_eigen_envelope(eig):
    assert eig.envelope <= 10


def test_eigen_guards():
    with pytest.raises(GridError):
        solve_eigenproblem(6.0, 1000)
    with pytest.raises(SpectralFailure):
        solve_eigenproblem(12.0, 1000, window=(50.0, 60.0))


# gamma, tau

def test_unit_constants(eig):
    sc = spectral_constants_hyperbolic(eig, ShearFlow("gaussian-bump", a=2.0, kappa=1.0))
    e = np.exp(-2j * np.pi / 3)
    assert abs(sc.gamma - eig.alpha ** (1 / 3) * e) <= 1e-14
    assert abs(sc.tau - sc.gamma) <= 1e-12
    assert sc.sigma0 == pytest.approx(np.sqrt(3) / 2 * eig.alpha ** (1 / 3), abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_gamma_argument(alpha):
    g = hyperbolic_gamma(alpha)
    assert abs(np.angle(g) + 2 * np.pi / 3) <= 1e-12
    assert g.imag < 0


def test_sigma0_scales_with_curvature(eig):
    s1 = spectral_constants_hyperbolic(eig, ShearFlow("gaussian-bump", a=2.0, kappa=1.0))
    s2 = spectral_constants_hyperbolic(eig, ShearFlow("gaussian-bump", a=2.0, kappa=2.0))
    assert abs(s2.sigma0 / s1.sigma0 - 2 ** (1 / 3)) <= 1e-12


def test_sign_condition(sc):
    assert sc.gamma.imag < 0 and sc.tau.imag < 0 and sc.sigma0 > 0


def test_positive_curvature_branch(eig):
    # U''(a) > 0 uses the mirrored root, growth rate unchanged
    sc = spectral_constants_hyperbolic(eig, ShearFlow("quadratic", a=2.0, kappa=2.0))
    ref = hyperbolic_gamma(eig.alpha)
    assert abs(sc.gamma + np.conj(ref)) <= 1e-14
    assert sc.sign == 1 and sc.tau.imag < 0
    x = solve_X(sc.gamma, sign=1)
    assert x.defect <= 1e-6


def test_degenerate_curvature_rejected(eig):
    class Flat:
        d2a = 0.0
    with pytest.raises(DegenerateCurvature):
        spectral_constants_hyperbolic(eig, Flat())


# X and W

def test_matching_defect(xprof, sc):
    assert xprof.defect <= 1e-6
    assert matching_defect(1.05 * sc.gamma) > 1e-2
    with pytest.raises(SpectralFailure):
        solve_X(1.05 * sc.gamma)


def test_X_closed_form(xprof, sc):
    rho = sc.alpha ** (-1 / 6) * np.exp(-1j * np.pi / 6)
    z = xprof.X.nodes
    ref = closed_form_f(rho * z)
    X = xprof.X.values
    mid = len(z) // 2
    sel = np.abs(z) <= 6
    assert np.max(np.abs(X[sel] / X[mid] - ref[sel] / ref[mid])) <= 1e-7


def test_X_envelope(xprof):
    assert xprof.envelope <= 10


def test_continuation_oracle(eig, xprof, sc):
    pts = np.array([-1.7, -0.6, 0.0, 0.8, 1.5, 2.0])
    cont = continuation_oracle(eig, sc.gamma, pts)
    X = np.interp(pts, xprof.X.nodes, xprof.X.values.real) + 1j * np.interp(
        pts, xprof.X.nodes, xprof.X.values.imag)
    j0 = 2
    a, b = cont / cont[j0], X / X[j0]
    assert abs(a[j0] - b[j0]) <= 1e-6
    assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-4


def test_continuation_domain(eig, sc):
    with pytest.raises(ValueError):
        continuation_oracle(eig, sc.gamma, [3.0])


def test_W_boundary_values(wprof):
    W = wprof.W.values
    assert abs(W[0]) <= 1e-8 and abs(W[-1] - 1) <= 1e-8
    h = wprof.W.grid.h
    Wp = wprof.Wprime.values
    assert abs(h * (Wp.sum() - 0.5 * (Wp[0] + Wp[-1])) - 1) <= 1e-10


def test_W_residual_order(sc):
    res, hs = [], []
    for n in (1001, 2001, 4001):
        w = build_W(solve_X(sc.gamma, 12.0, n))
        res.append(w_equation_residual(w, sc.gamma))
        hs.append(w.W.grid.h)
    slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
    assert abs(slope - 2) <= 0.3


def test_W_residual_detects_wrong_gamma(wprof, sc):
    assert w_equation_residual(wprof, 1.1 * sc.gamma) > 10 * w_equation_residual(wprof, sc.gamma)


def test_interpolant_consistency(wprof):
    f = wprof.interpolant()
    z = wprof.W.nodes
    W, Wp = f(z)
    assert np.max(np.abs(Wp - wprof.Wprime.values)) <= 1e-12
    # stored W is a trapezoid sum, the interpolant integrates exactly
    assert np.max(np.abs(W - wprof.W.values)) <= wprof.W.grid.h ** 2
    W, Wp = f(np.array([-100.0, 100.0]))
    assert W[0] == 0 and W[1] == 1 and np.all(Wp == 0)


def test_odd_node_count_required(sc):
    with pytest.raises(GridError):
        solve_X(sc.gamma, 12.0, 4000)
