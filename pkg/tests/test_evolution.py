import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blayer.errors import ConfigurationError, DemoInfeasible
from blayer.evolution import (ExponentialForcing, InflationRecord, InflationReport, StateVector,
                              admissible_delta, admissible_dt, apply_B, data_normalization,
                              duhamel_check, evolve, exact_state, inflation_experiment,
                              mode_norm, remainder_forcing, substitution_residual, inflation_demo,
                              window)
from blayer.numerics import ComplexProfile, Grid1D, ShearFlow, WeightedNormParams, wnorm
from blayer.profiles import build_profile_set, y_grid


@pytest.fixture(scope="module")
def ps64(wprof, sc, bump):
    return build_profile_set(64, wprof, sc, bump, y_grid(bump, 64))


def random_profile(grid, seed):
    rng = np.random.default_rng(seed)
    y = grid.nodes
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    v = (c[0] * np.sin(y) + c[1] * y * np.exp(-y) + c[2] * np.sin(3 * y) ** 2) * np.exp(-0.5 * y)
    v[0] = 0
    return ComplexProfile(grid, v)


# spatial operator

def test_apply_B_zero(bump):
    g = Grid1D(0, 12, 301)
    assert np.all(apply_B(64, bump, ComplexProfile(g, np.zeros(g.n))).values == 0)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
       st.integers(0, 10_000))
def test_apply_B_linear(c, seed):
    g = Grid1D(0, 12, 301)
    flow = ShearFlow("gaussian-bump", a=2.0)
    u = random_profile(g, seed)
    lhs = apply_B(64, flow, u * c).values
    rhs = c * apply_B(64, flow, u).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_apply_B_far_field():
    flow = ShearFlow("gaussian-bump", a=2.0, beta=8.0)
    g = Grid1D(0, 12, 1201)
    y = g.nodes
    # mass-free bump far from a, so v vanishes outside its support
    u = ComplexProfile(g, np.where(np.abs(y - 9) < 1, np.sin(np.pi * (y - 9)) ** 3, 0))
    out = apply_B(64, flow, u)
    assert wnorm(out, WeightedNormParams(0.0)) <= 1e-12 * math.exp(-1.0 * 8)


# time stepping

def test_zero_data_stays_zero(bump):
    g = y_grid(bump, 64)
    z = ComplexProfile(g, np.zeros(g.n))
    tr = evolve(64, bump, StateVector(z, z), 0.05)
    assert np.all(tr.norms == 0)


def test_cfl_violation(bump):
    g = y_grid(bump, 64)
    z = ComplexProfile(g, np.zeros(g.n))
    dt = 2 * admissible_dt(64, bump, g, 1.0)
    with pytest.raises(ConfigurationError):
        evolve(64, bump, StateVector(z, z), 10 * dt, dt=dt)


def test_linearity_of_evolution(bump):
    g = y_grid(bump, 64)
    u = random_profile(g, 1)
    w = random_profile(g, 2)
    c = 0.7 - 1.9j
    a = evolve(64, bump, StateVector(u, w), 0.05).final
    b = evolve(64, bump, StateVector(u * c, w * c), 0.05).final
    assert np.max(np.abs(b.u.values - c * a.u.values)) <= 1e-12 * np.max(np.abs(b.u.values))


def test_semigroup(bump):
    g = y_grid(bump, 64)
    data = StateVector(random_profile(g, 3), random_profile(g, 4))
    dt = admissible_dt(64, bump, g, 0.5)
    one = evolve(64, bump, data, 40 * dt, dt=dt).final
    half = evolve(64, bump, data, 20 * dt, dt=dt).final
    two = evolve(64, bump, half, 20 * dt, dt=dt).final
    assert np.max(np.abs(one.u.values - two.u.values)) <= 1e-12 * np.max(np.abs(one.u.values))


def test_forced_exact_solution(wprof, sc, bump):
    k = 256
    ps = build_profile_set(k, wprof, sc, bump, y_grid(bump, k))
    lam = 1j * sc.tau * k ** (1 / 3)
    T = window(k, sc.sigma0, sc.sigma0 / 2)
    tr = evolve(k, bump, exact_state(ps, sc), T, remainder_forcing(ps, sc),
                reference=lambda t: np.exp(lam * t) * ps.U.values)
    assert tr.ref_error <= 1e-2
    exact = np.exp(sc.sigma0 * k ** (1 / 3) * tr.times) * ps.norm_U
    assert np.max(np.abs(tr.norms / exact - 1)) <= 1e-2


# substitution residual

def test_residual_small(ps64, sc, bump):
    assert substitution_residual(ps64, sc, bump) <= 1e-3


def test_residual_detects_wrong_tau(ps64, sc, bump):
    import dataclasses
    bad = dataclasses.replace(sc, tau=1.1 * sc.tau)
    assert substitution_residual(ps64, bad, bump) >= 10 * substitution_residual(ps64, sc, bump)


# Duhamel

def test_duhamel_identity(ps64, sc, bump):
    T = window(64, sc.sigma0, sc.sigma0 / 2)
    assert duhamel_check(ps64, sc, bump, T / 2, 64).discrepancy <= 1e-2


def test_duhamel_zero_forcing(ps64, sc, bump):
    zero = ExponentialForcing(np.zeros(ps64.grid.n, complex), 0.0)
    assert duhamel_check(ps64, sc, bump, 0.05, 8, forcing=zero).discrepancy <= 1e-12


def test_duhamel_quadrature_order(ps64, sc, bump):
    # strong oscillating forcing so that the quadrature error dominates
    f = remainder_forcing(ps64, sc)
    f = ExponentialForcing(f.profile, f.rate + 40j)
    T = 0.2
    e = [duhamel_check(ps64, sc, bump, T, M, forcing=f).discrepancy for M in (4, 8)]
    assert math.log2(e[0] / e[1]) >= 3.5


# inflation

@pytest.mark.parametrize("k,power", [(64, 1 / 3), (4096, 1 / 3), (256, 1 / 2)])
def test_window_endpoint(k, power):
    s0, s = 0.9, 0.4
    T = window(k, s0, s, power)
    assert abs(math.exp(-(s0 - s) * k**power * T) - k ** (-power)) <= 1e-12


def test_window_guard():
    with pytest.raises(ValueError):
        window(64, 0.5, 0.6)


@settings(max_examples=25, deadline=None)
@given(st.floats(1, 1e4), st.floats(0, 5))
def test_mode_norm_identity(k, m):
    g = Grid1D(0, 5, 101)
    p = ComplexProfile(g, np.exp(-g.nodes) * (1 + 2j))
    assert abs(mode_norm(p, k, m) - wnorm(p, WeightedNormParams(1.0))) <= 1e-12


def test_data_normalization(ps64, sc):
    lam = 1j * sc.tau * 64 ** (1 / 3)
    mx = data_normalization(ps64, lam, "max")
    sm = data_normalization(ps64, lam, "sum")
    assert mx <= sm <= 2 * mx
    assert data_normalization(ps64, lam, "U") == ps64.norm_U
    with pytest.raises(ValueError):
        data_normalization(ps64, lam, "bogus")


@pytest.fixture(scope="module")
def small_report(wprof, sc, bump):
    return inflation_experiment([64, 128, 256], wprof, sc, bump)


def test_inflation_increasing(small_report):
    assert small_report.increasing()
    r = small_report.records[0]
    assert r.T == pytest.approx(window(64, small_report.sigma0, small_report.sigma0 / 2))


def test_demo_mu0_reduces_to_sweep(small_report, wprof, sc, bump):
    d = inflation_demo(small_report, wprof, sc, bump, mu=0.0, m=0.0)
    rec = [r for r in small_report.records if r.k == d.k][0]
    assert d.initial_norm <= 1 + 1e-12
    assert d.C_sigma_k * d.k ** (1 / 3) == pytest.approx(rec.S)
    assert d.passed


def test_demo_infeasible(small_report, wprof, sc, bump):
    with pytest.raises(DemoInfeasible):
        inflation_demo(small_report, wprof, sc, bump, mu=0.0, delta=1e-3)


def test_admissible_delta_rule():
    recs = tuple(InflationRecord(k, 0.4, T, S, 0.0, 0.0, 1.0, 1.0, 1.0, 1, 1)
                 for k, T, S in [(64, 0.5, 1.0), (128, 0.4, 4.0), (256, 0.3, 2.0)])
    rep = InflationReport(recs, 0.8, 0.5, 0.1)
    d, r = admissible_delta(rep, 0.0)
    assert r.k == 128 and d == pytest.approx(0.4)
