import dataclasses

import numpy as np
import pytest

from blayer.errors import InconsistentSpectralInputs, ResolutionError
from blayer.numerics import Grid1D, ShearFlow, WeightedNormParams, wnorm
from blayer.profiles import (bounds_sweep, build_V, build_profile_set, fit_exponent,
                             layer_width, limit_profile, one_sided_limits, y_grid)


def test_fit_exponent_exact():
    ks = [64, 128, 256, 512]
    assert abs(fit_exponent(ks, [3 * k ** -0.25 for k in ks]) + 0.25) <= 1e-12


def test_one_sided_limits_recover_polynomials():
    g = Grid1D(-1, 1, 201)
    y = g.nodes
    j0 = 100
    f = np.where(y >= 0, 2 + 3 * y + 5 * y**2, -1 + y - 4 * y**2)
    left, right = one_sided_limits(f, j0, g.h)
    assert np.allclose(left, [-1, 1, -8], atol=1e-8)
    assert np.allclose(right, [2, 3, 10], atol=1e-8)


def test_jump_conditions(wprof, sc, bump):
    v = build_V(wprof, sc, bump)
    jV, jdV, jd2V = v.jumps
    assert abs(jV + sc.tau) <= 1e-4 * abs(sc.tau)
    assert abs(jdV) <= 1e-4 * abs(sc.tau) * sc.scale
    assert abs(jd2V + bump.d2a) <= 1e-3 * abs(bump.d2a)


@pytest.mark.parametrize("kappa,beta", [(0.5, 1.0), (2.0, 0.5), (1.0, 3.0)])
def test_jump_conditions_other_flows(eig, kappa, beta):
    from blayer.spectral import build_W, solve_X, spectral_constants_hyperbolic
    flow = ShearFlow("gaussian-bump", a=1.5, kappa=kappa, beta=beta)
    sc = spectral_constants_hyperbolic(eig, flow)
    w = build_W(solve_X(sc.gamma, sign=sc.sign))
    assert max(build_V(w, sc, flow).errors) <= 1e-3


def test_corrupted_constants_rejected(wprof, sc, bump):
    bad = dataclasses.replace(sc, tau=1.1 * sc.tau, sigma0=-1.1 * sc.tau.imag)
    with pytest.raises(InconsistentSpectralInputs):
        build_V(wprof, bad, bump)
    bad = dataclasses.replace(sc, sigma0=2 * sc.sigma0)
    with pytest.raises(InconsistentSpectralInputs):
        build_V(wprof, bad, bump)


@pytest.fixture(scope="module")
def ps64(wprof, sc, bump):
    return build_profile_set(64, wprof, sc, bump, y_grid(bump, 64))


def test_two_routes_to_V(ps64):
    # integrated U_k against the closed form; trapezoid error is O(h^2)
    assert ps64.v_discrepancy <= 10 * ps64.grid.h ** 2


def test_U_vanishes_at_wall(ps64):
    assert ps64.U.values[0] == 0


def test_resolution_error(wprof, sc, bump):
    g = Grid1D(0.0, 12.0, 121, 20)
    with pytest.raises(ResolutionError) as info:
        build_profile_set(4096, wprof, sc, bump, g)
    assert info.value.k == 4096


def test_layer_grid_resolves_layer(bump):
    for k in (64, 4096):
        g = y_grid(bump, k)
        assert layer_width(k, bump.d2a) / g.h >= 32 - 1e-9
        assert g.index_of(bump.a) >= 0


def test_remainder_limit_away_from_layer(wprof, sc, bump):
    pts = (bump.a - 0.5, bump.a + 0.5)
    devs = []
    ks = (256, 1024, 4096)
    for k in ks:
        g = y_grid(bump, k)
        ps = build_profile_set(k, wprof, sc, bump, g)
        d = []
        for y in pts:
            j = int(round(y / g.h))
            lim = 1j * (g.nodes[j] >= bump.a) * bump.derivative(3, g.nodes[j])
            val = k ** (4 / 3) * ps.R.values[j]
            d.append(abs(val - lim) / max(abs(lim), 1.0))
        devs.append(max(d))
    # deviation is O(k^{-1/3}) or smaller
    assert all(d * k ** (1 / 3) <= 5 for d, k in zip(devs, ks))
    assert devs[-1] < devs[0]


def test_bounds_and_limit_rate(wprof, sc, bump):
    ks = [64, 128, 256, 512, 1024, 2048, 4096]
    b = bounds_sweep(ks, wprof, sc, bump)
    assert b.ratio_U <= 3
    assert b.min_U > 0.1 * b.norm_limit
    assert b.plateau_ratio() <= 2
    assert abs(b.limit_rate() + 1 / 3) <= 0.05


def test_limit_profile(bump):
    g = y_grid(bump, 64)
    lim = limit_profile(bump, g)
    y = g.nodes
    assert np.all(lim.values[y < bump.a - 1e-12] == 0)
    ref = np.where(y >= bump.a, bump.derivative(1, y), 0)
    assert wnorm(lim - 1j * ref, WeightedNormParams(1.0)) == 0
