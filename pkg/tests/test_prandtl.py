import math

import numpy as np
import pytest

from blayer.errors import ResolutionError, SpectralFailure
from blayer.evolution import window
from blayer.numerics import ComplexProfile, Grid1D, ShearFlow
from blayer.prandtl import (_AE, _AI, _CE, build_profile_set_prandtl, bounds_sweep_prandtl,
                            evolve_prandtl, growth_crossover, prandtl_forcing, prandtl_grid,
                            quadratic_oracle, spectral_constants_prandtl)
from blayer.spectral import matching_defect


@pytest.fixture(scope="module")
def quad():
    return ShearFlow("quadratic", a=2.0, kappa=1.0)


@pytest.fixture(scope="module")
def pq(quad, eig):
    return spectral_constants_prandtl(quad, eig)


@pytest.fixture(scope="module")
def pb(bump, eig):
    return spectral_constants_prandtl(bump, eig)


def test_imex_tableaux_consistent():
    # shared stage times, stiffly accurate weights, third order conditions
    c = _CE
    assert np.allclose(_AI.sum(axis=1), c)
    for b in (_AE[4], _AI[4]):
        assert abs(b.sum() - 1) <= 1e-14
        assert abs(b @ c - 1 / 2) <= 1e-14
        assert abs(b @ c**2 - 1 / 3) <= 1e-14
    assert abs(_AI[4] @ _AI @ c - 1 / 6) <= 1e-14
    assert abs(_AE[4] @ _AE @ c - 1 / 6) <= 1e-14


def test_root_in_lower_half_plane(pq, pb):
    assert pq.gamma.imag < 0 and pq.tau.imag < 0
    assert pb.gamma.imag < 0 and pb.tau.imag < 0


def test_defect_at_root_and_perturbed(pq):
    assert pq.defect <= 1e-6
    assert matching_defect(1.05 * pq.gamma, model="prandtl", sign=1) >= 1e-2


def test_far_seed_converges(quad, pq):
    far = spectral_constants_prandtl(quad, seed=0.6 - 1.3j)
    assert abs(far.gamma - pq.gamma) <= 1e-9


def test_curvature_scaling(eig, pb):
    other = spectral_constants_prandtl(ShearFlow("gaussian-bump", a=2.0, kappa=3.0), eig)
    assert abs(other.gamma - pb.gamma) <= 1e-9
    assert other.sigma0 / pb.sigma0 == pytest.approx(math.sqrt(3), rel=1e-9)


def test_curvature_signs_mirror(pq, pb):
    assert abs(pq.gamma + np.conj(pb.gamma)) <= 1e-9


def test_requires_critical_point():
    flow = ShearFlow.from_samples(np.linspace(0, 8, 801), np.linspace(0, 8, 801) ** 2, 2.0)
    with pytest.raises(SpectralFailure):
        spectral_constants_prandtl(flow)


def test_quadratic_remainder_vanishes(pq, quad):
    ps = build_profile_set_prandtl(256, pq, quad, prandtl_grid(quad, 256))
    assert ps.norm_R <= 1e-12
    assert np.all(ps.F1.values == 0) and np.all(ps.F2.values == 0)


def test_quadratic_oracle(pq, quad):
    o = quadratic_oracle(pq, quad, 256)
    assert abs(o.slope_ratio - 1) <= 0.02
    assert o.max_error <= 1e-2


def test_zero_data(quad):
    g = Grid1D(0.0, 10.0, 401)
    tr = evolve_prandtl(64, quad, ComplexProfile(g, np.zeros(g.n)), 0.01)
    assert np.all(tr.norms == 0)


def test_forced_bump_run(pb, bump):
    k = 256
    ps = build_profile_set_prandtl(k, pb, bump, prandtl_grid(bump, k))
    f = prandtl_forcing(ps, pb, bump)
    T = window(k, pb.sigma0, pb.sigma0 / 2, 0.5)
    tr = evolve_prandtl(k, bump, ps.U, T, f, reference=lambda t: np.exp(f.rate * t) * ps.U.values)
    assert tr.ref_error <= 1e-2


def test_bump_bounds(pb, bump):
    b = bounds_sweep_prandtl([64, 128, 256, 512, 1024, 2048, 4096], pb, bump)
    assert b.plateau_ratio() <= 2
    assert abs(b.limit_rate() + 0.25) <= 0.05


def test_resolution_error(pb, bump):
    with pytest.raises(ResolutionError):
        build_profile_set_prandtl(4096, pb, bump, Grid1D(0.0, 12.0, 121, 20))


def test_window_endpoint_square_root():
    T = window(1024, 0.7, 0.35, 0.5)
    assert abs(math.exp(-0.35 * math.sqrt(1024) * T) - 1024 ** -0.5) <= 1e-12


def test_growth_crossover():
    k = growth_crossover(0.866, 0.5)
    assert 0.5 * math.sqrt(k) == pytest.approx(0.866 * k ** (1 / 3))
