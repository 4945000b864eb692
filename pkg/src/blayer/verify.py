"""Acceptance checks shared by the test suite and the `verify` subcommand."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import RunConfig
from .errors import BlayerError
from .evolution import (duhamel_check, evolve, exact_state, inflation_experiment,
                        remainder_forcing, substitution_residual, inflation_demo, window)
from .numerics import ShearFlow, grid_through
from .prandtl import inflation_experiment_prandtl, quadratic_oracle, spectral_constants_prandtl
from .profiles import bounds_sweep, build_V, build_profile_set, fit_exponent, y_grid
from .spectral import build_W, solve_X, solve_eigenproblem, spectral_constants_hyperbolic

__all__ = ["Pipeline", "CheckResult", "CHECKS", "run_checks"]


class Pipeline:
    """Lazily computed objects shared between checks and subcommands."""

    def __init__(self, cfg: RunConfig, artifacts: Optional[Path] = None):
        self.cfg = cfg
        self.artifacts = artifacts

    @cached_property
    def shear(self) -> ShearFlow:
        return self.cfg.shear_flow()

    @cached_property
    def hshear(self) -> ShearFlow:
        # the hyperbolic model needs a decaying flow
        c = self.cfg
        if c.shear == "quadratic":
            return ShearFlow("gaussian-bump", a=c.a, kappa=c.kappa, beta=c.beta)
        return self.shear

    @cached_property
    def eig(self):
        c = self.cfg
        return solve_eigenproblem(c.eig_halfwidth, c.eig_nodes, tol=c.tol_eig)

    def _load(self, name):
        from .io import load_json
        if self.artifacts is None:
            return None
        p = Path(self.artifacts) / name
        return load_json(p) if p.exists() else None

    @cached_property
    def sc(self):
        loaded = self._load("constants.json")
        if loaded is not None and getattr(loaded, "model", None) == "hyperbolic":
            return loaded
        return spectral_constants_hyperbolic(self.eig, self.hshear)

    @cached_property
    def x(self):
        c = self.cfg
        return solve_X(self.sc.gamma, c.z_halfwidth, c.z_nodes, "hyperbolic", self.sc.sign,
                       c.tol_matching)

    @cached_property
    def w(self):
        loaded = self._load("wprofile.json")
        if loaded is not None and loaded.x.model == "hyperbolic":
            return loaded
        return build_W(self.x)

    @cached_property
    def pspec(self):
        c = self.cfg
        return spectral_constants_prandtl(self.shear if self.cfg.model == "prandtl" else self.hshear,
                                          self.eig, c.z_halfwidth, c.z_nodes, c.tol_matching)

    @cached_property
    def pspec_bump(self):
        if self.hshear is self.shear and self.cfg.model == "prandtl":
            return self.pspec
        c = self.cfg
        return spectral_constants_prandtl(self.hshear, self.eig, c.z_halfwidth, c.z_nodes,
                                          c.tol_matching)

    @cached_property
    def quad(self) -> ShearFlow:
        return ShearFlow("quadratic", a=self.cfg.a, kappa=1.0)

    @cached_property
    def pspec_quad(self):
        c = self.cfg
        return spectral_constants_prandtl(self.quad, self.eig, c.z_halfwidth, c.z_nodes,
                                          c.tol_matching)

    @cached_property
    def bounds(self):
        c = self.cfg
        return bounds_sweep(c.ks, self.w, self.sc, self.hshear, c.alpha, c.nodes_per_layer)

    @cached_property
    def inflation(self):
        c = self.cfg
        return inflation_experiment(c.ks, self.w, self.sc, self.hshear, c.sigma_frac, c.alpha,
                                    c.nodes_per_layer, "max", c.workers)

    @cached_property
    def pinflation(self):
        c = self.cfg
        return inflation_experiment_prandtl(c.ks, self.pspec_bump, self.hshear, c.sigma_frac,
                                            c.alpha, c.nodes_per_layer, c.workers)

    def profile_set(self, k, grid=None):
        c = self.cfg
        if grid is None:
            grid = y_grid(self.hshear, k, c.alpha, c.nodes_per_layer)
        return build_profile_set(k, self.w, self.sc, self.hshear, grid, c.alpha)


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: Optional[str] = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        body = ", ".join(f"{k}={_short(v)}" for k, v in self.details.items())
        if self.error:
            body = (body + ", " if body else "") + f"error={self.error}"
        return f"[{tag}] criterion {self.id:2d} {self.name}: {body} ({self.seconds:.1f} s)"


def _short(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j"
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_short(x) for x in v) + "]"
    return str(v)


def _slope(hs, vals):
    return fit_exponent(hs, vals)


# individual criteria; each returns (passed, details)

def check_spectral(p: Pipeline):
    c = p.cfg
    t0 = time.perf_counter()
    e = p.eig
    e2 = solve_eigenproblem(c.eig_halfwidth, 2 * c.eig_nodes, tol=c.tol_eig)
    widths = [solve_eigenproblem(xb, c.eig_nodes, tol=c.tol_eig).alpha for xb in (10.0, 14.0)]
    secs = time.perf_counter() - t0
    gap = abs(e.alpha - e2.alpha) / e2.alpha
    spread = max(abs(a - e.alpha) / e.alpha for a in widths)
    raw_gap = abs(e.alpha_raw - e2.alpha_raw) / e2.alpha_raw
    ok = e.residual <= 1e-7 and gap <= 1e-5 and spread <= 1e-5 and secs <= 60
    return ok, {"alpha": e.alpha, "residual": e.residual, "doubling_gap": gap,
                "halfwidth_spread": spread, "raw_doubling_gap": raw_gap, "runtime_s": secs}


def check_signs(p: Pipeline):
    sc = p.sc
    arg_err = abs(np.angle(sc.gamma) + 2 * np.pi / 3) if sc.sign < 0 else abs(np.angle(sc.gamma) + np.pi / 3)
    gp = p.pspec_bump.gamma
    ok = sc.gamma.imag < 0 and sc.tau.imag < 0 and arg_err <= 1e-12 and gp.imag < 0
    return ok, {"gamma": sc.gamma, "tau": sc.tau, "arg_error": float(arg_err), "gamma_P": gp}


def check_w(p: Pipeline):
    c = p.cfg
    w = p.w
    left = abs(w.W.values[0])
    right = abs(w.W.values[-1] - 1)
    ns = [(c.z_nodes // 2) | 1, c.z_nodes, 2 * c.z_nodes - 1]
    res, hs = [], []
    for n in ns:
        wn = build_W(solve_X(p.sc.gamma, c.z_halfwidth, n, "hyperbolic", p.sc.sign, c.tol_matching))
        res.append(wn.residual)
        hs.append(wn.W.grid.h)
    order = _slope(hs, res)
    ok = left <= 1e-8 and right <= 1e-8 and abs(order - 2) <= 0.3
    return ok, {"W_left": left, "W_right_minus_1": right, "residuals": res, "order": order}


def check_jumps(p: Pipeline):
    v = build_V(p.w, p.sc, p.hshear, rtol=p.cfg.tol_jump)
    ok = max(v.errors) <= p.cfg.tol_jump
    return ok, {"jump_V": v.errors[0], "jump_dV": v.errors[1], "jump_d2V": v.errors[2]}


def check_residual(p: Pipeline):
    c = p.cfg
    k = 64
    base = p.profile_set(k)
    r0 = substitution_residual(base, p.sc, p.hshear)
    cells = base.grid.n - 1
    hs, rs = [], []
    for m in (1, 2, 4):
        n = cells * m
        zn = 4 * n + 1
        w = build_W(solve_X(p.sc.gamma, c.z_halfwidth, zn, "hyperbolic", p.sc.sign, c.tol_matching))
        g = grid_through(0.0, base.grid.hi, n + 1, p.hshear.a)
        ps = build_profile_set(k, w, p.sc, p.hshear, g, c.alpha)
        rs.append(substitution_residual(ps, p.sc, p.hshear))
        hs.append(g.h)
    order = _slope(hs, rs)
    ok = r0 <= 1e-3 and abs(order - 2) <= 0.3
    return ok, {"residual_k64": r0, "refined": rs, "order": order}


def check_bounds(p: Pipeline):
    t0 = time.perf_counter()
    b = p.bounds
    secs = time.perf_counter() - t0
    rate = b.limit_rate()
    ok = (b.ratio_U <= 3 and b.min_U > 0.1 * b.norm_limit and b.plateau_ratio() <= 2
          and abs(rate + 1 / 3) <= 0.05 and secs <= 300)
    return ok, {"max_min_ratio_U": b.ratio_U, "min_U": b.min_U, "limit_norm": b.norm_limit,
                "plateau_ratio_R": b.plateau_ratio(), "limit_rate": rate, "runtime_s": secs}


def check_forced(p: Pipeline):
    c = p.cfg
    k = c.evolve_k
    ps = p.profile_set(k)
    sc = p.sc
    lam = 1j * sc.tau * k ** (1 / 3)
    T = window(k, sc.sigma0, c.sigma_frac * sc.sigma0)
    U = ps.U.values
    tr = evolve(k, p.hshear, exact_state(ps, sc), T, remainder_forcing(ps, sc), c.alpha,
                reference=lambda t: np.exp(lam * t) * U)
    ratio = tr.log_slope() / (sc.sigma0 * k ** (1 / 3))
    ok = tr.ref_error <= 1e-2 and abs(ratio - 1) <= 1e-2
    return ok, {"k": k, "max_rel_error": float(tr.ref_error), "slope_ratio": ratio,
                "window": T, "steps": len(tr.times) - 1}


def check_duhamel(p: Pipeline):
    c = p.cfg
    k = c.duhamel_k
    ps = p.profile_set(k)
    T = window(k, p.sc.sigma0, c.sigma_frac * p.sc.sigma0)
    d = duhamel_check(ps, p.sc, p.hshear, T / 2, c.duhamel_M, workers=c.workers)
    return d.discrepancy <= 1e-2, {"k": k, "M": c.duhamel_M, "discrepancy": d.discrepancy}


def check_inflation(p: Pipeline):
    t0 = time.perf_counter()
    rep = p.inflation
    secs = time.perf_counter() - t0
    expo = rep.exponent()
    ks = rep.ks
    # linearity: other data normalizations are rescalings of the same runs
    alt = {}
    for kind in ("sum", "U"):
        scale = []
        for r in rep.records:
            lam = abs(p.sc.tau) * r.k ** (1 / 3)
            nd = {"sum": r.norm_U_W1 + lam * r.norm_U, "U": r.norm_U}[kind]
            scale.append(r.S * r.data_norm / nd)
        alt[kind] = fit_exponent(ks, scale)
    ok = rep.increasing() and expo >= 0.25 and secs <= 900
    return ok, {"S_k": rep.S, "increasing": rep.increasing(), "exponent": expo,
                "exponent_sum_normalized": alt["sum"], "exponent_U_normalized": alt["U"],
                "reference_bound_holds": all(r.S > r.C_ref for r in rep.records), "runtime_s": secs}


def check_quadratic(p: Pipeline):
    o = quadratic_oracle(p.pspec_quad, p.quad, p.cfg.oracle_k)
    ok = o.norm_R <= 1e-12 and abs(o.slope_ratio - 1) <= 0.02
    return ok, {"k": o.k, "norm_R": o.norm_R, "slope_ratio": o.slope_ratio,
                "max_rel_error": float(o.max_error), "gamma_P": p.pspec_quad.gamma}


def check_prandtl_inflation(p: Pipeline):
    rep = p.pinflation
    expo = rep.exponent()
    return expo >= 0.35, {"S_k": rep.S, "increasing": rep.increasing(), "exponent": expo}


def check_demo(p: Pipeline):
    c = p.cfg
    rows = {}
    ok = True
    for mu in c.demo_mu:
        d = inflation_demo(p.inflation, p.w, p.sc, p.hshear, mu, c.demo_m, alpha=c.alpha,
                           nodes_per_layer=c.nodes_per_layer)
        rows[f"mu={mu:g}"] = (d.k, d.delta, d.initial_norm, d.product)
        ok = ok and d.passed
    return ok, {k: v for k, v in rows.items()}


CHECKS = [
    (1, "spectral residual and alpha stability", check_spectral),
    (2, "sign structure of gamma, tau, gamma_P", check_signs),
    (3, "W boundary values and ODE residual order", check_w),
    (4, "jump conditions of V", check_jumps),
    (5, "substitution residual and its order", check_residual),
    (6, "uniform bounds sweep", check_bounds),
    (7, "forced exact solution", check_forced),
    (8, "Duhamel identity", check_duhamel),
    (9, "hyperbolic inflation sweep", check_inflation),
    (10, "quadratic shear oracle", check_quadratic),
    (11, "classical inflation sweep", check_prandtl_inflation),
    (12, "norm inflation demo", check_demo),
]


def run_one(p: Pipeline, cid: int) -> CheckResult:
    for i, name, fn in CHECKS:
        if i == cid:
            t0 = time.perf_counter()
            try:
                ok, det = fn(p)
                err = None
            except BlayerError as exc:
                ok, det, err = False, {}, f"{type(exc).__name__}: {exc}"
            return CheckResult(i, name, bool(ok), det, time.perf_counter() - t0, err)
    raise KeyError(cid)


def run_checks(p: Pipeline, ids=None, report: Optional[Callable] = None):
    """Run criteria 1-12 then the aggregate criterion 13."""
    t0 = time.perf_counter()
    out = []
    for i, _, _ in CHECKS:
        if ids is not None and i not in ids:
            continue
        r = run_one(p, i)
        out.append(r)
        if report:
            report(r)
    total = time.perf_counter() - t0
    budget = 300 if p.cfg.quick else 1800
    if ids is None or 13 in ids:
        allok = all(r.passed for r in out)
        r13 = CheckResult(13, "full suite within budget", allok and total <= budget,
                          {"all_passed": allok, "total_s": total, "budget_s": budget}, total)
        out.append(r13)
        if report:
            report(r13)
    return out
