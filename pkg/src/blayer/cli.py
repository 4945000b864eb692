"""Command line front end.

    blayer spectrum | profiles | evolve | inflate | verify
           [--model M] [--shear S] [--config PATH] [--out DIR] [--quick] [--check NAME]

Exit codes: 0 success, 1 verification failure, 2 spectral failure,
3 resolution or configuration failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_hash, load_config
from .errors import BlayerError, ConfigurationError
from .evolution import (duhamel_check, evolve, exact_state, remainder_forcing, window)
from .io import dump_json, load_json, sha256_file, write_csv, canonical_json
from .prandtl import (bounds_sweep_prandtl, build_profile_set_prandtl, evolve_prandtl,
                      growth_crossover, prandtl_forcing, prandtl_grid, quadratic_oracle)
from .profiles import build_V
from .svg import line_plot, reference_slope
from .verify import Pipeline, run_checks

log = logging.getLogger("blayer")


class Run:
    """One subcommand invocation: config, output directory and manifest."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = cfg.output_dir()
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = {}
        self.timings = {}
        self.checks = {}
        self.pipe = Pipeline(cfg, self.out)

    def stage(self, name):
        run = self

        class _T:
            def __enter__(self):
                log.info("stage=%s start", name)
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = round(time.perf_counter() - self.t0, 3)
                log.info("stage=%s done seconds=%.2f", name, run.timings[name])
        return _T()

    def record(self, key, path):
        self.files[key] = str(Path(path).relative_to(self.out))

    def manifest(self):
        files = {k: {"path": v, "sha256": sha256_file(self.out / v)} for k, v in sorted(self.files.items())}
        doc = {"config_hash": config_hash(self.cfg), "version": __version__, "files": files,
               "timings": self.timings, "checks": self.checks, "config": self.cfg.as_dict()}
        path = self.out / "manifest.json"
        path.write_text(canonical_json(doc), encoding="utf-8")
        return path


def _cfg_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.with_overrides(model=args.model, shear=args.shear, out=args.out)
    if args.quick:
        cfg = cfg.quick_profile()
    return cfg


# spectrum

def cmd_spectrum(run: Run):
    p = run.pipe
    cfg = run.cfg
    with run.stage("spectrum"):
        if cfg.model == "hyperbolic":
            p.artifacts = None
            eig, x, w, sc = p.eig, p.x, p.w, p.sc
            print(f"alpha = {eig.alpha:.12f}  (raw {eig.alpha_raw:.10f}, residual {eig.residual:.2e})")
            print(f"gamma = {sc.gamma:.12f}")
            print(f"tau   = {sc.tau:.12f}")
            print(f"sigma0 = {sc.sigma0:.12f}")
            print(f"matching defect = {x.defect:.2e}, W residual = {w.residual:.2e}")
            run.record("eigenpair", dump_json(eig, run.out / "eigenpair.json"))
            run.record("xprofile", dump_json(x, run.out / "xprofile.json"))
            run.record("wprofile", dump_json(w, run.out / "wprofile.json"))
            run.record("constants", dump_json(sc, run.out / "constants.json"))
            p.artifacts = run.out
        else:
            eig, ps = p.eig, p.pspec
            sc = ps.constants
            print(f"alpha = {eig.alpha:.12f}")
            print(f"gamma_P = {ps.gamma:.12f}  (secant iterations {ps.iterations})")
            print(f"tau_P   = {ps.tau:.12f}")
            print(f"sigma0_P = {ps.sigma0:.12f}")
            print(f"matching defect = {ps.defect:.2e}, W residual = {ps.w.residual:.2e}")
            run.record("eigenpair", dump_json(eig, run.out / "eigenpair.json"))
            run.record("xprofile", dump_json(ps.x, run.out / "xprofile.json"))
            run.record("wprofile", dump_json(ps.w, run.out / "wprofile.json"))
            run.record("constants", dump_json(sc, run.out / "constants.json"))
    return 0


def _ensure_spectrum(run: Run):
    needed = ("constants.json", "wprofile.json")
    if all((run.out / n).exists() for n in needed):
        doc = load_json(run.out / "constants.json")
        if getattr(doc, "model", None) == run.cfg.model:
            for n in needed:
                run.record(n[:-5], run.out / n)
            return
    cmd_spectrum(run)


def _profile_plot(path, grid, U, R, k, title):
    y = grid.nodes
    return line_plot(path, [(y, U.real, "Re U_k"), (y, U.imag, "Im U_k"),
                            (y, R.real, "Re R_k (scaled)"), (y, R.imag, "Im R_k (scaled)")],
                     title=title, xlabel="y", ylabel="profile", dashed=(2, 3))


def cmd_profiles(run: Run):
    _ensure_spectrum(run)
    cfg, p = run.cfg, run.pipe
    k = cfg.profile_k
    with run.stage("profiles"):
        if cfg.model == "hyperbolic":
            v = build_V(p.w, p.sc, p.hshear, rtol=cfg.tol_jump)
            print("jump errors [V], [V'], [V'']: " + ", ".join(f"{e:.2e}" for e in v.errors))
            ps = p.profile_set(k)
            run.record("profile", dump_json(ps, run.out / f"profile_k{k}.json"))
            _profile_plot(run.out / f"profile_k{k}.svg", ps.grid, ps.U.values,
                          ps.R.values * k ** (4 / 3), k, f"hyperbolic profiles, k = {k}")
            run.record("profile_svg", run.out / f"profile_k{k}.svg")
            b = p.bounds
            rows = [(r.k, r.norm_U, r.k43_norm_R) for r in b.rows]
            run.record("bounds", write_csv(run.out / "bounds.csv", ["k", "norm_U", "k43_norm_R"], rows))
            print(f"max/min ||U_k|| = {b.ratio_U:.4f}, plateau ratio = {b.plateau_ratio():.4f}, "
                  f"limit rate = {b.limit_rate():.4f}")
        else:
            shear = p.shear
            ps = build_profile_set_prandtl(k, p.pspec, shear, prandtl_grid(shear, k, cfg.alpha,
                                                                           cfg.nodes_per_layer), cfg.alpha)
            run.record("profile", dump_json(ps, run.out / f"profile_k{k}.json"))
            _profile_plot(run.out / f"profile_k{k}.svg", ps.grid, ps.U.values, ps.R.values * k, k,
                          f"classical profiles, k = {k}")
            run.record("profile_svg", run.out / f"profile_k{k}.svg")
            b = bounds_sweep_prandtl(cfg.ks, p.pspec, shear, cfg.alpha, cfg.nodes_per_layer)
            rows = list(zip(b.ks, b.norm_U, b.k_norm_R))
            run.record("bounds", write_csv(run.out / "bounds.csv", ["k", "norm_U", "k_norm_R"], rows))
            print(f"plateau ratio k||R_k|| = {b.plateau_ratio():.4f}, limit rate = {b.limit_rate():.4f}")
    return 0


def cmd_evolve(run: Run, check=None):
    _ensure_spectrum(run)
    cfg, p = run.cfg, run.pipe
    status = 0
    with run.stage("evolve"):
        k = cfg.evolve_k
        if cfg.model == "hyperbolic":
            sc = p.sc
            ps = p.profile_set(k)
            lam = 1j * sc.tau * k ** (1 / 3)
            T = window(k, sc.sigma0, cfg.sigma_frac * sc.sigma0)
            U = ps.U.values
            tr = evolve(k, p.hshear, exact_state(ps, sc), T, remainder_forcing(ps, sc), cfg.alpha,
                        reference=lambda t: np.exp(lam * t) * U)
            exact = np.exp(sc.sigma0 * k ** (1 / 3) * tr.times) * ps.norm_U
        else:
            shear, spec = p.shear, p.pspec
            ps = build_profile_set_prandtl(k, spec, shear, prandtl_grid(shear, k, cfg.alpha,
                                                                        cfg.nodes_per_layer), cfg.alpha)
            f = prandtl_forcing(ps, spec, shear)
            T = window(k, spec.sigma0, cfg.sigma_frac * spec.sigma0, 0.5)
            U = ps.U.values
            tr = evolve_prandtl(k, shear, ps.U, T, f, cfg.alpha,
                                reference=lambda t: np.exp(f.rate * t) * U)
            exact = np.exp(spec.sigma0 * np.sqrt(k) * tr.times) * ps.norm_U
            sc = spec
        print(f"forced run k = {k}: max relative deviation {tr.ref_error:.3e} over T = {T:.4f}")
        doc = {"k": k, "dt": tr.dt, "times": tr.times, "norms": tr.norms, "model": cfg.model,
               "max_rel_error": tr.ref_error, "grid": tr.grid}
        run.record("trajectory", dump_json(doc, run.out / f"trajectory_k{k}.json"))
        line_plot(run.out / f"norm_vs_time_k{k}.svg",
                  [(tr.times, tr.norms, "numerical"), (tr.times, exact, "exact")],
                  title=f"forced run, k = {k}", xlabel="t", ylabel="weighted norm",
                  logy=True, dashed=(1,))
        run.record("norm_svg", run.out / f"norm_vs_time_k{k}.svg")
        run.checks["forced"] = bool(tr.ref_error <= 1e-2)
    if check == "duhamel":
        if cfg.model != "hyperbolic":
            raise ConfigurationError("the Duhamel check is implemented for the hyperbolic model")
        with run.stage("duhamel"):
            kd = cfg.duhamel_k
            ps = p.profile_set(kd)
            T = window(kd, p.sc.sigma0, cfg.sigma_frac * p.sc.sigma0)
            d = duhamel_check(ps, p.sc, p.hshear, T / 2, cfg.duhamel_M, workers=cfg.workers)
            ok = d.discrepancy <= 1e-2
            print(f"duhamel k = {kd}, M = {d.M}: relative discrepancy {d.discrepancy:.3e} "
                  f"[{'PASS' if ok else 'FAIL'}]")
            run.record("duhamel", dump_json(d, run.out / "duhamel.json"))
            run.checks["duhamel"] = ok
            status = 0 if ok else 1
    elif check not in (None, "forced"):
        raise ConfigurationError(f"unknown check {check!r}")
    return status


def cmd_inflate(run: Run):
    _ensure_spectrum(run)
    cfg, p = run.cfg, run.pipe
    with run.stage("inflate"):
        if cfg.model == "prandtl" and cfg.shear == "quadratic":
            o = quadratic_oracle(p.pspec, p.shear, cfg.oracle_k)
            ok = o.norm_R <= 1e-12 and abs(o.slope_ratio - 1) <= 0.02
            print(f"quadratic oracle k = {o.k}: slope / (sigma0_P sqrt k) = {o.slope_ratio:.6f}, "
                  f"max relative deviation {o.max_error:.3e}, ||R_k|| = {o.norm_R:.1e} "
                  f"[{'PASS' if ok else 'FAIL'}]")
            run.record("oracle", dump_json(o, run.out / "oracle.json"))
            run.checks["quadratic_oracle"] = ok
            return 0 if ok else 1
        if cfg.model == "hyperbolic":
            rep = p.inflation
            power = 1 / 3
        else:
            rep = p.pinflation if cfg.shear == "gaussian-bump" else None
            power = 1 / 2
            cross = growth_crossover(p.sc.sigma0, p.pspec_bump.sigma0)
            print(f"classical growth overtakes hyperbolic growth for k > {cross:.4g}")
        rows = [(r.k, r.S, r.t_argmax, r.C_ref) for r in rep.records]
        run.record("inflation_csv", write_csv(run.out / "inflation.csv",
                                              ["k", "S_k", "t_argmax", "C_ref"], rows))
        run.record("inflation_json", dump_json(rep, run.out / "inflation.json"))
        ks = np.array(rep.ks, float)
        S = np.array(rep.S)
        line_plot(run.out / "inflation.svg",
                  [(ks, S, "S_k"), (ks, reference_slope(ks, S[0], power), f"slope {power:.3g}"),
                   (ks, [r.C_ref for r in rep.records], "C_sigma k^p")],
                  title=f"{cfg.model} inflation, sigma = {cfg.sigma_frac:g} sigma0",
                  xlabel="k", ylabel="S_k", logx=True, logy=True, dashed=(1, 2))
        run.record("inflation_svg", run.out / "inflation.svg")
        for r in rep.records:
            print(f"k = {int(r.k):5d}  S_k = {r.S:.6f}  t_argmax = {r.t_argmax:.5f}  C_ref = {r.C_ref:.5f}")
        print(f"fitted exponent {rep.exponent():.4f}, increasing = {rep.increasing()}")
    return 0


def _check_ids(check):
    if check is None:
        return None
    try:
        return {int(c) for c in check.split(",")}
    except ValueError:
        raise ConfigurationError(f"--check for verify takes criterion numbers, got {check!r}") from None


def cmd_verify(run: Run, check=None):
    ids = _check_ids(check)
    _ensure_spectrum(run)
    lines = []

    def report(r):
        print(r.line(), flush=True)
        lines.append(r.line())
        run.checks[f"criterion_{r.id}"] = r.passed

    with run.stage("verify"):
        res = run_checks(run.pipe, ids, report=report)
    path = run.out / "verify_report.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    run.record("verify_report", path)
    return 0 if all(r.passed for r in res) else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="blayer", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "profiles", "evolve", "inflate", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--model", choices=("hyperbolic", "prandtl"))
        sp.add_argument("--shear", choices=("gaussian-bump", "quadratic"))
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--quick", action="store_true")
        sp.add_argument("--check", metavar="NAME")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(message)s", stream=sys.stderr)
    try:
        cfg = _cfg_from_args(args)
        run = Run(cfg)
        if args.command == "spectrum":
            code = cmd_spectrum(run)
        elif args.command == "profiles":
            code = cmd_profiles(run)
        elif args.command == "evolve":
            code = cmd_evolve(run, args.check)
        elif args.command == "inflate":
            code = cmd_inflate(run)
        else:
            code = cmd_verify(run, args.check)
        run.manifest()
        return code
    except BlayerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
