"""Run configuration.

Config files are flat `key = value` lines. Values are Python literals
(numbers, quoted or bare strings, true/false, [lists]); `#` starts a comment.
Example:

    model = hyperbolic
    shear = gaussian-bump
    ks = [64, 128, 256]
    sigma_frac = 0.5
"""

from __future__ import annotations

import ast
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError
from .numerics import ShearFlow

__all__ = ["RunConfig", "parse_config", "load_config", "config_hash"]

FULL_KS = (64, 128, 256, 512, 1024, 2048, 4096)


@dataclass(frozen=True)
class RunConfig:
    model: str = "hyperbolic"
    shear: str = "gaussian-bump"
    a: float = 2.0
    kappa: float = 1.0
    beta: float = 1.0
    alpha: float = 1.0
    eig_halfwidth: float = 12.0
    eig_nodes: int = 4000
    z_halfwidth: float = 12.0
    z_nodes: int = 4001
    nodes_per_layer: float = 32.0
    ks: tuple = FULL_KS
    sigma_frac: float = 0.5
    profile_k: int = 64
    evolve_k: int = 256
    duhamel_k: int = 64
    duhamel_M: int = 64
    oracle_k: int = 256
    demo_mu: tuple = (0.0, 0.25)
    demo_m: float = 0.0
    tol_eig: float = 1e-7
    tol_matching: float = 1e-6
    tol_jump: float = 1e-3
    workers: int = 1
    seed: int = 0
    quick: bool = False
    out: str = "blayer_out"

    def __post_init__(self):
        if self.model not in ("hyperbolic", "prandtl"):
            raise ConfigurationError(f"unknown model {self.model!r}")
        if self.shear not in ("gaussian-bump", "quadratic"):
            raise ConfigurationError(f"unknown shear {self.shear!r}")
        ks = tuple(int(k) for k in self.ks)
        if not ks or list(ks) != sorted(ks) or ks[0] < 1:
            raise ConfigurationError("k list must be nonempty, positive and ascending")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "demo_mu", tuple(float(m) for m in self.demo_mu))
        for name in ("tol_eig", "tol_matching", "tol_jump"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 < self.sigma_frac < 1:
            raise ConfigurationError("sigma_frac must lie in (0, 1)")
        if self.z_nodes % 2 == 0:
            raise ConfigurationError("z_nodes must be odd")

    def shear_flow(self) -> ShearFlow:
        return ShearFlow(self.shear, a=self.a, kappa=self.kappa, beta=self.beta)

    def quick_profile(self) -> "RunConfig":
        """k <= 512 and half resolution."""
        if self.quick:
            return self
        ks = tuple(k for k in self.ks if k <= 512) or self.ks[:1]
        return dataclasses.replace(self, ks=ks, eig_nodes=max(500, self.eig_nodes // 2),
                                   z_nodes=(self.z_nodes // 2) | 1,
                                   nodes_per_layer=self.nodes_per_layer / 2,
                                   evolve_k=min(self.evolve_k, 512), quick=True)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw) if kw else self

    def output_dir(self) -> Path:
        return Path(os.environ.get("BLAYER_OUT") or self.out)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, value):
    t = _TYPES[key]
    try:
        if t == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if t == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if t == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if t == "tuple":
            if not isinstance(value, (list, tuple)):
                value = [value]
            return tuple(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"bad value for {key}: {value!r}") from None


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    vals = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        low = val.lower()
        if low in ("true", "false"):
            obj = low == "true"
        else:
            try:
                obj = ast.literal_eval(val)
            except (ValueError, SyntaxError):
                obj = val
        vals[key] = _coerce(key, obj)
    return dataclasses.replace(base or RunConfig(), **vals)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the canonical JSON of the settings that affect results."""
    d = cfg.as_dict()
    for k in ("out", "workers"):
        d.pop(k, None)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
