import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blayer.config import RunConfig, config_hash, load_config, parse_config
from blayer.errors import ConfigurationError
from blayer.io import (canonical_json, decode, dump_json, encode, fmt, load_json, read_csv,
                       write_csv)
from blayer.numerics import ComplexProfile, Grid1D
from blayer.svg import line_plot


# config

def test_parse_config():
    cfg = parse_config("""
        # comment
        model = prandtl
        shear = "quadratic"
        ks = [64, 128]   # trailing comment
        sigma_frac = 0.25
        quick = true
    """)
    assert cfg.model == "prandtl" and cfg.shear == "quadratic"
    assert cfg.ks == (64, 128) and cfg.sigma_frac == 0.25 and cfg.quick


@pytest.mark.parametrize("text", ["bogus = 1", "ks = [128, 64]", "sigma_frac = 1.5",
                                  "model = euler", "evolve_k = 2.5", "no equals sign",
                                  "z_nodes = 4000", "tol_eig = 0"])
def test_bad_config(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


def test_load_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("evolve_k = 128\n")
    assert load_config(p).evolve_k == 128


def test_config_hash():
    a = RunConfig()
    assert config_hash(a) == config_hash(a.with_overrides(out="elsewhere", workers=4))
    assert config_hash(a) != config_hash(a.with_overrides(ks=(64, 128)))
    assert len(config_hash(a)) == 64


def test_quick_profile():
    q = RunConfig().quick_profile()
    assert max(q.ks) <= 512 and q.quick
    assert q.eig_nodes == RunConfig().eig_nodes // 2
    assert q.z_nodes % 2 == 1


def test_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("BLAYER_OUT", str(tmp_path))
    assert RunConfig().output_dir() == tmp_path


# serialization

@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_roundtrip(x):
    assert float(fmt(x)) == x


def test_profile_roundtrip():
    g = Grid1D(0.0, 3.0, 7, 2)
    p = ComplexProfile(g, np.linspace(0, 1, 7) * (1 - 2j) / 3)
    q = decode(json.loads(canonical_json(encode(p))))
    assert q.grid == g and np.array_equal(q.values, p.values)


def test_dataclass_roundtrip(tmp_path, sc, wprof):
    back = load_json(dump_json(sc, tmp_path / "c.json"))
    assert back.gamma == sc.gamma and back.tau == sc.tau and back.sigma0 == sc.sigma0
    assert back.model == sc.model and back.sign == sc.sign
    w2 = load_json(dump_json(wprof, tmp_path / "w.json"))
    assert np.array_equal(w2.W.values, wprof.W.values)
    assert w2.x.gamma == wprof.x.gamma


def test_json_deterministic(tmp_path, sc):
    a = dump_json(sc, tmp_path / "a.json").read_bytes()
    b = dump_json(sc, tmp_path / "b.json").read_bytes()
    assert a == b


def test_csv_roundtrip(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["k", "S"], [(64, 0.1), (128, 1 / 3)])
    head, rows = read_csv(p)
    assert head == ["k", "S"] and rows[1] == ["128", fmt(1 / 3)]


def test_svg_deterministic(tmp_path):
    x = np.linspace(1, 10, 50)
    s = [(x, x**2, "a"), (x, x, "b")]
    a = line_plot(tmp_path / "a.svg", s, logx=True, logy=True).read_text()
    b = line_plot(tmp_path / "b.svg", s, logx=True, logy=True).read_text()
    assert a == b and a.startswith("<svg") and "polyline" in a
