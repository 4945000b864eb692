import csv
import json

import pytest

from blayer.cli import main


def run(*args):
    return main(list(args))


@pytest.fixture(scope="module")
def out(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run("spectrum", "--quick", "--out", str(d)) == 0
    return d


def test_spectrum_outputs(out):
    for name in ("eigenpair.json", "xprofile.json", "wprofile.json", "constants.json",
                 "manifest.json"):
        assert (out / name).exists()
    c = json.loads((out / "constants.json").read_text())
    assert float(c["tau"]["im"]) < 0 and c["model"] == "hyperbolic"


def test_spectrum_deterministic(out, tmp_path):
    assert run("spectrum", "--quick", "--out", str(tmp_path)) == 0
    for name in ("eigenpair.json", "xprofile.json", "wprofile.json", "constants.json"):
        assert (out / name).read_bytes() == (tmp_path / name).read_bytes()


def test_spectrum_prandtl(tmp_path):
    assert run("spectrum", "--model", "prandtl", "--quick", "--out", str(tmp_path)) == 0
    c = json.loads((tmp_path / "constants.json").read_text())
    assert c["model"] == "prandtl" and float(c["tau"]["im"]) < 0


def test_profiles_and_inflate(out, capsys):
    assert run("profiles", "--quick", "--out", str(out)) == 0
    assert (out / "bounds.csv").exists() and (out / "profile_k64.svg").exists()
    assert run("inflate", "--quick", "--out", str(out)) == 0
    with open(out / "inflation.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "S_k", "t_argmax", "C_ref"]
    assert [int(r[0]) for r in rows[1:]] == [64, 128, 256, 512]
    assert (out / "inflation.svg").read_text().startswith("<svg")


def test_evolve_duhamel(out, capsys):
    assert run("evolve", "--quick", "--out", str(out), "--check", "duhamel") == 0
    text = capsys.readouterr().out
    assert "relative discrepancy" in text and "[PASS]" in text
    assert (out / "trajectory_k256.json").exists()


def test_quadratic_oracle_cli(tmp_path, capsys):
    code = run("inflate", "--model", "prandtl", "--shear", "quadratic", "--quick",
               "--out", str(tmp_path))
    assert code == 0
    assert "slope / (sigma0_P sqrt k)" in capsys.readouterr().out


def test_manifest(out):
    m = json.loads((out / "manifest.json").read_text())
    assert len(m["config_hash"]) == 64 and m["version"]
    for entry in m["files"].values():
        assert (out / entry["path"]).exists() and len(entry["sha256"]) == 64


def test_corrupted_constants(out, tmp_path, capsys):
    for name in ("constants.json", "wprofile.json", "xprofile.json", "eigenpair.json"):
        (tmp_path / name).write_bytes((out / name).read_bytes())
    c = json.loads((tmp_path / "constants.json").read_text())
    c["tau"]["re"] = str(1.2 * float(c["tau"]["re"]))
    (tmp_path / "constants.json").write_text(json.dumps(c))
    assert run("verify", "--quick", "--check", "4", "--out", str(tmp_path)) == 1
    assert "[FAIL] criterion  4" in capsys.readouterr().out
    assert run("profiles", "--quick", "--out", str(tmp_path)) == 1


def test_bad_config_exit_code(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("sigma_frac = 7\n")
    assert run("spectrum", "--config", str(p), "--out", str(tmp_path)) == 3


def test_env_output_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("BLAYER_OUT", str(tmp_path / "env"))
    assert run("spectrum", "--quick") == 0
    assert (tmp_path / "env" / "constants.json").exists()
