import hashlib
import json
import os
import subprocess
import sys

import pytest

import bowenkit as bk
from conftest import config_path, read_results

CSV_HEADER = ("experiment, system, epsilon, eps_prime, n, f_of_n, "
              "N_hat or mu_hat, ratio_bits, ci_lo, ci_hi, flags")

ENTRANCE_DEAD_END = """\
[experiment]
kind = entrance_time
name = dead_end

[system]
name = rotation
gamma = 1/3

[parameters]
center = 0.0
target = 0.5
radii = 0.03125, 0.015625
horizon = 1000
seed = 1
"""


def cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "bowenkit", *args],
                          capture_output=True, text=True, env=env)


def test_run_config_artifacts_and_manifest(outdir):
    man = bk.run_config(config_path("zero_rotation_bk.cfg"), outdir)
    csv_p = outdir / "results.csv"
    svg_p = outdir / "ratios.svg"
    man_p = outdir / "manifest.json"
    assert csv_p.exists() and svg_p.exists() and man_p.exists()
    text = csv_p.read_text()
    assert text.splitlines()[0] == CSV_HEADER
    doc = json.loads(man_p.read_text())
    assert doc["outputs"]["results.csv"] == \
        hashlib.sha256(text.encode()).hexdigest()
    assert doc["outputs"]["ratios.svg"] == \
        hashlib.sha256(svg_p.read_bytes()).hexdigest()
    assert doc["seed"] == man.seed
    assert svg_p.read_text().startswith("<svg") or \
        "<svg" in svg_p.read_text()[:200]


def test_run_config_worker_count_invariant(tmp_path):
    a = tmp_path / "w1"
    b = tmp_path / "w4"
    bk.run_config(config_path("zero_rotation_bk.cfg"), a, workers=1)
    bk.run_config(config_path("zero_rotation_bk.cfg"), b, workers=4)
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "ratios.svg").read_bytes() == (b / "ratios.svg").read_bytes()


TINY_CURVE = """\
[experiment]
kind = complexity_curve
name = tiny

[system]
name = doubling

[parameters]
epsilon = 0.01
eps_prime = 0.1
n_grid = linear:5:9
m = 2000
seed = 1
gauge = identity
"""


def test_seed_override_changes_hash(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY_CURVE)
    m0 = bk.run_config(str(cfg), tmp_path / "s1")
    m9 = bk.run_config(str(cfg), tmp_path / "s9", seed=9)
    assert (m0.seed, m9.seed) == (1, 9)
    assert m0.outputs["results.csv"] != m9.outputs["results.csv"]


def test_failed_run_leaves_no_partial_outputs(tmp_path):
    cfg = tmp_path / "dead.cfg"
    cfg.write_text(ENTRANCE_DEAD_END)
    out = tmp_path / "out"
    with pytest.raises(bk.ResolutionError):
        bk.run_config(str(cfg), out)
    assert not (out / "results.csv").exists()
    assert not (out / "ratios.svg").exists()
    assert not (out / "manifest.json").exists()


def test_bk_rows_carry_fit_and_ci(outdir):
    bk.run_config(config_path("zero_rotation_bk.cfg"), outdir)
    _, rows = read_results(outdir / "results.csv")
    assert rows[0]["experiment"] == "zero_rotation_bk"
    assert rows[0]["system"] == "rotation"
    assert any("tail_slope=" in r["flags"] for r in rows)
    for r in rows:
        assert float(r["ci_lo"]) <= float(r["N_hat or mu_hat"]) \
            <= float(r["ci_hi"])


def test_cli_run_and_validate(tmp_path):
    out = tmp_path / "cli_out"
    r = cli("run", config_path("zero_identity_bk.cfg"), "--output", str(out),
            "--workers", "2")
    assert r.returncode == 0, r.stderr
    assert (out / "results.csv").exists()
    v = cli("validate", config_path("zero_identity_bk.cfg"))
    assert v.returncode == 0
    assert "ok:" in v.stdout


def test_cli_rejects_bad_inputs(tmp_path):
    assert cli("run", "/nonexistent.cfg").returncode == 2
    assert cli("validate", "/nonexistent.cfg").returncode == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[experiment]\nkind = nope\n")
    assert cli("validate", str(bad)).returncode == 2
    assert cli("list-systems", "--frobnicate").returncode == 2


def test_cli_resolution_failure_exit_code(tmp_path):
    cfg = tmp_path / "dead.cfg"
    cfg.write_text(ENTRANCE_DEAD_END)
    r = cli("run", str(cfg), "--output", str(tmp_path / "o"))
    assert r.returncode == 3
    assert "resolution failure" in r.stderr


def test_cli_list_systems():
    r = cli("list-systems")
    assert r.returncode == 0
    names = {ln.split()[0] for ln in r.stdout.splitlines()[1:] if ln.strip()}
    assert names == {"rotation", "doubling", "identity", "iet", "logistic",
                     "casati_prosen", "cut_torus", "pw_isometry_2d"}
    j = cli("list-systems", "--json")
    doc = json.loads(j.stdout)
    assert set(doc) == names
    for meta in doc.values():
        assert "parameters" in meta and "description" in meta


def test_cli_output_dir_env_and_flag_precedence(tmp_path):
    env_dir = tmp_path / "from_env"
    flag_dir = tmp_path / "from_flag"
    r = cli("run", config_path("zero_identity_bk.cfg"),
            env_extra={"OUTPUT_DIR": str(env_dir)})
    assert r.returncode == 0, r.stderr
    assert (env_dir / "results.csv").exists()
    r2 = cli("run", config_path("zero_identity_bk.cfg"), "--output",
             str(flag_dir), env_extra={"OUTPUT_DIR": str(env_dir / "x")})
    assert r2.returncode == 0
    assert (flag_dir / "results.csv").exists()
    assert not (env_dir / "x").exists()


def test_cli_version():
    r = cli("--version")
    assert r.returncode == 0
    assert bk.__version__ in r.stdout
