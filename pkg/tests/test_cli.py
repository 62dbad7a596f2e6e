import json
import math
import os
import subprocess
import sys

import pytest

from gic.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


CHAN = ["--p1", "1", "--p2", "1", "--noise", "1"]


def test_corners_weak(capsys):
    code, out = run(capsys, "corners", *CHAN, "--a", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["regime"] == "weak"
    assert doc["c1_prime"] == pytest.approx(0.111572, abs=1e-6)
    assert doc["c2_prime"] == pytest.approx(0.255413, abs=1e-6)
    assert "sum_rate" not in doc


def test_corners_bits(capsys):
    _, nats = run(capsys, "corners", *CHAN, "--a", "1.5")
    _, bits = run(capsys, "corners", *CHAN, "--a", "1.5", "--units", "bits")
    n, b = json.loads(nats), json.loads(bits)
    for f in ("c1", "c2", "c1_prime", "c2_prime", "sum_rate"):
        assert b[f] == pytest.approx(n[f] / math.log(2), rel=1e-15)


@pytest.mark.parametrize("argv", [
    ["corners", *CHAN, "--a", "-1"],
    ["corners", *CHAN, "--a", "0.5", "--b", "0.2"],
    ["corners", "--p1", "1"],
    ["corners", *CHAN, "--a", "x"],
    ["region", *CHAN, "--a", "nan"],
    ["frobnicate"],
])
def test_usage_errors_exit_2_with_json(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 2
    assert "error" in json.loads(out)


def test_region_csv_and_plot(capsys, tmp_path):
    out_csv = tmp_path / "r.csv"
    fig = tmp_path / "r.png"
    code, _ = run(capsys, "region", *CHAN, "--a", "0.5", "--out", str(out_csv), "--plot", str(fig))
    rows = out_csv.read_text().splitlines()
    assert code == 0 and rows[0] == "r1,r2,certified"
    assert [r.split(",")[2] for r in rows[1:]] == ["true", "false", "true", "true"]
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    fig2 = tmp_path / "r2.png"
    run(capsys, "region", *CHAN, "--a", "0.5", "--plot", str(fig2))
    assert fig.read_bytes() == fig2.read_bytes()


def test_region_strong_all_certified(capsys):
    _, out = run(capsys, "region", *CHAN, "--a", "1.5")
    assert all(r.endswith("true") for r in out.splitlines()[1:])
    assert len(out.splitlines()) == 5


def test_region_rejects_unknown_figure_format(capsys, tmp_path):
    code, out = run(capsys, "region", *CHAN, "--a", "0.5", "--plot", str(tmp_path / "r.gif"))
    assert code == 2


def _spec(tmp_path, doc, name="d.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_entropy_specs(capsys, tmp_path):
    _, out = run(capsys, "entropy", "--in", _spec(tmp_path, {"kind": "gaussian", "mean": [0], "var": [1]}))
    assert json.loads(out)["entropy"] == pytest.approx(1.418939, abs=1e-6)
    r3 = math.sqrt(3)
    _, out = run(capsys, "entropy", "--in", _spec(tmp_path, {"kind": "uniform", "low": [-r3], "high": [r3]}))
    assert json.loads(out)["entropy"] == pytest.approx(1.242453, abs=1e-6)


def test_entropy_samples(capsys, tmp_path):
    import numpy as np

    x = np.random.default_rng(0).standard_normal((5000, 2))
    p = tmp_path / "s.csv"
    p.write_text("a,b\n" + "\n".join(f"{u},{v}" for u, v in x))
    code, out = run(capsys, "entropy", "--in", str(p), "--header", "--k", "3")
    doc = json.loads(out)
    assert code == 0 and doc["method"] == "knn" and doc["k"] == 3
    assert doc["entropy"] == pytest.approx(2 * 1.418939, abs=0.1)
    _, out = run(capsys, "entropy", "--in", str(p), "--header", "--dims", "2")
    assert json.loads(out)["dim"] == 1


@pytest.mark.parametrize("content", ["{not json", "1,2\n3\n", '{"kind": "atoms", "points": [[0], [1]]}'])
def test_entropy_bad_input(capsys, tmp_path, content):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    code, out = run(capsys, "entropy", "--in", str(p))
    assert code == 2 and "error" in json.loads(out)


def test_entropy_missing_file(capsys, tmp_path):
    code, _ = run(capsys, "entropy", "--in", str(tmp_path / "nope.json"))
    assert code == 2


def test_knothe_uniform(capsys, tmp_path):
    r3 = math.sqrt(3)
    spec = _spec(tmp_path, {"kind": "uniform", "low": [-r3], "high": [r3]})
    table = tmp_path / "map.csv"
    diag = tmp_path / "diag.json"
    code, _ = run(capsys, "knothe", "--in", spec, "--out", str(table), "--json", str(diag),
                  "--samples", "20000", "--plot", str(tmp_path / "k.svg"))
    doc = json.loads(diag.read_text())
    assert code == 0
    assert doc["stein_check"]["pass"] and doc["change_of_variables_check"]["pass"]
    assert doc["jacobian"]["rho_empirical"] == pytest.approx(0.9772, abs=0.005)
    assert table.read_text().startswith("coord,y1,value,slope")
    assert (tmp_path / "k.svg").exists()


def test_knothe_gaussian_identity_npz(capsys, tmp_path):
    import numpy as np

    spec = _spec(tmp_path, {"kind": "gaussian", "mean": [0, 0], "var": [1, 1]})
    code, out = run(capsys, "knothe", "--in", spec, "--out", str(tmp_path / "m.npz"), "--samples", "5000")
    assert code == 0
    data = np.load(tmp_path / "m.npz")
    y = np.linspace(-10, 10, data["values_1"].shape[-1])
    assert np.abs(data["values_1"] - y).max() < 1e-9
    assert json.loads(out)["jacobian"]["mean_trace_over_n"] == pytest.approx(1.0, abs=1e-6)


def test_knothe_atoms_rejected(capsys, tmp_path):
    spec = _spec(tmp_path, {"kind": "atoms", "points": [[0.0], [1.0]]})
    code, out = run(capsys, "knothe", "--in", spec)
    assert code == 2 and "density" in json.loads(out)["error"]["message"]


def test_verify_fork_passes(capsys):
    code, out = run(capsys, "verify", "--lemma", "fork", "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["reports"][0]["lemma_id"] == "fork"


def test_verify_too_tight_is_exit_1_and_flagged(capsys):
    code, out = run(capsys, "verify", "--lemma", "fork", "--tol", "1e-15")
    rep = json.loads(out)["reports"][0]
    assert code == 1 and not rep["pass"] and rep["tolerance_too_tight"]


def test_verify_unknown_lemma(capsys):
    code, out = run(capsys, "verify", "--lemma", "8")
    assert code == 2


def test_verify_chains_with_channel(capsys):
    code, out = run(capsys, "verify", "--lemma", "chain-costa,chain-sato", *CHAN, "--a", "0.3")
    doc = json.loads(out)
    assert code == 0 and [r["lemma_id"] for r in doc["reports"]] == ["chain-sato", "chain-costa"]


def test_seed_from_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("GIC_SEED", "11")
    _, out = run(capsys, "verify", "--lemma", "chain-strong")
    assert json.loads(out)["seed"] == 11
    _, out = run(capsys, "verify", "--lemma", "chain-strong", "--seed", "4")
    assert json.loads(out)["seed"] == 4
    monkeypatch.setenv("GIC_SEED", "abc")
    code, _ = run(capsys, "verify", "--lemma", "chain-strong")
    assert code == 2


def test_atomic_output_leaves_no_temp_files(capsys, tmp_path):
    out = tmp_path / "c.json"
    run(capsys, "corners", *CHAN, "--a", "0.5", "--out", str(out))
    assert [p.name for p in tmp_path.iterdir()] == ["c.json"]


def test_console_script_module_entry():
    res = subprocess.run([sys.executable, "-m", "gic.cli", "corners", *CHAN, "--a", "0.5"],
                         capture_output=True, text=True, env={**os.environ})
    assert res.returncode == 0 and json.loads(res.stdout)["regime"] == "weak"
