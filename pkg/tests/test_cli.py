import json
import subprocess
import sys

import numpy as np
import pytest

from biasdens.cli import main, parse_bias
from biasdens.errors import UsageError, ValidationError


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_bias_linear_families():
    w = parse_bias("linear:0.1,0.9")
    assert w(0.0) == pytest.approx(0.1) and w(1.0) == pytest.approx(1.0)
    assert parse_bias("linear:1,-0.95")(1.0) == pytest.approx(0.05)
    assert parse_bias("const:2").is_constant
    assert parse_bias("constant:2").params[0] == 2.0


def test_parse_bias_rejects_nonpositive():
    with pytest.raises(ValidationError, match="y="):
        parse_bias("linear:1,-1.5")


@pytest.mark.parametrize("text", ["linear", "linear:1", "const:", "cubic:1,2", "linear:a,b", "const:1,2"])
def test_parse_bias_grammar(text):
    with pytest.raises(UsageError):
        parse_bias(text)


def test_parse_bias_table(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("y,w\n0,1\n0.5,0.2\n1,1\n")
    w = parse_bias(f"table:{p}")
    assert w(0.25) == pytest.approx(0.6)
    with pytest.raises(ValidationError):
        parse_bias(f"table:{tmp_path / 'missing.csv'}")


def test_rcdb_monotone(capsys):
    code, out, _ = run(["rcdb", "--density", "monotone", "--bias", "linear:1,-0.95", "--m", 1,
                        "--n-direct", 25, "--json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["rcdb"] == pytest.approx(1.74, abs=0.02)
    # 25 * 1.7248 rounds to 43; the reference 44 comes from the rounded ratio 1.74
    assert data["equivalent_n"] == 43
    assert data["config"]["m"] == 1 and data["config"]["q_value"] > 0
    for key in ("mu", "i_f1", "i_fw"):
        assert data[key] > 0


def test_rcdb_normal_text(capsys):
    code, out, _ = run(["rcdb", "--density", "normal", "--bias", "linear:0.1,0.9", "--n-direct", 25], capsys)
    assert code == 0
    lines = dict(line.split("=", 1) for line in out.splitlines())
    assert float(lines["rcdb"]) == pytest.approx(1.07, abs=0.01)
    assert lines["equivalent_n"] == "27"
    assert json.loads(lines["config"])["density"] == "normal"


def test_usage_errors(capsys):
    for argv in (["nope"], ["rcdb"], ["rcdb", "--density", "normal", "--bias", "linear:1"],
                 ["rate", "--density", "normal", "--n-list", "1,x"]):
        code, _, err = run(argv, capsys)
        assert code == 2
        assert err.startswith("error code=2 kind=UsageError")
        assert len(err.strip().splitlines()) == 1


def test_flat_density_needs_explicit_q(capsys):
    code, _, err = run(["rcdb", "--density", "uniform"], capsys)
    assert code == 3
    assert "pass Q explicitly" in err


def test_unknown_density_is_validation_error(capsys):
    code, _, err = run(["rcdb", "--density", "bimodal"], capsys)
    assert code == 3
    assert "kind=" in err


def test_sample_then_estimate(tmp_path, capsys):
    s = tmp_path / "s.csv"
    code, _, _ = run(["sample", "--density", "normal", "--bias", "linear:0.1,0.9", "--n", 60,
                      "--seed", 4, "--out", s], capsys)
    assert code == 0
    lines = s.read_text().splitlines()
    assert lines[0] == "y" and len(lines) == 61
    side = json.loads((tmp_path / "s.csv.json").read_text())
    assert side["base_seed"] == 4 and side["n"] == 60
    assert side["config"]["seed"] == 4

    e = tmp_path / "e.csv"
    code, _, _ = run(["estimate", "--in", s, "--bias", "linear:0.1,0.9", "--out", e], capsys)
    assert code == 0
    rows = e.read_text().splitlines()
    assert rows[0] == "x,f_hat" and len(rows) == 402
    coeffs = json.loads((tmp_path / "e.csv.json").read_text())
    assert coeffs["estimator"] == "ep" and coeffs["n"] == 60
    assert coeffs["config"]["grid"] == 401
    x, fx = np.loadtxt(e, delimiter=",", skiprows=1).T
    assert np.trapezoid(fx, x) == pytest.approx(coeffs["coeffs"][0], abs=1e-3)


def test_estimate_empty_csv(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("y\n")
    out = tmp_path / "e.csv"
    code, _, err = run(["estimate", "--in", empty, "--out", out], capsys)
    assert code == 3
    assert err.startswith("error code=3")
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [empty]


def test_failed_bench_leaves_no_files(tmp_path, capsys):
    code, _, _ = run(["bench", "--density", "normal", "--n-direct", 1, "--out", tmp_path / "r.json",
                      "--records", tmp_path / "r.csv"], capsys)
    assert code == 3
    assert list(tmp_path.iterdir()) == []


def test_bench_outputs_and_rerun(tmp_path, capsys):
    def once(tag):
        argv = ["bench", "--density", "normal", "--bias", "linear:0.1,0.9", "--n-direct", 25,
                "--replications", 6, "--seed", 7, "--out", tmp_path / f"{tag}.json",
                "--records", tmp_path / f"{tag}.csv", "--tails", tmp_path / f"{tag}-tails.csv"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        assert "arm=direct n=25" in out and "arm=biased n=27" in out
        return [(tmp_path / f"{tag}{suffix}").read_bytes() for suffix in (".json", ".csv", "-tails.csv")]

    first, second = once("a"), once("b")
    report = json.loads(first[0])
    assert report["config"]["cli"]["replications"] == 6
    assert report["arm_sizes"] == {"direct": 25, "biased": 27}
    assert first[1] == second[1] and first[2] == second[2]
    # reports differ only in their own output paths
    a, b = json.loads(first[0]), json.loads(second[0])
    for d in (a, b):
        for key in ("out", "records", "tails"):
            d["config"]["cli"].pop(key)
    assert a == b


def test_sample_rerun_byte_identical(tmp_path, capsys):
    out = tmp_path / "s.csv"
    runs = []
    for _ in range(2):
        assert run(["sample", "--density", "monotone", "--bias", "linear:1,-0.95", "--n", 30,
                    "--seed", 9, "--out", out], capsys)[0] == 0
        runs.append((out.read_bytes(), (tmp_path / "s.csv.json").read_bytes()))
    assert runs[0] == runs[1]


def test_rate_outputs(tmp_path, capsys):
    out = tmp_path / "rate.csv"
    code, _, _ = run(["rate", "--density", "uniform", "--n-list", "50,100", "--replications", 5,
                      "--q-value", 1.0, "--out", out], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,mise,normalized" and [l.split(",")[0] for l in lines[1:]] == ["50", "100"]
    cfg = json.loads((tmp_path / "rate.csv.json").read_text())["config"]
    assert cfg["q_value"] == 1.0 and cfg["n_list"] == [50, 100]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "biasdens", "rcdb", "--density", "uniform",
                           "--q-value", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(proc.stdout.split("rcdb=")[1].split()[0]) == pytest.approx(1.0, abs=1e-12)
    proc = subprocess.run([sys.executable, "-m", "biasdens"], capture_output=True, text=True)
    assert proc.returncode == 2
