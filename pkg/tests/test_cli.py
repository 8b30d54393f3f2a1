import csv
import io
import json
import subprocess
import sys

import pytest

from scaling_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return "".join(line + "\n" for line in out.splitlines() if not line.startswith("#"))


def csv_rows(out):
    return list(csv.DictReader(io.StringIO(body(out))))


def test_aoar_barker(capsys):
    code, out, _ = run(capsys, "aoar", "--g", "barker")
    assert code == 0
    assert out.startswith("# scaling-lab aoar ")
    rec = json.loads(body(out))
    assert rec["aoar"] == pytest.approx(0.158, abs=0.002)
    assert rec["l_star_sqrt_I"] == pytest.approx(2.46, abs=0.01)
    assert rec["theta_star"] == pytest.approx(6.028, abs=0.01)


def test_degenerate_mixture_same_as_mh(capsys):
    _, a, _ = run(capsys, "aoar", "--g", "mix:1.0*mh")
    _, b, _ = run(capsys, "aoar", "--g", "mh")
    assert body(a) == body(b)


def test_table1_csv(capsys):
    code, out, _ = run(capsys, "table1")
    rows = csv_rows(out)
    assert code == 0
    assert list(rows[0]) == ["name", "aoar", "l_star_sqrt_I", "theta_star", "speed"]
    assert [r["name"] for r in rows][:2] == ["mh", "bedard:1"]
    assert len(rows) == 8
    assert rows[0]["aoar"] == "0.23381"  # six significant digits


def test_table1_custom_rows_json(capsys):
    code, out, err = run(capsys, "table1", "--g", "mh", "--g", "barker", "--format", "json")
    assert code == 0 and len(json.loads(body(out))) == 2


def test_sweep_and_curves(capsys):
    code, out, _ = run(capsys, "sweep", "--g", "mh", "--theta-grid", "1:10:4", "--log")
    rows = csv_rows(out)
    assert code == 0 and [float(r["theta"]) for r in rows] == pytest.approx([1, 10 ** (1 / 3), 10 ** (2 / 3), 10], rel=1e-5)
    code, out, _ = run(capsys, "curves", "--g1", "barker", "--g2", "mh", "--theta-grid", "0.01:100:20")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 20
    assert list(rows[0]) == ["theta", "h1", "h2", "m1", "m2", "ratio"]
    assert min(float(r["ratio"]) for r in rows) > 0.5


def test_simulate_columns_and_determinism(capsys):
    argv = ["simulate", "--g", "barker", "--d", "5", "--l", "2.0", "--iters", "20000", "--seed", "7"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    rows = csv_rows(a)
    assert list(rows[0]) == ["d", "l", "accept_rate_indicator", "accept_rate_rao", "lag1", "esjd", "seed"]
    assert rows[0]["seed"] == "7"
    assert '"seed": 7' in a.splitlines()[0]


def test_seed_env_var(capsys, monkeypatch):
    argv = ["simulate", "--g", "mh", "--d", "2", "--l", "1", "--iters", "5000"]
    monkeypatch.setenv("SCALING_LAB_SEED", "11")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--seed", "11")
    assert a == b
    monkeypatch.delenv("SCALING_LAB_SEED")
    _, c, _ = run(capsys, *argv)
    _, d, _ = run(capsys, *argv, "--seed", "0")
    assert c == d and c != a
    monkeypatch.setenv("SCALING_LAB_SEED", "banana")
    code, _, err = run(capsys, *argv)
    assert code == 2 and "SCALING_LAB_SEED" in err


def test_dims(capsys):
    code, out, _ = run(capsys, "dims", "--g", "mh", "--l", "0.0001", "--dims", "5", "--iters", "5000")
    rows = csv_rows(out)
    assert code == 0 and float(rows[0]["accept_rate_indicator"]) > 0.999


def test_finite_d(capsys):
    code, out, _ = run(capsys, "finite-d", "--g", "mh", "--d", "1", "--l-grid", "1:4:0.5",
                       "--iters", "20000", "--format", "json")
    assert code == 0
    text = body(out)
    dec = json.JSONDecoder()
    summary, end = dec.raw_decode(text)
    grid, _ = dec.raw_decode(text[end:].lstrip())
    assert set(summary) == {"l_opt", "accept_rate_at_opt", "endpoint"}
    assert [g["l"] for g in grid] == [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]


def test_factory_cells(capsys):
    code, out, _ = run(capsys, "factory", "--r", "2", "--trials", "2000", "--cells", "3", "--seed", "1")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 3
    assert list(rows[0]) == ["r", "cx", "cy", "px", "py", "alpha_exact", "alpha_hat", "se", "rounds_mean"]
    assert '"op": "die-coin-r2"' in out.splitlines()[0]


def test_factory_op_mismatch(capsys):
    code, _, err = run(capsys, "factory", "--r", "3", "--op", "two-coin", "--trials", "10")
    assert code == 2 and "does not match" in err


def test_factory_chain(capsys):
    code, out, _ = run(capsys, "factory", "--chain", "--r", "1", "--iters", "3000")
    rows = csv_rows(out)
    assert code == 0 and rows[0]["accept_rate_rao"] == "" and float(rows[0]["mean_rounds"]) >= 1


def test_factory_chain_envelope(capsys):
    code, out, _ = run(capsys, "factory", "--chain", "--r", "3", "--iters", "3000", "--envelope", "2")
    assert code == 0 and '"envelope": 2.0' in out.splitlines()[0]


def test_odd_check(capsys):
    code, out, _ = run(capsys, "odd-check", "--g", "barker", "--theta", "1")
    rec = json.loads(body(out))
    assert code == 0 and abs(rec["odd_moment"]) <= 1e-10 and rec["balance_pass"] is True
    assert rec["lipschitz_lower_bound"] == pytest.approx(0.25, abs=1e-6)


def test_moment_check(capsys):
    code, out, _ = run(capsys, "moment-check", "--target", "normal")
    rec = json.loads(body(out))
    assert code == 0 and rec["score_8th"] == pytest.approx(105) and rec["curvature_4th"] == pytest.approx(60)


def test_out_file(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "sweep", "--g", "mh", "--theta-grid", "1:2:2", "--out", str(path))
    assert code == 0 and out == "" and path.read_text().startswith("# scaling-lab sweep")


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        ["aoar"],
        ["aoar", "--g", "metropolis"],
        ["aoar", "--g", "mh", "--format", "xml"],
        ["sweep", "--g", "mh", "--theta-grid", "5:1:3"],
        ["simulate", "--g", "mh", "--d", "0", "--l", "1"],
        ["simulate", "--g", "mh", "--d", "2", "--l", "-1"],
        ["simulate", "--g", "mh", "--d", "2", "--l", "1", "--seed", "-3"],
        ["moment-check", "--target", "cauchy"],
        ["dims", "--g", "mh", "--l", "1", "--dims", "0,5"],
    ],
)
def test_usage_errors(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2 and out == ""


def test_bracket_failure_is_runtime_error(capsys):
    code, _, err = run(capsys, "aoar", "--g", "mh", "--hi", "1")
    assert code == 1
    assert "BracketError" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "scaling_lab", "aoar", "--g", "mh"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(body(res.stdout))["aoar"] == pytest.approx(0.234, abs=0.002)
