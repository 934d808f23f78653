import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from mkzlab.cli import COLUMNS, EXIT_CONFIG, EXIT_DEFICIT, EXIT_FAIL, EXIT_OK, SCHEMA, main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("MKZLAB_"):
            monkeypatch.delenv(key)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, list(csv.DictReader(io.StringIO(out))) if out and "--format" not in argv else out


def col(rows, name, **where):
    return [float(r[name]) for r in rows if all(r[k] == v for k, v in where.items())]


# ---- moments -----------------------------------------------------------------

def test_moments_q_one_passes(capsys):
    code, rows = run(capsys, "moments", "--family", "q-mkz", "--q", "1.0", "--n", "10", "--grid", "11")
    assert code == EXIT_OK
    # 11 grid points plus the endpoint x = 1
    assert len(rows) == 12 and list(rows[0]) == COLUMNS["moments"]
    assert max(col(rows, "e0_err")) <= 1e-9 and max(col(rows, "e1_err")) <= 1e-9
    assert max(col(rows, "lower_violation") + col(rows, "upper_violation")) == 0.0


def test_moments_rejects_q_one_durrmeyer(capsys):
    assert main(["moments", "--family", "durrmeyer", "--q", "1.0", "--n", "5"]) == EXIT_CONFIG


def test_moments_rejects_small_n(capsys):
    assert main(["moments", "--family", "q-mkz", "--q", "0.5", "--n", "2"]) == EXIT_CONFIG


def test_moments_n_range_and_durrmeyer_rows(capsys):
    code, rows = run(capsys, "moments", "--family", "durrmeyer", "--q", "0.6", "--n", "3-5", "--grid", "5")
    assert code == EXIT_OK
    assert sorted({int(r["n"]) for r in rows}) == [3, 4, 5]
    # the Durrmeyer envelope concerns m2 - x^2
    for r in rows:
        assert float(r["e2_checked"]) == pytest.approx(float(r["m2"]) - float(r["x"]) ** 2, abs=1e-15)


def test_moments_deficit_exit(capsys):
    code = main(["moments", "--family", "q-mkz", "--q", "1.0", "--n", "10", "--max-terms", "5"])
    assert code == EXIT_DEFICIT


def test_moments_slack_violation_exit(capsys):
    # a negative slack turns the tight lower bound at x = 0 into a violation
    code = main(["moments", "--family", "q-mkz", "--q", "0.5", "--n", "3", "--slack=-1e-3"])
    assert code == EXIT_FAIL


# ---- abel --------------------------------------------------------------------

def test_abel_cube_decreasing(capsys):
    code, rows = run(capsys, "abel", "--seq", "cube", "--target", "inv-bracket", "--ys", "0.9,0.99,0.999")
    assert code == EXIT_OK
    v = col(rows, "value")
    assert len(v) == 3 and v[0] > v[1] > v[2]
    assert all(float(t) <= 1e-12 for t in col(rows, "tail_bound"))


def test_abel_const_one_inv_bracket(capsys):
    code, rows = run(capsys, "abel", "--seq", "const:1", "--target", "inv-bracket", "--ys", "0.9")
    y = 0.9
    oracle = (1 - y) * math.fsum(y**n / (n - 1) for n in range(3, 400))
    assert code == EXIT_OK and col(rows, "value")[0] == pytest.approx(oracle, abs=1e-12)
    # closed form: (1-y) y (-log(1-y) - y)
    assert oracle == pytest.approx((1 - y) * y * (-math.log(1 - y) - y), abs=1e-13)


def test_abel_cube_classical_fails(capsys):
    code, rows = run(capsys, "abel", "--seq", "cube", "--check", "classical", "--density", "1000")
    assert code == EXIT_OK
    kinds = [r["kind"] for r in rows]
    assert kinds.count("classical") == 1 and kinds.count("density") == 1
    assert [r["verdict"] for r in rows if r["kind"] == "classical"] == ["fails"]
    assert col(rows, "count", kind="density") == [10.0]


def test_abel_start_index_guard(capsys):
    assert main(["abel", "--target", "inv-bracket", "--start-index", "1"]) == EXIT_CONFIG
    code, rows = run(capsys, "abel", "--seq", "const:1", "--target", "qseq", "--ys", "0.5",
                     "--start-index", "1")
    assert col(rows, "value")[0] == pytest.approx(0.5, abs=1e-12)


# ---- korovkin ----------------------------------------------------------------

@pytest.mark.slow
def test_korovkin_cube_sinpi(capsys):
    code, rows = run(capsys, "korovkin", "--family", "q-mkz", "--seq", "cube", "--f", "sinpi",
                     "--ys", "0.9,0.99")
    assert code == EXIT_OK
    v = col(rows, "error_norm", f="sinpi")
    assert v[0] > v[1]
    assert {r["f"] for r in rows} == {"sinpi", "e0", "e1", "e2"}


def test_korovkin_e0_constant_one(capsys):
    code, rows = run(capsys, "korovkin", "--family", "q-mkz", "--seq", "const:1", "--f", "e0",
                     "--grid", "21")
    assert code == EXIT_OK
    assert all(v <= 1e-12 for v in col(rows, "error_norm", f="e0"))


@pytest.mark.slow
def test_korovkin_durrmeyer_prime_e2(capsys):
    code, rows = run(capsys, "korovkin", "--family", "durrmeyer", "--seq", "prime", "--f", "e2",
                     "--ys", "0.9,0.99")
    assert code == EXIT_OK
    v = col(rows, "error_norm", f="e2")
    assert v[0] > v[1]


def test_korovkin_threshold_and_q_conflict(capsys):
    code = main(["korovkin", "--q", "1", "--f", "e2", "--grid", "11", "--threshold", "1e-6"])
    assert code == EXIT_FAIL
    assert main(["korovkin", "--q", "1", "--seq", "cube", "--grid", "11"]) == EXIT_CONFIG
    assert main(["korovkin", "--f", "cosh"]) == EXIT_CONFIG


# ---- rate --------------------------------------------------------------------

def test_rate_durrmeyer_abshalf(capsys):
    code, rows = run(capsys, "rate", "--family", "durrmeyer", "--q", "0.9", "--f", "abshalf",
                     "--ys", "0.5,0.9")
    assert code == EXIT_OK and len(rows) == 2
    assert all(m >= 0 for m in col(rows, "margin"))


def test_rate_const_two_is_zero_row(capsys):
    code, rows = run(capsys, "rate", "--family", "q-mkz", "--f", "const:2", "--ys", "0.9")
    assert code == EXIT_OK
    r = rows[0]
    assert float(r["lhs"]) <= 1e-12 and float(r["omega"]) == 0.0 and float(r["rhs"]) == 0.0


def test_rate_e1_mu_ratio(capsys):
    code, rows = run(capsys, "rate", "--family", "durrmeyer", "--q", "0.9", "--f", "e1",
                     "--ys", "0.9", "--mu", "1-y")
    assert code == EXIT_OK
    r = rows[0]
    assert float(r["lhs"]) <= 1e-12
    assert float(r["mu"]) == pytest.approx(0.1)
    assert float(r["lhs_over_mu"]) <= 1e-11


def test_rate_mu_whitelist(capsys):
    base = ["rate", "--family", "q-mkz", "--f", "e2", "--ys", "0.5", "--grid", "5"]
    assert main(base + ["--mu", "__import__('os')"]) == EXIT_CONFIG
    assert main(base + ["--mu", "1-"]) == EXIT_CONFIG
    assert main(base + ["--mu", "sqrt(1-y)"]) == EXIT_OK


def test_rate_durrmeyer_needs_q(capsys):
    assert main(["rate", "--family", "durrmeyer", "--f", "e2"]) == EXIT_CONFIG


# ---- sequences ---------------------------------------------------------------

def test_sequences_prime(capsys):
    code, rows = run(capsys, "sequences", "--seq", "prime", "--n-max", "10")
    assert code == EXIT_OK and len(rows) == 11
    by_n = {int(r["n"]): r for r in rows}
    assert float(by_n[7]["q_n"]) == 0.0 and float(by_n[9]["q_n"]) == 1.0
    assert by_n[1]["durrmeyer_ratio"] == "" and by_n[2]["inv_bracket"] == ""
    assert float(by_n[9]["durrmeyer_ratio"]) == 0.25


# ---- configuration and output --------------------------------------------------

def test_unknown_command_and_flag(capsys):
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["moments", "--bogus", "1"]) == EXIT_CONFIG
    assert main(["sequences", "--seq", "fibonacci"]) == EXIT_CONFIG


def test_precedence_config_env_flag(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nn-max = 4\nseq = prime\n")
    code, rows = run(capsys, "sequences", "--config", str(cfg))
    assert code == EXIT_OK and len(rows) == 5 and float(rows[4]["q_n"]) == 1.0
    monkeypatch.setenv("MKZLAB_N_MAX", "6")
    code, rows = run(capsys, "sequences", "--config", str(cfg))
    assert len(rows) == 7 and float(rows[5]["q_n"]) == 0.0
    code, rows = run(capsys, "sequences", "--config", str(cfg), "--n-max", "2")
    assert len(rows) == 3


def test_unknown_config_key(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["sequences", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text("just words\n")
    assert main(["sequences", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["sequences", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    monkeypatch.setenv("MKZLAB_WIBBLE", "1")
    assert main(["sequences"]) == EXIT_CONFIG


def test_bad_value_in_env(capsys, monkeypatch):
    monkeypatch.setenv("MKZLAB_N_MAX", "many")
    assert main(["sequences"]) == EXIT_CONFIG


def test_json_rows_carry_schema(capsys):
    code, out = run(capsys, "abel", "--seq", "cube", "--ys", "0.9", "--check", "classical",
                    "--format", "json")
    assert code == EXIT_OK
    objs = [json.loads(line) for line in out.splitlines()]
    assert len(objs) == 2
    for o in objs:
        assert o["schema"] == SCHEMA and o["command"] == "abel"
        assert list(o)[2:] == COLUMNS["abel"]
    assert objs[1]["verdict"] == "fails"


def test_out_file_is_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["rate", "--family", "q-mkz", "--seq", "cube", "--f", "sinpi", "--ys", "0.5,0.8",
                     "--grid", "21", "--out", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text().splitlines()[0] == ",".join(COLUMNS["rate"])


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    env = {k: v for k, v in os.environ.items() if not k.startswith("MKZLAB_")}
    proc = subprocess.run([sys.executable, "-m", "mkzlab", "sequences", "--n-max", "3",
                           "--out", str(out)], env=env)
    assert proc.returncode == 0
    assert out.read_text().splitlines() == [
        "n,q_n,inv_bracket,durrmeyer_ratio", "0,0.0,,", "1,0.0,,", "2,1.0,,2.0", "3,1.0,0.5,1.0"]
    proc = subprocess.run([sys.executable, "-m", "mkzlab", "moments", "--n", "2"], env=env,
                          capture_output=True)
    assert proc.returncode == 2 and b"error" in proc.stderr
