import csv
import io
import json
import math

import numpy as np
import pytest

from fracpoisson import cli, pmf


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_pmf_sfpp_alpha_one_is_poisson(capsys):
    code, out, _ = run(capsys, "pmf", "--family", "sfpp", "--alpha", "1", "--lambda", "1",
                       "--kmax", "3", "--t", "1")
    assert code == 0
    got = [float(r["p"]) for r in rows(out)]
    np.testing.assert_allclose(got, [math.exp(-1) / math.factorial(k) for k in range(4)],
                               rtol=1e-13)


def test_pmf_gegenbauer_collapse(capsys):
    _, a, _ = run(capsys, "pmf", "--family", "gegenbauer", "--u", "1", "--d", "0.35",
                  "--kmax", "8", "--t", "1")
    _, b, _ = run(capsys, "pmf", "--family", "sfpp", "--alpha", "0.7", "--kmax", "8", "--t", "1")
    pa = [float(r["p"]) for r in rows(a)]
    pb = [float(r["p"]) for r in rows(b)]
    np.testing.assert_allclose(pa, pb, rtol=1e-13)


def test_pmf_layout_and_round_trip(capsys, tmp_path):
    out_path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "pmf", "--family", "tsfpp", "--alpha", "0.7", "--beta", "0.9",
                     "--kmax", "10", "--t", "0.5,1,2", "--out", str(out_path))
    assert code == 0
    text = out_path.read_text()
    assert text.splitlines()[0] == "k,t,p,terms_used"
    table = rows(text)
    assert len(table) == 33
    assert [(int(r["k"]), float(r["t"])) for r in table[:12]] == \
        [(k, 0.5) for k in range(11)] + [(0, 1.0)]
    expected = pmf.pmf_table(pmf.ProcessParams(1.0, 0.7, 0.9), 10, [0.5, 1, 2]).values
    got = np.array([float(r["p"]) for r in table]).reshape(3, 11).T
    np.testing.assert_array_equal(got, expected)


def test_pmf_json_mirrors_csv(capsys):
    args = ["pmf", "--family", "tempered-sfpp", "--alpha", "0.6", "--mu", "0.5", "--kmax", "4",
            "--t", "1,2"]
    _, c, _ = run(capsys, *args)
    _, j, _ = run(capsys, *args, "--format", "json")
    doc = json.loads(j)
    assert doc["columns"] == ["k", "t", "p", "terms_used"]
    assert [[str(r[c_]) for c_ in doc["columns"]] for r in doc["rows"]] == \
        [[r[c_] for c_ in doc["columns"]] for r in rows(c)]


def test_pmf_is_pure_function_of_flags(capsys):
    args = ["pmf", "--family", "composite", "--alpha", "0.3", "--alpha2", "0.9", "--t", "1"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


@pytest.mark.parametrize("argv,needle", [
    (["--family", "sfpp", "--beta", "0.5"], "--beta"),
    (["--family", "sfpp", "--alpha", "1.5"], "alpha"),
    (["--family", "gegenbauer", "--d", "0.2"], "--u"),
    (["--family", "gegenbauer", "--d", "0.7", "--u", "0"], "d must"),
    (["--family", "poisson", "--lambda", "-1"], "lambda"),
])
def test_pmf_invalid_combinations(capsys, argv, needle):
    code, out, err = run(capsys, "pmf", *argv, "--t", "1")
    assert code == 2 and out == ""
    assert needle in err and len(err.strip().splitlines()) == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["pmf", "--family", "nope", "--t", "1"])
    assert exc.value.code == 2


def test_simulate_poisson(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "simulate", "--family", "poisson", "--lambda", "2", "--t", "1",
                     "--n", "100000", "--seed", "7", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ") and "seed=7" in lines[0] and "grid_dt=" in lines[0]
    assert lines[1] == "count"
    counts = np.array([int(x) for x in lines[2:]])
    assert counts.size == 100000
    assert abs(counts.mean() - 2) < 4 * math.sqrt(2 / counts.size)


def test_simulate_tempered_mean_and_determinism(capsys, tmp_path):
    args = ["simulate", "--family", "tempered-sfpp", "--alpha", "0.6", "--mu", "1.5",
            "--lambda", "2", "--t", "3", "--n", "20000", "--seed", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    counts = np.array([int(x) for x in a.read_text().splitlines()[2:]])
    target = 2 * 0.6 * 1.5 ** -0.4 * 3
    assert abs(counts.mean() - target) < 4 * counts.std() / math.sqrt(counts.size)


def test_simulate_empirical_pmf(capsys):
    code, out, _ = run(capsys, "simulate", "--family", "tfpp", "--beta", "0.5", "--t", "1",
                       "--n", "1000", "--empirical-pmf", "--kmax", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "k,p" and len(lines) == 8


def test_simulate_rejects_non_process(capsys):
    code, _, err = run(capsys, "simulate", "--family", "gegenbauer", "--d", "0.25", "--u", "0",
                       "--t", "1")
    assert code == 2 and "cannot be simulated" in err


def test_simulate_stall_exit_code(capsys, monkeypatch):
    from fracpoisson import simulate
    monkeypatch.setattr(simulate, "INCREMENT_CAP", 10)
    code, _, err = run(capsys, "simulate", "--family", "tempered-tsfpp", "--alpha", "0.5",
                       "--beta", "0.5", "--nu", "1", "--t", "1", "--n", "10")
    assert code == 3 and "stalled" in err


def test_ml(capsys):
    assert run(capsys, "ml", "--a", "1", "--b", "1", "--z", "1")[1].strip() == "2.718281828459045"
    out = run(capsys, "ml", "--a", "0.5", "--b", "1.5", "--c", "2", "--z", "0.25")[1]
    assert float(out) == pytest.approx(1.8077003521478736, rel=1e-13)


def test_check_reductions(capsys, tmp_path):
    path = tmp_path / "r.jsonl"
    code, _, _ = run(capsys, "check", "--suite", "reductions", "--out", str(path))
    assert code == 0
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert lines[0]["type"] == "header"
    assert all(r["status"] == "pass" for r in lines[1:])


def test_check_failure_exit_code(capsys, monkeypatch):
    from fracpoisson import harness
    check = harness.Check("specfun.ml_exp", "identities",
                          lambda ctx: harness.Outcome(1.0, 0.0, "forced"))
    monkeypatch.setitem(harness._BY_ID, "specfun.ml_exp", check)
    code, out, err = run(capsys, "check", "--suite", "identities")
    assert code == 1 and "specfun.ml_exp" in err


def test_info(capsys):
    code, out, _ = run(capsys, "info")
    assert code == 0
    for family in pmf.FAMILIES:
        assert family in out
