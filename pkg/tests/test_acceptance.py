"""Acceptance suite: one test per criterion, each printing a single status line.

The whole harness is run twice through the command line with seed 42; the
first report feeds criteria 1-9 and the pair feeds the determinism check.
"""
import json
import subprocess
import sys

import pytest

pytestmark = pytest.mark.slow


def _run_all(path):
    cmd = [sys.executable, "-m", "fracpoisson", "check", "--suite", "all", "--seed", "42",
           "--out", str(path)]
    return subprocess.run(cmd, capture_output=True, text=True)


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    first, second = base / "run1.jsonl", base / "run2.jsonl"
    _run_all(first)
    _run_all(second)
    records = {}
    for line in first.read_text().splitlines()[1:]:
        rec = json.loads(line)
        records[rec["check_id"]] = rec
    return records, first.read_bytes(), second.read_bytes()


def _verdict(capsys, number, title, records, ids):
    missing = [i for i in ids if i not in records]
    failed = [i for i in ids if i in records and records[i]["status"] != "pass"]
    ok = not missing and not failed
    worst = ", ".join(f"{i}={records[i]['metric']}" for i in failed) or "-"
    line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} "
            f"({len(ids)} checks; failing: {worst}; missing: {missing or '-'})")
    with capsys.disabled():
        print("\n" + line)
    return ok, line


def _prefixed(records, prefix):
    return sorted(i for i in records if i.startswith(prefix))


def test_criterion_01_reduction_lattice(reports, capsys):
    records = reports[0]
    ids = _prefixed(records, "pmf.reduction.")
    assert len(ids) >= 7
    ok, line = _verdict(capsys, 1, "reduction lattice", records, ids)
    assert ok, line


def test_criterion_02_oracle_agreement(reports, capsys):
    records = reports[0]
    ids = [f"ztrans.oracle.{f}" for f in
           ("sfpp", "tsfpp", "tempered_sfpp", "gegenbauer", "gegenbauer_ts", "composite")]
    ok, line = _verdict(capsys, 2, "series against coefficient extraction", records, ids)
    assert ok, line


def test_criterion_03_normalization(reports, capsys):
    records = reports[0]
    ids = _prefixed(records, "pmf.normalization.") + ["pmf.gegenbauer_mass"]
    ok, line = _verdict(capsys, 3, "normalization and Gegenbauer total mass", records, ids)
    assert ok, line


def test_criterion_04_binomial_identity(reports, capsys):
    records = reports[0]
    ok, line = _verdict(capsys, 4, "generalized binomial identity", records,
                          ["specfun.binomial_identity"])
    assert ok, line


def test_criterion_05_monte_carlo_tv(reports, capsys):
    records = reports[0]
    ids = ["simulate.tv.tsfpp", "simulate.tv.tempered_sfpp", "simulate.tv.tfpp_renewal"]
    ok, line = _verdict(capsys, 5, "Monte Carlo total variation", records, ids)
    assert ok, line


def test_criterion_06_tempered_moments(reports, capsys):
    records = reports[0]
    ids = ["simulate.moments.tempered_count_mean", "simulate.moments.tempered_count_var"]
    ok, line = _verdict(capsys, 6, "tempered count moments", records, ids)
    assert ok, line


def test_criterion_07_governing_residuals(reports, capsys):
    records = reports[0]
    ids = [f"fracderiv.residual.{f}" for f in
           ("sfpp", "tsfpp", "tempered_sfpp", "tempered_tsfpp", "gegenbauer")]
    ok, line = _verdict(capsys, 7, "governing-equation residuals", records, ids)
    assert ok, line


def test_criterion_08_special_functions(reports, capsys):
    records = reports[0]
    ids = ["specfun.ml_exp", "specfun.ml_cos", "specfun.prabhakar_laplace",
           "specfun.prabhakar_c1"]
    ok, line = _verdict(capsys, 8, "Mittag-Leffler and Prabhakar checks", records, ids)
    assert ok, line


def test_criterion_09_inverse_subordinator_laplace(reports, capsys):
    records = reports[0]
    ok, line = _verdict(capsys, 9, "inverse stable Laplace identity", records,
                          ["simulate.inverse.laplace"])
    assert ok, line


def test_criterion_10_determinism(reports, capsys):
    _, first, second = reports
    ok = len(first) > 0 and first == second
    line = (f"criterion 10 {'PASS' if ok else 'FAIL'}: byte-identical reports for "
            f"two seed-42 runs ({len(first)} and {len(second)} bytes)")
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
