import json
import math

import pytest

from fracpoisson import harness
from fracpoisson.errors import InvalidParameter
from fracpoisson.harness import CheckReport
from fracpoisson.simulate import RngSpec


def test_report_status_follows_comparison():
    assert CheckReport.evaluate("a", 0.5, 1.0).passed
    assert not CheckReport.evaluate("a", 1.5, 1.0).passed
    assert CheckReport.evaluate("p", 0.5, 0.01, comparison=">=").passed
    assert not CheckReport.evaluate("p", 0.001, 0.01, comparison=">=").passed
    bad = CheckReport.evaluate("a", math.nan, 1.0)
    assert bad.metric is None and not bad.passed
    with pytest.raises(InvalidParameter):
        CheckReport.evaluate("a", 0.0, 1.0, comparison="<")


def test_report_json_key_order():
    r = CheckReport.evaluate("x", 0.25, 1.0, "d", RngSpec(42, 3))
    record = json.loads(r.to_json())
    assert list(record) == ["check_id", "status", "metric", "comparison", "threshold", "details",
                            "seed"]
    assert record["seed"] == {"seed": 42, "stream": 3}


def test_check_ids_unique_and_suites_known():
    ids = [c.check_id for c in harness.CHECKS]
    assert len(ids) == len(set(ids))
    assert {c.suite for c in harness.CHECKS} == set(harness.SUITES)


def test_invariant_coverage_is_complete_and_exclusive():
    by_id = {c.check_id: c for c in harness.CHECKS}
    names = [inv for inv, _, _ in harness.INVARIANTS]
    assert len(names) == len(set(names))
    for inv, suite, checks in harness.INVARIANTS:
        assert checks, inv
        for cid in checks:
            assert by_id[cid].suite == suite, (inv, cid)


def test_stochastic_checks_have_streams():
    for c in harness.CHECKS:
        if c.suite in ("montecarlo", "moments"):
            assert c.stream is not None, c.check_id


def test_unknown_suite():
    with pytest.raises(InvalidParameter):
        harness.run_suite("everything")


def test_identities_suite_passes():
    reports = harness.run_suite("identities")
    assert [r.check_id for r in reports] == sorted(r.check_id for r in reports)
    assert harness.all_passed(reports), [r for r in reports if not r.passed]


def test_reductions_suite_passes():
    assert harness.all_passed(harness.run_suite("reductions"))


def test_errors_become_failed_reports(monkeypatch):
    check = harness.Check("specfun.ml_exp", "identities", lambda ctx: 1 / 0)
    monkeypatch.setitem(harness._BY_ID, "specfun.ml_exp", check)
    (report,) = harness.run_suite("identities", checks=["specfun.ml_exp"])
    assert report.status == "fail" and report.metric is None
    assert "ZeroDivisionError" in report.details


def test_seeded_checks_are_reproducible():
    ids = ["simulate.moments.poisson_mean", "simulate.moments.inverse_stable_mean"]
    a = harness.run_suite("moments", 42, checks=ids)
    b = harness.run_suite("moments", 42, checks=ids)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    c = harness.run_suite("moments", 43, checks=ids)
    assert [r.metric for r in a] != [r.metric for r in c]


def test_header_lists_coverage():
    lines = harness.report_lines("identities", 0, [])
    header = json.loads(lines[0])
    assert header["type"] == "header" and header["seed"] == 0
    assert len(header["coverage"]) == len(harness.INVARIANTS)


def test_write_report_is_atomic(tmp_path):
    path = tmp_path / "r.jsonl"
    reports = [CheckReport.evaluate("b", 0.0, 1.0), CheckReport.evaluate("a", 0.0, 1.0)]
    harness.write_report(str(path), "identities", 0, reports)
    lines = path.read_text().splitlines()
    assert [json.loads(x)["check_id"] for x in lines[1:]] == ["a", "b"]
    assert [p.name for p in tmp_path.iterdir()] == ["r.jsonl"]
