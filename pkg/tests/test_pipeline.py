import csv
import io
import json

import pytest

from hyperdescent import cli
from hyperdescent.pipeline import (
    JOBS_ENV,
    RunConfig,
    VerificationReport,
    effective_jobs,
    emit_report,
    load_config_file,
    points_from_certificate,
    render,
    run,
    sporadic_rows,
    verify_prime,
    verify_theorem,
    conjecture_scan,
)


def test_thm3_primes_and_verdicts():
    report = verify_theorem("thm3", 13, 200, height=300, timestamp=False)
    assert [r.p for r in report.rows] == [13, 29, 61, 109, 157, 173]
    assert 181 % 16 == 5
    assert all(r.verdict == "confirmed" and r.points == ["inf", "(0,0)"] for r in report.rows)
    row = report.to_dict()["rows"][0]
    assert row["certificates"]["selmer"]["selmer_dim"] == 2
    assert row["certificates"]["selmer"]["rank_bound"] == 0
    assert row["certificates"]["isogeny"]["ok"]
    assert report.exit_code == 0


def test_thm2_sporadic_at_three():
    report = verify_theorem("thm2", 3, 50, height=300, timestamp=False)
    assert [r.p for r in report.rows] == [3, 7, 11, 19, 23, 31, 43, 47]
    assert report.row(3).verdict == "sporadic-found"
    assert report.row(3).points == ["inf", "(0,0)", "(6,-216)", "(6,216)"]
    check = report.row(3).certificates["sporadic_checks"]
    assert all(c["exact"] for c in check) and check[0]["f(x)"] == str(6 * 72 * 108)
    assert all(r.verdict == "confirmed" for r in report.rows if r.p != 3)


def test_thm4_range():
    report = verify_theorem("thm4", 5, 100, height=200, timestamp=False)
    assert [r.p for r in report.rows] == [5, 37, 53]
    assert report.ok


def test_thm1_includes_two():
    report = verify_theorem("thm1", 2, 12, height=200, timestamp=False)
    assert [r.p for r in report.rows] == [2, 3, 5, 7, 11]
    assert report.ok


@pytest.mark.parametrize("ij,expected", [
    ((0, 1), {17: ["(8,-252)", "(8,252)"]}),
    ((2, 3), {3: ["(72,-45360)", "(72,45360)"], 7: ["(98,-115248)", "(98,115248)"]}),
    ((2, 1), {}),
])
def test_conjecture_examples(ij, expected):
    report = conjecture_scan(*ij, p_max=100, height=1000, timestamp=False)
    assert sporadic_rows(report) == expected
    assert report.ok


def test_csv_flags_sporadic_primes():
    report = conjecture_scan(2, 2, p_max=20, height=200, timestamp=False)
    rows = list(csv.DictReader(io.StringIO(render(report, "csv"))))
    flagged = sorted({int(r["p"]) for r in rows if r["obvious"] == "0"})
    assert flagged == [3, 5, 17]
    assert all(r["found"] == r["expected"] == "1" for r in rows)
    assert {r["verdict"] for r in rows if int(r["p"]) in (3, 5, 17)} == {"sporadic-found"}


def test_inconclusive_rows_fail_the_run():
    row = verify_prime("thm2", 5, 100)
    assert row.verdict == "inconclusive"
    assert VerificationReport({}, [row]).exit_code == 1
    # 5 is not 3 mod 4, so the theorem run itself skips it
    assert run(RunConfig("thm2", 5, 5, 100, timestamp=False)).rows == []


def test_bad_prime_is_isolated():
    row = verify_prime("thm3", 9, 50)
    assert row.verdict == "FAILED" and row.note


def test_empty_range_is_valid():
    report = verify_theorem("thm3", 14, 20, timestamp=False)
    assert report.rows == [] and report.ok
    assert json.loads(render(report, "json")) == {
        "meta": {"case": "thm3", "height": 1000, "range": [14, 20], "version": report.meta["version"]},
        "rows": [],
    }


def test_determinism_and_worker_independence():
    cfg = dict(case="thm2", p_min=3, p_max=30, height=150, timestamp=False)
    a = render(run(RunConfig(**cfg)), "json")
    b = render(run(RunConfig(**cfg)), "json")
    c = render(run(RunConfig(**cfg, jobs=3)), "json")
    assert a == b == c
    assert "seconds" not in a and "timestamp" not in a
    stamped = run(RunConfig(**{**cfg, "timestamp": True}))
    assert "timestamp" in stamped.meta and all(r.seconds >= 0 for r in stamped.rows)


@pytest.mark.parametrize("case,lo,hi", [("thm1", 2, 60), ("thm2", 3, 60), ("thm3", 13, 200), ("thm4", 5, 200)])
def test_rows_rederive_from_certificates(case, lo, hi):
    report = verify_theorem(case, lo, hi, height=50, timestamp=False)
    for row in json.loads(render(report, "json"))["rows"]:
        assert points_from_certificate(row) == row["points"]


def test_text_format_lists_every_prime():
    report = verify_theorem("thm2", 3, 20, height=100, timestamp=False)
    lines = render(report, "text").splitlines()
    assert len(lines) == 2 + len(report.rows)
    assert "sporadic-found" in lines[2] and "(6,216)" in lines[2]


def test_config_validation():
    for bad in (dict(case="thm9"), dict(case="thm1", p_min=5, p_max=3), dict(case="thm1", height=0),
                dict(case="thm1", jobs=0), dict(case="thm1", fmt="xml"), dict(case="conjecture")):
        with pytest.raises(ValueError):
            RunConfig(**bad)


def test_jobs_cap(monkeypatch):
    monkeypatch.setenv(JOBS_ENV, "2")
    assert effective_jobs(8) == 2 and effective_jobs(1) == 1
    monkeypatch.delenv(JOBS_ENV)
    assert effective_jobs(8) == 8


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# thm4 run\ncase = thm4\np-max = 40  # inclusive\n\nformat = csv\n")
    assert load_config_file(path) == {"case": "thm4", "p_max": "40", "format": "csv"}
    (tmp_path / "bad.cfg").write_text("case thm4\n")
    with pytest.raises(ValueError):
        load_config_file(tmp_path / "bad.cfg")


def test_emit_report_errors_name_the_path(tmp_path):
    report = verify_theorem("thm3", 14, 20, timestamp=False)
    target = tmp_path / "missing" / "r.json"
    with pytest.raises(OSError, match="missing"):
        emit_report(report, "json", target)
    out = tmp_path / "r.json"
    assert emit_report(report, "json", out) == out.read_text()


def test_cli_verify_and_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("case = thm4\np_max = 40\nheight = 100\n")
    out = tmp_path / "r.csv"
    assert cli.main(["verify", "--config", str(cfg), "--format", "csv", "--out", str(out), "--no-timestamp"]) == 0
    assert out.read_text().splitlines()[0] == "case,p,point,found,expected,obvious,verdict"
    assert cli.main(["verify", "--case", "thm2", "--p-min", "5", "--p-max", "5"]) == 0
    assert cli.main(["verify"]) == 2
    assert cli.main(["verify", "--case", "thm1", "--p-min", "9", "--p-max", "3"]) == 2
    capsys.readouterr()


def test_cli_scan_and_selmer(capsys):
    assert cli.main(["scan", "--i", "0", "--j", "1", "--p-max", "20", "--height", "100", "--no-timestamp"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["meta"]["case"] == "conjecture(0,1)"
    assert [r["p"] for r in report["rows"] if r["verdict"] == "sporadic-found"] == [17]
    assert cli.main(["selmer", "13", "1", "--audit"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["selmer_dim"] == 2 and payload["independence_audit"]["ok"]
