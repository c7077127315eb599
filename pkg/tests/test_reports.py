"""Tests for hyposelect.reports: pure report building and best-effort writes."""

import json

import pytest

from hyposelect import reports
from hyposelect.distributions import Distribution
from hyposelect.reports import build_run_report, write_report
from hyposelect.selectors import SelectionTrace


@pytest.fixture
def clean_report_dir():
    from hyposelect.paths import REPORT_DIR

    def _wipe() -> None:
        if REPORT_DIR.exists():
            for entry in REPORT_DIR.iterdir():
                entry.unlink()

    _wipe()
    yield REPORT_DIR
    _wipe()


def test_build_report_without_trace():
    report = build_run_report(
        algorithm="yatracos", samples_drawn=10, exact_queries=0, output=None
    )
    assert report["algorithm"] == "yatracos"
    assert report["rounds"] == 0
    assert report["output"] is None
    assert report["errors"] == []
    assert "extra" not in report


def test_build_report_with_trace():
    trace = SelectionTrace(algorithm="refined", d_schedule=[0.9, 0.5])
    report = build_run_report(
        algorithm="refined",
        samples_drawn=0,
        exact_queries=12,
        output=Distribution([0.25, 0.75]),
        trace=trace,
        tv_out=0.1,
        opt=0.05,
        errors=["SolverError: x"],
        extra={"seed": 3},
    )
    assert report["output"] == [0.25, 0.75]
    assert report["d_schedule"] == [0.9, 0.5]
    assert report["slice_indices"] == []
    assert report["errors"] == ["SolverError: x"]
    assert report["extra"] == {"seed": 3}
    json.dumps(report)


def test_write_report_creates_latest_and_timestamped(clean_report_dir):
    report = build_run_report(algorithm="basic", samples_drawn=1, exact_queries=0, output=None)
    path = write_report(report)
    assert path is not None
    assert path.parent == clean_report_dir
    assert path.name.startswith("report_")
    latest = json.loads((clean_report_dir / "report.latest.json").read_text())
    assert latest["algorithm"] == "basic"


def test_write_report_prunes_old_copies(clean_report_dir, monkeypatch):
    monkeypatch.setattr(reports, "MAX_TIMESTAMPED_REPORTS", 2)
    report = build_run_report(algorithm="basic", samples_drawn=1, exact_queries=0, output=None)
    for _ in range(4):
        write_report(report)
    assert len(list(clean_report_dir.glob("report_*.json"))) <= 2


def test_write_report_failure_returns_none(tmp_path, monkeypatch):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    monkeypatch.setattr(reports, "REPORT_DIR", blocker / "reports")
    report = build_run_report(algorithm="basic", samples_drawn=1, exact_queries=0, output=None)
    assert write_report(report) is None
