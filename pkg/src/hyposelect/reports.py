"""Per-run selection reports, one small JSON blob per ``hyposelect select``.

Each run drops two files in ``$XDG_DATA_HOME/hyposelect/reports/``:

  * ``report.latest.json``: overwritten each run
  * ``report_YYYYMMDD_HHMMSS_ffffff.json``: kept for comparing runs

The schema is a plain dict so a new field is one line at the call site and
``jq`` sees whatever was there at write time.
"""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path
from typing import Any

from .distributions import Distribution
from .logging_config import get_logger
from .paths import REPORT_DIR
from .selectors import SelectionTrace

logger = get_logger(__name__)

# Retention cap for timestamped reports.
MAX_TIMESTAMPED_REPORTS = 200


def build_run_report(
    *,
    algorithm: str,
    samples_drawn: int,
    exact_queries: int,
    output: Distribution | None,
    trace: SelectionTrace | None = None,
    tv_out: float | None = None,
    opt: float | None = None,
    errors: list[str] | None = None,
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Assemble a run report. Pure, no I/O."""
    report: dict[str, Any] = {
        "timestamp": datetime.now().isoformat(timespec="seconds"),
        "algorithm": algorithm,
        "samples_drawn": samples_drawn,
        "exact_queries": exact_queries,
        "rounds": trace.rounds if trace else 0,
        "d_schedule": [round(d, 9) for d in trace.d_schedule] if trace else [],
        "slice_indices": trace.slice_indices if trace else [],
        "restarts": trace.restarts if trace else 0,
        "audit_restarts": trace.audit_restarts if trace else 0,
        "output": output.probs.tolist() if output is not None else None,
        "tv_out": tv_out,
        "opt": opt,
        "errors": list(errors) if errors else [],
    }
    if extra:
        report["extra"] = extra
    return report


def write_report(report: dict[str, Any]) -> Path | None:
    """Write ``report.latest.json`` and a timestamped copy.

    Returns the timestamped path, or ``None`` if writing failed; a report
    failure never fails the run.
    """
    try:
        REPORT_DIR.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.warning(f"Could not create report dir: {e}")
        return None

    stamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
    timestamped = REPORT_DIR / f"report_{stamp}.json"
    latest = REPORT_DIR / "report.latest.json"

    payload = json.dumps(report, indent=2, sort_keys=True)
    try:
        timestamped.write_text(payload, encoding="utf-8")
        latest.write_text(payload, encoding="utf-8")
    except OSError as e:
        logger.warning(f"Could not write report: {e}")
        return None

    _prune_old_reports()
    return timestamped


def _prune_old_reports() -> None:
    """Delete the oldest timestamped reports beyond the retention cap."""
    try:
        reports = sorted(REPORT_DIR.glob("report_*.json"))
        excess = len(reports) - MAX_TIMESTAMPED_REPORTS
        for stale in reports[:excess] if excess > 0 else []:
            stale.unlink(missing_ok=True)
    except OSError as e:
        logger.debug(f"Report pruning skipped: {e}")
