"""Atomic CSV / JSON writers for experiment results."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from weakgrad.core.stats import CSV_COLUMNS, ComparisonVerdict, EstimateReport
from weakgrad.experiment.config import ExperimentConfig, OutputFormat


def render_csv(config: ExperimentConfig, reports: Sequence[EstimateReport]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# config: {config.echo_json()}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerow(report.csv_row(omit_timing=config.omit_timing))
    return buffer.getvalue()


def render_json(
    config: ExperimentConfig,
    reports: Sequence[EstimateReport],
    comparisons: Sequence[ComparisonVerdict] = (),
) -> str:
    payload = {
        "config": config.echo(),
        "reports": [r.to_json_dict(omit_timing=config.omit_timing) for r in reports],
        "comparisons": [] if config.omit_timing else [c.model_dump(mode="json") for c in comparisons],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_results(
    config: ExperimentConfig,
    reports: Sequence[EstimateReport],
    comparisons: Sequence[ComparisonVerdict] = (),
) -> Optional[str]:
    """Render in the configured format; write to ``config.out`` or stdout."""
    if config.format is OutputFormat.JSON:
        text = render_json(config, reports, comparisons)
    else:
        text = render_csv(config, reports)
    if config.out is None:
        sys.stdout.write(text)
        return None
    write_atomic(Path(config.out), text)
    return str(config.out)
