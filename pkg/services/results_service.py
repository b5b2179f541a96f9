"""
Results Service
---------------
Writes and reads sweep results as CSV or JSON.

Every CSV row repeats the run metadata (name, config hash, seed) so a
single file is self-describing; columns are fixed and floats are written
in their shortest round-trip form.

Usage:
    path   = ResultsService("results").emit_results(result, "csv")
    result = ResultsService.parse_results(path)
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

import allure
from slugify import slugify

from services.experiment_service import PointResult, RunResult

logger = logging.getLogger(__name__)

FORMATS        = ("csv", "json")
RESULT_VERSION = 1
COLUMNS        = (
    "name", "config_hash", "seed", "gadget", "noise", "parameter", "value", "state",
    "shots", "failures", "discards", "p_L", "ci_low", "ci_high", "wall_time_s", "branch_counts",
)
NUMERIC_COLUMNS = ("value", "shots", "failures", "discards", "p_L", "ci_low", "ci_high")


def result_filename(result: RunResult, fmt: str) -> str:
    return f"{slugify(f'{result.name} {result.noise} {result.config_hash}')}.{fmt}"


def _row(result: RunResult, point: PointResult) -> dict:
    low, high = point.interval
    return {
        "name":          result.name,
        "config_hash":   result.config_hash,
        "seed":          result.seed,
        "gadget":        result.gadget,
        "noise":         result.noise,
        "parameter":     result.parameter,
        "value":         repr(float(point.value)),
        "state":         point.state,
        "shots":         point.shots,
        "failures":      point.failures,
        "discards":      point.discards,
        "p_L":           repr(point.p_l),
        "ci_low":        repr(low),
        "ci_high":       repr(high),
        "wall_time_s":   repr(float(point.wall_time)),
        "branch_counts": json.dumps(point.branch_counts, sort_keys=True, separators=(",", ":")),
    }


def _point(row: dict) -> PointResult:
    return PointResult(
        value         = float(row["value"]),
        state         = str(row["state"]),
        shots         = int(row["shots"]),
        failures      = int(row["failures"]),
        discards      = int(row["discards"]),
        wall_time     = float(row["wall_time_s"]),
        branch_counts = {str(k): int(v) for k, v in json.loads(row["branch_counts"]).items()},
    )


def render_csv(result: RunResult) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for point in result.points:
        writer.writerow(_row(result, point))
    return buffer.getvalue()


def render_json(result: RunResult) -> str:
    document = {
        "version":     RESULT_VERSION,
        "name":        result.name,
        "config_hash": result.config_hash,
        "seed":        result.seed,
        "gadget":      result.gadget,
        "noise":       result.noise,
        "parameter":   result.parameter,
        "points":      [{k: v for k, v in _row(result, p).items() if k in COLUMNS[6:]} for p in result.points],
    }
    return json.dumps(document, indent=2) + "\n"


class ResultsService:
    """
    Result files under one output directory.

    Usage:
        results = ResultsService(config.output)
        path    = results.emit_results(run, config.format)
    """

    def __init__(self, output: str | Path = "results"):
        self.output = Path(output)

    # ──────────────────────────────────────────────────────────────────────
    # PUBLIC ACTIONS
    # ──────────────────────────────────────────────────────────────────────

    @allure.step("RESULTS SERVICE: Emit results as {fmt}")
    def emit_results(self, result: RunResult, fmt: str = "csv", path: str | Path | None = None) -> Path:
        """
        Write ``result`` (I/O errors propagate).

        Args:
            result: the sweep to write
            fmt:    'csv' or 'json'
            path:   explicit file; default ``<output>/<slug of name, noise, hash>.<fmt>``

        Returns:
            Path: the written file
        """
        if fmt not in FORMATS:
            raise ValueError(f"❌ Unknown result format '{fmt}'. Must be one of: {', '.join(FORMATS)}")
        path = Path(path) if path is not None else self.output / result_filename(result, fmt)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = render_csv(result) if fmt == "csv" else render_json(result)
        path.write_text(text, encoding="utf-8", newline="")
        logger.info(f"💾 ResultsService.emit_results() → {path} ({len(result.points)} row(s))")
        return path

    @staticmethod
    @allure.step("RESULTS SERVICE: Parse results")
    def parse_results(path: str | Path) -> RunResult:
        """Read a file written by ``emit_results`` (format from the suffix)."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"❌ Result file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            data = json.loads(text)
            if data.get("version") != RESULT_VERSION:
                raise ValueError(f"❌ Unsupported result file version {data.get('version')} in {path}")
            points = tuple(_point(row) for row in data["points"])
            meta   = data
        else:
            rows   = list(csv.DictReader(io.StringIO(text)))
            points = tuple(_point(row) for row in rows)
            meta   = rows[0] if rows else {}
        result = RunResult(
            name        = str(meta.get("name", "")),
            gadget      = str(meta.get("gadget", "")),
            noise       = str(meta.get("noise", "")),
            parameter   = str(meta.get("parameter", "")),
            config_hash = str(meta.get("config_hash", "")),
            seed        = int(meta.get("seed", 0)),
            points      = points,
        )
        logger.info(f"📂 ResultsService.parse_results() → {path} ({len(points)} row(s))")
        return result
