"""Flatten experiment reports into rows and convert between JSON and CSV.

Floats are written with ``repr`` so a JSON -> CSV -> value round trip is
exact (and therefore good to far more than 12 significant digits).
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..errors import FormatError

REPORT_FILES = ("report.json", "table2.json", "eval.json")


def find_reports(directory) -> list[Path]:
    directory = Path(directory)
    found = [directory / name for name in REPORT_FILES if (directory / name).is_file()]
    if not found:
        found = sorted(directory.glob("**/report.json")) + sorted(directory.glob("**/table2.json"))
    if not found:
        raise FormatError(f"no report files under {directory}")
    return found


def load_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg})", offset=exc.pos) from exc


def report_rows(report: dict) -> list[dict]:
    """One flat row per seed (run reports) or per variant (comparison tables)."""
    if "rows" in report:
        return [dict(r) for r in report["rows"]]
    if "per_seed" in report:
        return [dict(r) for r in report["per_seed"]]
    return [{k: v for k, v in report.items() if not isinstance(v, (dict, list))}]


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else v


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields = []
    for row in rows:
        fields += [k for k in row if k not in fields]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _parse(cell: str):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    for conv in (int, float):
        try:
            return conv(cell)
        except ValueError:
            pass
    return cell


def csv_to_rows(text: str) -> list[dict]:
    return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def render(directory, fmt: str) -> str:
    reports = [load_report(p) for p in find_reports(directory)]
    if fmt == "json":
        return json.dumps(reports[0] if len(reports) == 1 else reports, indent=2, sort_keys=True)
    rows = [row for r in reports for row in report_rows(r)]
    return rows_to_csv(rows)
