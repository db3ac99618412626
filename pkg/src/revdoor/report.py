"""Report serialisation: one JSON document plus flat CSV tables.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so JSON and CSV carry identical numbers.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable

from revdoor.pipeline import SWEEP_COLUMNS, RunReport


def flatten(d: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """``{"a": {"b": 1}}`` -> ``{"a.b": 1}``; insertion order is kept."""
    out: dict[str, Any] = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: list[str], rows: Iterable[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def json_text(rr: RunReport) -> str:
    return json.dumps(rr.to_dict(), indent=2) + "\n"


def regimes_csv_text(rr: RunReport) -> str:
    flat = {name: flatten(section) for name, section in rr.regimes.items()}
    header = list(flat["no_signal"])
    return _csv_text(["regime", *header], ([name, *(f[k] for k in header)] for name, f in flat.items()))


def sweep_csv_text(rr: RunReport) -> str:
    if not rr.sweep:
        raise ValueError("report has no sweep rows")
    param = next(iter(rr.sweep[0]))
    header = [param, *SWEEP_COLUMNS]
    return _csv_text(header, ([row[k] for k in header] for row in rr.sweep))


def emit_report(rr: RunReport, fmt: str, out_dir: str | Path, prefix: str = "report") -> list[Path]:
    """Write the report as ``json``, ``csv`` or ``both``; returns the files written.

    Output is byte-stable for a fixed scenario and seed. Run timing is not
    part of any file.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    files: list[tuple[str, str]] = []
    if fmt in ("json", "both"):
        files.append((f"{prefix}.json", json_text(rr)))
    if fmt in ("csv", "both"):
        files.append((f"{prefix}_regimes.csv", regimes_csv_text(rr)))
        files.append((f"{prefix}_sweep.csv", sweep_csv_text(rr)))
    for name, text in files:
        path = out / name
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
