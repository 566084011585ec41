"""Report serialization: JSON (atomic), CSV of sphere minima, console summary."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from importlib import resources

from .pipeline import Report


def load_schema() -> dict:
    return json.loads(resources.files("tangent_inf").joinpath("report_schema.json").read_text("utf-8"))


def validate_report(data: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report breaks the schema."""
    import jsonschema

    jsonschema.validate(data, load_schema())


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def psi_csv_text(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "psi", "agreement"])
    for row in report.data["psi_samples"]:
        w.writerow([repr(row["t"]), "" if row["psi"] is None else repr(row["psi"]), row["agreement"]])
    return buf.getvalue()


def summary(report: Report) -> str:
    d = report.data
    v = d["verdicts"]
    lines = [f"objective: {d['problem']['objective']}"]
    for g in d["problem"]["equalities"]:
        lines.append(f"  subject to {g} = 0")
    for h in d["problem"]["inequalities"]:
        lines.append(f"  subject to {h} >= 0")
    ov = v["optimal_value"]
    if "infinite" in ov:
        value = ov["infinite"]
    elif "exact" in ov:
        value = ov["exact"]
    elif "minpoly" in ov:
        value = f"{ov['approx']:.12g} (algebraic, minimal polynomial {ov['minpoly']})"
    else:
        value = f"~{ov['estimate']:.10g}"
    lines.append(f"optimal value:        {value} [{ov['status']}]")
    for key, name in (
        ("bounded_below", "bounded below"),
        ("attains_infimum", "infimum attained"),
        ("solution_set_compact", "compact solutions"),
        ("coercive", "coercive"),
    ):
        e = v[key]
        val = e["value"]
        if isinstance(val, bool):
            val = "yes" if val else "no"
        lines.append(f"{name + ':':<22}{val} [{e['status']}]")
    counted = [b for b in d["branches"] if b["counted"]]
    if d["branches"]:
        lines.append(f"branches: {len(counted)} counted of {len(d['branches'])}")
        for b in counted:
            lam = b["lambda"]
            lam_s = lam.get("infinite") or lam.get("exact") or f"{lam.get('approx'):.10g}"
            lines.append(f"  {b['active_set']:<8} {b['series']:<50} limit {lam_s}")
    crit = [c for c in d["critical_values"] if c["counted"]]
    if crit:
        vals = ", ".join(c["value"].get("exact") or f"{c['value']['approx']:.10g}" for c in crit)
        lines.append(f"critical values: {vals}")
    for c in d["caveats"]:
        lines.append(f"caveat: {c}")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, json_path: str | None = None, human: bool = True, psi_csv: str | None = None) -> str:
    """Write the JSON (and optional CSV) files; return the human summary."""
    if json_path:
        _atomic_write(json_path, dumps(report.data))
    if psi_csv:
        _atomic_write(psi_csv, psi_csv_text(report))
    return summary(report) if human else ""
