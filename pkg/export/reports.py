# export/reports.py
# ------------------------------------------------------------
# Report tables and writers for the command-line front end.
#
# What this file provides
# -----------------------
# - build_certificate_table(certs)    → pandas.DataFrame, one row per certificate
# - build_bracket_table(rows)         → pandas.DataFrame of M_n^2 brackets
# - build_scan_table(rows)            → pandas.DataFrame of thresholds across n or alpha
# - build_stride_table(rows)          → pandas.DataFrame of the process k-sweep
# - build_sweep_table(sweeps)         → pandas.DataFrame of inequality grid sweeps
# - build_verdict_table(reports)      → pandas.DataFrame of every check
# - report_to_json / report_to_csv / report_to_xlsx_bytes, and write_report
#
# Formats
# -------
# JSON is the superset: command, inputs, outputs, tables, verdicts, seed,
# version, passed, warnings and (unless suppressed) timestamp. Keys are
# sorted and indented so identical runs give identical bytes.
# CSV is the first table of the report, fixed columns per command:
#   bound            certificates
#   bracket          brackets
#   certify          checks
#   scan             scan
#   process-bound    strides
#   inequality-grid  sweeps
# XLSX holds a "Summary" sheet plus one sheet per table.
#
# Dependencies: pandas, numpy, xlsxwriter (pandas uses it as engine)
#
from __future__ import annotations

import json
import math
import sys
from datetime import datetime, timezone
from io import BytesIO
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from core import __version__
from core.errors import DomainError
from core.models import (
    CommandReport,
    GridSweep,
    LowerBoundCertificate,
    OutputFormat,
    QuantileBracket,
    VerdictReport,
)

CERTIFICATE_COLUMNS = ["n", "alpha", "l_alpha", "sigma", "tau", "threshold", "guaranteed_tail", "source"]
BRACKET_COLUMNS = [
    "p",
    "gumbel_g",
    "msq_lower",
    "msq_upper",
    "m_lower",
    "m_upper",
    "regime_ok",
    "exponential_e",
    "dependent_msq_upper",
    "dependent_m_upper",
]
SCAN_COLUMNS = ["parameter", "value", "n", "alpha", "threshold", "guaranteed_tail", "error"]
STRIDE_COLUMNS = ["k", "subsampled_n", "sigma", "tau", "threshold", "guaranteed_tail", "gate_ok"]
SWEEP_COLUMNS = ["name", "start", "stop", "step", "points", "violations", "worst_margin", "worst_at", "ok"]
VERDICT_COLUMNS = ["report", "label", "bound", "estimate", "ci_low", "ci_high", "slack", "passed", "detail"]


# -----------------------------
# Table builders (pandas)
# -----------------------------
def build_certificate_table(certs: Iterable[LowerBoundCertificate]) -> pd.DataFrame:
    rows = [{col: getattr(c, col) for col in CERTIFICATE_COLUMNS} for c in certs]
    return pd.DataFrame(rows, columns=CERTIFICATE_COLUMNS)


def build_bracket_table(rows: Iterable[Tuple[float, QuantileBracket, QuantileBracket]]) -> pd.DataFrame:
    """
    One row per probability p: the independent (Gumbel) bracket and the
    dependent (exponential) upper bound at the same p.
    """
    out = []
    for p, ind, dep in rows:
        out.append({
            "p": p,
            "gumbel_g": ind.coupling_value,
            "msq_lower": ind.msq_lower,
            "msq_upper": ind.msq_upper,
            "m_lower": ind.m_lower,
            "m_upper": ind.m_upper,
            "regime_ok": ind.regime_ok,
            "exponential_e": dep.coupling_value,
            "dependent_msq_upper": dep.msq_upper,
            "dependent_m_upper": dep.m_upper,
        })
    return pd.DataFrame(out, columns=BRACKET_COLUMNS)


def build_scan_table(
    parameter: str,
    rows: Iterable[Tuple[float, Optional[LowerBoundCertificate], str]],
) -> pd.DataFrame:
    """Rows of (scanned value, certificate or None, gate message)."""
    out = []
    for value, cert, error in rows:
        out.append({
            "parameter": parameter,
            "value": value,
            "n": None if cert is None else cert.n,
            "alpha": None if cert is None else cert.alpha,
            "threshold": None if cert is None else cert.threshold,
            "guaranteed_tail": None if cert is None else cert.guaranteed_tail,
            "error": error,
        })
    return pd.DataFrame(out, columns=SCAN_COLUMNS)


def build_stride_table(rows: Iterable[Tuple[int, int, Optional[LowerBoundCertificate]]]) -> pd.DataFrame:
    """Rows of (k, floor(n/k), certificate or None)."""
    out = []
    for k, count, cert in rows:
        out.append({
            "k": k,
            "subsampled_n": count,
            "sigma": None if cert is None else cert.sigma,
            "tau": None if cert is None else cert.tau,
            "threshold": None if cert is None else cert.threshold,
            "guaranteed_tail": None if cert is None else cert.guaranteed_tail,
            "gate_ok": cert is not None,
        })
    return pd.DataFrame(out, columns=STRIDE_COLUMNS)


def build_sweep_table(sweeps: Iterable[GridSweep]) -> pd.DataFrame:
    rows = [{**{col: getattr(s, col) for col in SWEEP_COLUMNS if col != "ok"}, "ok": s.ok} for s in sweeps]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def build_verdict_table(reports: Iterable[VerdictReport]) -> pd.DataFrame:
    rows = []
    for rep in reports:
        for chk in rep.checks:
            rows.append({
                "report": rep.name,
                "label": chk.label,
                "bound": chk.bound,
                "estimate": chk.estimate,
                "ci_low": chk.ci_low,
                "ci_high": chk.ci_high,
                "slack": chk.slack,
                "passed": chk.passed,
                "detail": chk.detail,
            })
    return pd.DataFrame(rows, columns=VERDICT_COLUMNS)


# -----------------------------
# JSON
# -----------------------------
def _plain(value: Any) -> Any:
    """numpy / enum / NaN values → JSON-safe Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return None if math.isnan(f) or math.isinf(f) else f
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _table_records(df: pd.DataFrame) -> List[Dict[str, Any]]:
    return [_plain(rec) for rec in df.astype(object).where(df.notna(), None).to_dict(orient="records")]


def report_document(report: CommandReport, *, timestamp: Optional[str] = None) -> Dict[str, Any]:
    """The JSON-ready dictionary of a report."""
    doc: Dict[str, Any] = {
        "command": report.command.value,
        "inputs": _plain(report.inputs),
        "outputs": _plain(report.outputs),
        "tables": {name: _table_records(df) for name, df in report.tables.items()},
        "verdicts": [
            {
                "name": v.name,
                "passed": v.passed,
                "summary": v.summary(),
                "details": _plain(v.details),
                "checks": _table_records(build_verdict_table([v]).drop(columns=["report"])),
            }
            for v in report.verdicts
        ],
        "seed": report.seed,
        "version": __version__,
        "passed": report.passed,
        "warnings": list(report.warnings),
    }
    if timestamp is not None:
        doc["timestamp"] = timestamp
    return doc


def report_to_json(report: CommandReport, *, timestamp: Optional[str] = None) -> str:
    return json.dumps(report_document(report, timestamp=timestamp), sort_keys=True, indent=2) + "\n"


# -----------------------------
# CSV
# -----------------------------
def report_to_csv(report: CommandReport) -> str:
    """The command's primary table (see module header) as CSV."""
    if not report.tables:
        raise DomainError(f"command '{report.command.value}' produced no table for CSV export.")
    first = next(iter(report.tables.values()))
    return first.to_csv(index=False, lineterminator="\n")


# -----------------------------
# Excel writer
# -----------------------------
def report_to_xlsx_bytes(report: CommandReport, *, timestamp: Optional[str] = None) -> bytes:
    """
    In-memory .xlsx workbook: "Summary" sheet (command, inputs, outputs,
    verdicts) then one sheet per table.

    Returns
    -------
    bytes
        The content of the .xlsx file.
    """
    bio = BytesIO()
    with pd.ExcelWriter(bio, engine="xlsxwriter") as writer:
        _write_summary_sheet(writer, report, timestamp)
        for name, df in report.tables.items():
            sheet = name[:31]
            df.to_excel(writer, sheet_name=sheet, index=False)
            _autofit_columns(writer, sheet, df)
    return bio.getvalue()


def _write_summary_sheet(writer: pd.ExcelWriter, report: CommandReport, timestamp: Optional[str]) -> None:
    ws = writer.book.add_worksheet("Summary")
    writer.sheets["Summary"] = ws

    h1 = writer.book.add_format({"bold": True, "font_size": 14})
    h2 = writer.book.add_format({"bold": True, "font_size": 12})
    lab = writer.book.add_format({"bold": True})
    okf = writer.book.add_format({"bold": True, "font_color": "#007700"})
    nof = writer.book.add_format({"bold": True, "font_color": "#AA0000"})

    ws.write(0, 0, f"Gaussian maximum bounds: {report.command.value}", h1)
    ws.write(2, 0, "Overall status:", lab)
    ws.write(2, 1, "PASS" if report.passed else "FAIL", okf if report.passed else nof)
    ws.write(3, 0, "Version:", lab)
    ws.write(3, 1, __version__)
    row = 4
    if report.seed is not None:
        ws.write(row, 0, "Seed:", lab)
        ws.write_number(row, 1, report.seed)
        row += 1
    if timestamp is not None:
        ws.write(row, 0, "Timestamp:", lab)
        ws.write(row, 1, timestamp)
        row += 1

    for title, values in (("Inputs", report.inputs), ("Outputs", report.outputs)):
        row += 1
        ws.write(row, 0, title, h2)
        row += 1
        for key, val in _plain(values).items():
            ws.write(row, 0, key)
            if isinstance(val, (int, float)) and not isinstance(val, bool):
                ws.write_number(row, 1, float(val))
            else:
                ws.write(row, 1, "" if val is None else str(val))
            row += 1

    if report.verdicts:
        row += 1
        ws.write(row, 0, "Verdicts", h2)
        row += 1
        for v in report.verdicts:
            ws.write(row, 0, v.name)
            ws.write(row, 1, "PASS" if v.passed else "FAIL", okf if v.passed else nof)
            ws.write(row, 2, v.summary())
            row += 1

    ws.set_column(0, 0, 34)
    ws.set_column(1, 1, 22)
    ws.set_column(2, 2, 70)


def _autofit_columns(writer: pd.ExcelWriter, sheet_name: str, df: pd.DataFrame) -> None:
    """Column widths from header and cell text lengths."""
    ws = writer.sheets.get(sheet_name)
    if ws is None:
        return
    for j, col in enumerate(df.columns):
        longest = max([len(str(col))] + [len(str(v)) for v in df[col].tolist()])
        ws.set_column(j, j, min(60, longest + 2))


# -----------------------------
# Dispatch
# -----------------------------
def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_report(
    report: CommandReport,
    fmt: OutputFormat,
    out_path: Optional[str] = None,
    *,
    timestamp: Optional[str] = None,
) -> None:
    """
    Write the report in the requested format to out_path, or to stdout for
    the text formats.

    Raises
    ------
    DomainError
        XLSX requested without an output path.
    """
    if fmt == OutputFormat.XLSX:
        if out_path is None:
            raise DomainError("--format xlsx needs --out.")
        Path(out_path).write_bytes(report_to_xlsx_bytes(report, timestamp=timestamp))
        return
    text = report_to_json(report, timestamp=timestamp) if fmt == OutputFormat.JSON else report_to_csv(report)
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text)


__all__ = [
    "build_certificate_table",
    "build_bracket_table",
    "build_scan_table",
    "build_stride_table",
    "build_sweep_table",
    "build_verdict_table",
    "report_document",
    "report_to_json",
    "report_to_csv",
    "report_to_xlsx_bytes",
    "utc_timestamp",
    "write_report",
]
