"""Run reports and plot-ready data files.

Every command produces a Report, written as report.json in the output
directory. Data files use fixed CSV schemas:

    weight        xi,w
    lambda        lambda,re,im
    matrix        i,j,re,im
    kernel        xi,eta,re,im   (plus a JSON sidecar with the grid metadata)

Numbers are written with repr() so identical runs give identical bytes.
"""

import csv
import os
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import jsonschema
import numpy as np

from twistframe import json, twistframe_logging
from twistframe.common.exception import ReportError

if sys.version_info >= (3, 8):
    from typing import TypedDict
else:
    from typing_extensions import TypedDict

logger = twistframe_logging.init_logging("report")

FORMATS = ("json", "csv")
REPORT_FILE = "report.json"

WEIGHT_COLUMNS = ("xi", "w")
LAMBDA_COLUMNS = ("lambda", "re", "im")
MATRIX_COLUMNS = ("i", "j", "re", "im")
KERNEL_COLUMNS = ("xi", "eta", "re", "im")


class Result(TypedDict):
    name: str
    value: Any
    tol: Optional[float]
    provenance: str


class VerdictEntry(TypedDict):
    name: str
    status: str


class Report(TypedDict):
    command: str
    config: Dict[str, Any]
    results: List[Result]
    verdicts: List[VerdictEntry]
    files: List[str]
    seconds: Optional[float]


REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["command", "config", "results", "verdicts", "files", "seconds"],
    "additionalProperties": False,
    "properties": {
        "command": {"type": "string", "minLength": 1},
        "config": {"type": "object"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value", "tol", "provenance"],
                "properties": {
                    "name": {"type": "string"},
                    "tol": {"type": ["number", "null"]},
                    "provenance": {"type": "string", "enum": ["computed", "derived", "closed-form", "reported"]},
                },
            },
        },
        "verdicts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "status"],
                "properties": {
                    "name": {"type": "string"},
                    "status": {"type": "string"},
                    "context": {"type": "object"},
                },
            },
        },
        "files": {"type": "array", "items": {"type": "string"}},
        "seconds": {"type": ["number", "null"], "minimum": 0},
    },
}


def new_report(command: str, config: Optional[Dict[str, Any]] = None) -> Report:
    return Report(command=command, config=dict(config or {}), results=[], verdicts=[], files=[], seconds=None)


def add_result(
    report: Report, name: str, value: Any, tol: Optional[float] = None, provenance: str = "computed"
) -> None:
    report["results"].append(Result(name=name, value=json.to_jsonable(value), tol=tol, provenance=provenance))


def validate_report(report: Report) -> None:
    try:
        jsonschema.validate(instance=json.to_jsonable(report), schema=REPORT_SCHEMA)
    except jsonschema.ValidationError as error:
        msg = str(error).split("\n", 1)[0]
        raise ReportError(reason=msg) from error


def _fmt(value: Union[int, float, np.number]) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as e:
        raise ReportError(path=path, reason=f"{path}: {e.strerror}") from e
    logger.debug("Wrote %s", path)
    return path


def write_weight_csv(path: str, xi: np.ndarray, w: np.ndarray) -> str:
    return _write_rows(path, WEIGHT_COLUMNS, zip(xi, np.real(w)))


def write_lambda_csv(path: str, lambdas: np.ndarray, values: np.ndarray) -> str:
    values = np.asarray(values, dtype=complex)
    return _write_rows(path, LAMBDA_COLUMNS, zip(lambdas, values.real, values.imag))


def write_matrix_csv(path: str, matrix: np.ndarray) -> str:
    matrix = np.asarray(matrix, dtype=complex)
    n_rows, n_cols = matrix.shape
    rows = ((i, j, matrix[i, j].real, matrix[i, j].imag) for i in range(n_rows) for j in range(n_cols))
    return _write_rows(path, MATRIX_COLUMNS, rows)


def write_kernel_csv(
    path: str, xi: np.ndarray, eta: np.ndarray, values: np.ndarray, metadata: Optional[Dict[str, Any]] = None
) -> List[str]:
    """Kernel samples in long form, with the grid description in <path>.json."""
    values = np.asarray(values, dtype=complex)
    rows = ((x, e, values[i, j].real, values[i, j].imag) for i, x in enumerate(xi) for j, e in enumerate(eta))
    _write_rows(path, KERNEL_COLUMNS, rows)
    sidecar = path + ".json"
    _write_json(sidecar, metadata or {})
    return [path, sidecar]


def _write_json(path: str, obj: Any) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        os.replace(tmp, path)
    except OSError as e:
        raise ReportError(path=path, reason=f"{path}: {e.strerror}") from e


def _results_csv(path: str, report: Report) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(("name", "value", "tol", "provenance"))
            for r in report["results"]:
                value = r["value"]
                if not isinstance(value, str):
                    value = json.dumps(value, sort_keys=True)
                writer.writerow((r["name"], value, "" if r["tol"] is None else repr(float(r["tol"])), r["provenance"]))
    except OSError as e:
        raise ReportError(path=path, reason=f"{path}: {e.strerror}") from e
    return path


def emit_report(report: Report, fmt: str = "json", directory: str = ".") -> List[str]:
    """Write report.json (and results.csv for the csv format) and return the written paths.

    Files already listed in the manifest must exist.
    """
    if fmt not in FORMATS:
        raise ReportError(reason=f"unknown report format {fmt}")
    if not os.path.isdir(directory):
        raise ReportError(path=directory, reason=f"output directory {directory} does not exist")
    missing = [p for p in report["files"] if not os.path.exists(os.path.join(directory, p))]
    if missing:
        raise ReportError(path=missing[0], reason=f"manifest lists missing file {missing[0]}")

    written = []
    if fmt == "csv":
        written.append(_results_csv(os.path.join(directory, "results.csv"), report))
        report["files"].append("results.csv")
    validate_report(report)
    path = os.path.join(directory, REPORT_FILE)
    _write_json(path, report)
    written.append(path)
    logger.info("Report for %s written to %s", report["command"], path)
    return written
