"""Model, DAG, dataset and report serialisation.

Model files are JSON documents tagged ``"schema": "latent-oce/model"``::

    {
      "schema": "latent-oce/model", "version": 1,
      "n": 2, "labels": ["X1", "X2"],
      "edges": [{"from": 1, "to": 2, "weight": 0.5}],
      "mu": [0.0, 0.0], "v": [1.0, 1.0],
      "nodes": [{"levels": 2, "tau": [0, 1], "thresholds": [0.2]}, ...]
    }

Only interior thresholds are stored. An edge ``{"from": h, "to": j}`` is
the coefficient of parent ``h`` in the equation of ``j``, i.e. entry
``B[j][h]`` of the dense coefficient matrix. Floats are written with
``repr`` precision, so files round-trip exactly.

DAG files use ``"schema": "latent-oce/dag"`` with ``"edges": [[h, j], ...]``;
anywhere a DAG is expected a model file is accepted too.

Datasets are headered CSV of 0-based integer levels. An optional first line
``# level_counts: 2,4,3`` records the number of levels per column; without
it counts are inferred as ``max + 1``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .datagen import OrdinalDataset
from .errors import DataError, ModelError
from .graph import Dag
from .sem import LatentDagModel

MODEL_SCHEMA = "latent-oce/model"
DAG_SCHEMA = "latent-oce/dag"
VERSION = 1

RECORD_FIELDS = ("i", "o", "l", "l_prime", "k", "value", "method", "std_err")
METHODS = ("closed", "numeric-dist", "numeric-quant", "oracle")


def _tau_value(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def model_to_dict(model: LatentDagModel) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "version": VERSION,
        "n": model.n,
        "labels": list(model.dag.labels) if model.dag.labels else None,
        "edges": [
            {"from": h, "to": j, "weight": float(model.b[(h, j)])}
            for h, j in model.dag.sorted_edges()
        ],
        "mu": [float(x) for x in model.mu],
        "v": [float(x) for x in model.v],
        "nodes": [
            {
                "levels": len(t) - 1,
                "tau": [_tau_value(x) for x in tau],
                "thresholds": [float(x) for x in t[1:-1]],
            }
            for t, tau in zip(model.thresholds, model.tau)
        ],
    }


def _check_schema(doc: dict, expected: Sequence[str]) -> str:
    if not isinstance(doc, dict):
        raise ModelError("file must contain a JSON object")
    schema = doc.get("schema")
    if schema not in expected:
        raise ModelError(f"unexpected schema {schema!r}; expected one of {list(expected)}")
    if doc.get("version") != VERSION:
        raise ModelError(f"unsupported {schema} version {doc.get('version')!r}")
    return schema


def _edges_of(doc: dict) -> list[tuple[int, int]]:
    out = []
    for e in doc.get("edges", []):
        if isinstance(e, dict):
            out.append((int(e["from"]), int(e["to"])))
        else:
            h, j = e
            out.append((int(h), int(j)))
    return out


def model_from_dict(doc: dict) -> LatentDagModel:
    _check_schema(doc, [MODEL_SCHEMA])
    try:
        n = int(doc["n"])
        dag = Dag(n, frozenset(_edges_of(doc)), doc.get("labels"))
        b = {(int(e["from"]), int(e["to"])): float(e["weight"]) for e in doc["edges"]}
        nodes = doc["nodes"]
        if len(nodes) != n:
            raise ModelError(f"expected {n} node entries, got {len(nodes)}")
        ths = []
        taus = []
        for m, node in enumerate(nodes, start=1):
            t = [float(x) for x in node["thresholds"]]
            if "levels" in node and int(node["levels"]) != len(t) + 1:
                raise ModelError(f"node {m}: {node['levels']} levels need {int(node['levels']) - 1} thresholds")
            ths.append(t)
            taus.append(node.get("tau", list(range(len(t) + 1))))
        return LatentDagModel(dag=dag, mu=doc["mu"], b=b, v=doc["v"], thresholds=ths, tau=taus)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model file: {exc!r}") from exc


def dag_to_dict(dag: Dag) -> dict:
    return {
        "schema": DAG_SCHEMA,
        "version": VERSION,
        "n": dag.n,
        "labels": list(dag.labels) if dag.labels else None,
        "edges": [list(e) for e in dag.sorted_edges()],
    }


def dag_from_dict(doc: dict) -> Dag:
    _check_schema(doc, [DAG_SCHEMA, MODEL_SCHEMA])
    try:
        return Dag(int(doc["n"]), frozenset(_edges_of(doc)), doc.get("labels"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"malformed DAG file: {exc!r}") from exc


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from exc


def write_model(path, model: LatentDagModel) -> None:
    Path(path).write_text(_dump(model_to_dict(model)))


def read_model(path) -> LatentDagModel:
    return model_from_dict(_load(path))


def write_dag(path, dag: Dag) -> None:
    Path(path).write_text(_dump(dag_to_dict(dag)))


def read_dag(path) -> Dag:
    return dag_from_dict(_load(path))


def dataset_to_csv(data: OrdinalDataset) -> str:
    buf = _io.StringIO()
    buf.write("# level_counts: " + ",".join(str(c) for c in data.level_counts) + "\n")
    header = data.labels or tuple(f"X{m}" for m in range(1, data.n_cols + 1))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(data.cells.tolist())
    return buf.getvalue()


def write_dataset(path, data: OrdinalDataset) -> None:
    Path(path).write_text(dataset_to_csv(data))


def read_dataset(path, level_counts: Sequence[int] | None = None) -> OrdinalDataset:
    text = Path(path).read_text()
    lines = text.splitlines()
    declared = None
    if lines and lines[0].startswith("#"):
        head = lines.pop(0)[1:].strip()
        if head.startswith("level_counts:"):
            declared = [int(x) for x in head.split(":", 1)[1].split(",") if x.strip()]
    rows = list(csv.reader(lines))
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one row")
    header, body = rows[0], rows[1:]
    try:
        cells = np.array([[int(x) for x in r] for r in body if r], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"{path}: non-integer cell ({exc})") from exc
    if cells.ndim != 2 or cells.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows or header mismatch")
    counts = level_counts or declared
    if counts is None:
        counts = [int(c) + 1 for c in cells.max(axis=0)]
    return OrdinalDataset(cells, tuple(counts), tuple(header))


@dataclass
class RunReport:
    """Command output: echo of the invocation, seed, wall time and flat records."""

    command: list
    seed: int | None
    timing: float
    records: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "timing_s": self.timing,
            "records": self.records,
            **self.extra,
        }


def make_record(i, o, l, l_prime, k, value, method, std_err=None, **extra) -> dict:
    if method not in METHODS:
        raise ValueError(f"unknown method tag {method!r}")
    rec = {
        "i": int(i),
        "o": int(o),
        "l": int(l),
        "l_prime": int(l_prime),
        "k": int(k),
        "value": float(value),
        "method": method,
        "std_err": None if std_err is None else float(std_err),
    }
    rec.update(extra)
    return rec


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def records_to_csv(records: list, fields: Sequence[str] | None = None) -> str:
    if fields is None:
        fields = list(RECORD_FIELDS)
        for r in records:
            for key in r:
                if key not in fields:
                    fields.append(key)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([_fmt(r.get(f)) for f in fields])
    return buf.getvalue()


def read_records_csv(text: str) -> list[dict]:
    out = []
    for row in csv.DictReader(_io.StringIO(text)):
        rec = dict(row)
        for key in ("i", "o", "l", "l_prime", "k", "replicate"):
            if rec.get(key) not in (None, ""):
                rec[key] = int(rec[key])
        rec["value"] = float(rec["value"])
        rec["std_err"] = float(rec["std_err"]) if rec.get("std_err") else None
        out.append(rec)
    return out


def report_to_text(report: RunReport, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return records_to_csv(report.records)
    raise ValueError(f"unknown format {fmt!r}")
