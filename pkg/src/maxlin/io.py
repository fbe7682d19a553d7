"""File formats: sample CSV, model / DAG / matrix JSON, run manifests.

* Samples: UTF-8 CSV, header ``x1,...,xd``, one observation per row,
  floats written with 17 significant digits so a round trip is bit-exact.
* Model: ``{"d", "edges": [{"from", "to", "weight"}], "innovations":
  [{"node", "family", "params"}]}``; innovations default to Frechet(1, 1).
* DAG: ``{"d", "edges": [[j, i], ...]}``; a model file is also accepted.
* Matrix: ``{"d", "nodes": [1..d], "matrix": [[...], ...]}``, dense
  row-major with explicit zeros.
"""

from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, MalformedDataError, MalformedGraphError
from .graph import Dag
from .model import WeightedDag
from .simulate import InnovationSpec, SampleSet, default_spec, innovation_from_json

PathLike = str | os.PathLike


def _fmt(v: float) -> str:
    return "%.17g" % v


@contextlib.contextmanager
def _sink(path: PathLike | None):
    """Open ``path`` for writing, or yield stdout when it is None."""
    if path is None:
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


# --- samples -------------------------------------------------------------------------


def write_samples_csv(path: PathLike | None, samples: SampleSet) -> None:
    with _sink(path) as fh:
        fh.write(",".join(f"x{k + 1}" for k in range(samples.d)) + "\n")
        for row in samples.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_samples_csv(path: PathLike, d: int | None = None) -> SampleSet:
    """Parse a sample CSV; ``d`` (if given) must match the column count."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise MalformedDataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MalformedDataError(f"{path}: empty file, expected header x1,...,xd")
        header = [h.strip() for h in header]
        expected = [f"x{k + 1}" for k in range(len(header))]
        if header != expected:
            raise MalformedDataError(f"{path}: line 1: header must be {','.join(expected)}, got {','.join(header)}")
        if d is not None and len(header) != d:
            raise MalformedDataError(f"{path}: {len(header)} columns but {d} nodes expected")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedDataError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for k, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise MalformedDataError(f"{path}: line {line}, field x{k + 1}: not a number: {cell!r}") from None
                if not (math.isfinite(v) and v > 0):
                    raise MalformedDataError(f"{path}: line {line}, field x{k + 1}: must be finite and > 0, got {cell}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise MalformedDataError(f"{path}: no data rows")
    return SampleSet(np.array(rows))


# --- JSON helpers --------------------------------------------------------------------


def read_json(path: PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def write_json(path: PathLike, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _count(obj: dict, key: str, where: str) -> int:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise InvalidArgumentError(f"{where}: field {key!r} must be a positive integer, got {v!r}")
    return v


# --- models and DAGs -----------------------------------------------------------------


def model_from_json(obj, where: str = "model") -> tuple[WeightedDag, InnovationSpec]:
    if not isinstance(obj, dict):
        raise InvalidArgumentError(f"{where}: expected a JSON object")
    d = _count(obj, "d", where)
    edges = obj.get("edges", [])
    if not isinstance(edges, list):
        raise InvalidArgumentError(f"{where}: field 'edges' must be a list")
    weighted = []
    for idx, e in enumerate(edges):
        tag = f"{where}: edges[{idx}]"
        if not isinstance(e, dict) or not {"from", "to", "weight"} <= set(e):
            raise InvalidArgumentError(f"{tag}: expected an object with from, to, weight")
        try:
            j, i, c = int(e["from"]), int(e["to"]), float(e["weight"])
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"{tag}: from/to must be integers and weight a number") from None
        if not (c > 0 and math.isfinite(c)):
            raise InvalidArgumentError(f"{tag}: weight must be positive and finite, got {e['weight']!r}")
        weighted.append((j, i, c))
    try:
        wd = WeightedDag.from_edges(d, weighted)
    except MalformedGraphError as exc:
        raise MalformedGraphError(f"{where}: {exc}") from None
    inn = obj.get("innovations")
    if inn is None:
        return wd, default_spec(d)
    if not isinstance(inn, list):
        raise InvalidArgumentError(f"{where}: field 'innovations' must be a list")
    nodes = [None] * d
    for idx, entry in enumerate(inn):
        tag = f"{where}: innovations[{idx}]"
        if not isinstance(entry, dict):
            raise InvalidArgumentError(f"{tag}: expected an object")
        node = entry.get("node")
        if isinstance(node, bool) or not isinstance(node, int) or not 1 <= node <= d:
            raise InvalidArgumentError(f"{tag}: node must be an integer in 1..{d}, got {node!r}")
        if nodes[node - 1] is not None:
            raise InvalidArgumentError(f"{tag}: node {node} listed twice")
        try:
            nodes[node - 1] = innovation_from_json(entry)
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"{tag}: {exc}") from None
    missing = [k + 1 for k, z in enumerate(nodes) if z is None]
    if missing:
        raise InvalidArgumentError(f"{where}: no innovation given for nodes {missing}")
    return wd, InnovationSpec(tuple(nodes))


def model_to_json(wd: WeightedDag, spec: InnovationSpec | None = None) -> dict:
    spec = spec or default_spec(wd.d)
    return {
        "d": wd.d,
        "edges": [{"from": j, "to": i, "weight": c} for (j, i), c in sorted(wd.weights.items())],
        "innovations": spec.to_json(),
    }


def read_model(path: PathLike) -> tuple[WeightedDag, InnovationSpec]:
    return model_from_json(read_json(path), where=str(path))


def write_model(path: PathLike, wd: WeightedDag, spec: InnovationSpec | None = None) -> None:
    write_json(path, model_to_json(wd, spec))


def dag_from_json(obj, where: str = "dag") -> Dag:
    if not isinstance(obj, dict):
        raise InvalidArgumentError(f"{where}: expected a JSON object")
    d = _count(obj, "d", where)
    raw = obj.get("edges", [])
    if not isinstance(raw, list):
        raise InvalidArgumentError(f"{where}: field 'edges' must be a list")
    edges = []
    for idx, e in enumerate(raw):
        if isinstance(e, dict):
            e = (e.get("from"), e.get("to"))
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise InvalidArgumentError(f"{where}: edges[{idx}]: expected [from, to]")
        edges.append(tuple(e))
    try:
        return Dag(d, edges)
    except MalformedGraphError as exc:
        raise MalformedGraphError(f"{where}: {exc}") from None


def read_dag(path: PathLike) -> Dag:
    return dag_from_json(read_json(path), where=str(path))


def write_dag(path: PathLike, dag: Dag) -> None:
    write_json(path, dag.to_json())


# --- matrices ------------------------------------------------------------------------


def matrix_to_json(b: np.ndarray) -> dict:
    d = b.shape[0]
    return {"d": d, "nodes": list(range(1, d + 1)), "matrix": [[float(v) for v in row] for row in b]}


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if isinstance(obj, dict):
        rows = obj.get("matrix", obj.get("b"))
        d = obj.get("d")
    else:
        rows, d = obj, None
    if not isinstance(rows, list) or not rows:
        raise InvalidArgumentError(f"{where}: expected a non-empty list of rows")
    try:
        b = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{where}: rows must be equal-length lists of numbers") from None
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InvalidArgumentError(f"{where}: matrix must be square, got shape {b.shape}")
    if d is not None and d != b.shape[0]:
        raise InvalidArgumentError(f"{where}: d={d} but matrix is {b.shape[0]}x{b.shape[0]}")
    if not np.all(np.isfinite(b)) or np.any(b < 0):
        raise InvalidArgumentError(f"{where}: entries must be finite and non-negative")
    return b


def read_matrix(path: PathLike) -> np.ndarray:
    return matrix_from_json(read_json(path), where=str(path))


def write_matrix(path: PathLike, b: np.ndarray) -> None:
    write_json(path, matrix_to_json(b))


def read_candidates(path: PathLike) -> list[tuple[str, object]]:
    """Named candidate matrices: ``{"candidates": [{"name", "matrix"}]}`` or a bare list.

    Entries that do not parse are returned as the exception instance so
    the caller can report them per row.
    """
    obj = read_json(path)
    items = obj.get("candidates") if isinstance(obj, dict) else obj
    if not isinstance(items, list):
        raise InvalidArgumentError(f"{path}: expected a list of candidates")
    out: list[tuple[str, object]] = []
    for idx, item in enumerate(items):
        name = item.get("name", f"q{idx + 1}") if isinstance(item, dict) else f"q{idx + 1}"
        try:
            out.append((str(name), matrix_from_json(item, where=f"candidates[{idx}]")))
        except InvalidArgumentError as exc:
            out.append((str(name), exc))
    return out


# --- tables and manifests ------------------------------------------------------------


def write_table_csv(path: PathLike | None, header: list[str], rows: list[list]) -> None:
    def cell(v):
        if isinstance(v, float):
            return _fmt(v)
        if isinstance(v, bool):
            return "true" if v else "false"
        return "" if v is None else str(v)

    with _sink(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")


def file_digest(path: PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, argv: list[str], seed: int | None, inputs: dict[str, PathLike], started: float) -> dict:
    from . import __version__
    from ._backend import NAME

    return {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "inputs": {k: {"path": str(p), "sha256": file_digest(p)} for k, p in inputs.items() if p is not None},
        "version": __version__,
        "backend": NAME,
        "python": platform.python_version(),
        "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "wall_clock_s": round(time.time() - started, 6),
    }


def emit_manifest(manifest: dict, out: PathLike | None) -> None:
    """Print to stderr and, when there is an output file, write ``<out>.manifest.json``."""
    text = json.dumps(manifest, indent=2)
    print(text, file=sys.stderr)
    if out is not None:
        Path(str(out) + ".manifest.json").write_text(text + "\n", encoding="utf-8")
