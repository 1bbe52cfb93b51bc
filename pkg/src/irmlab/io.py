"""Instance documents (TOML) and machine-readable reports (JSON).

Instance document layout::

    task = "regression"            # or "classification"
    h_size = 2
    training = ["e1", "e2"]
    kernel = [["1/5", "4/5"], ["4/5", "1/5"]]   # rows over X1, columns over Y

    [spaces]
    x1 = [["0"], ["1"]]            # points are lists of rationals
    x2 = [["0"], ["1"]]
    y = [["0"], ["1"]]             # classification: y = [1, 2]

    [domains.e1]
    x1_marginal = ["1/2", "1/2"]
    x2_given_x1y = [[["1/1", "0/1"], ["0/1", "1/1"]], ...]   # [x1][y][x2]

Rationals are written as ``"num/den"`` strings; plain integers are accepted
on input.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli
import tomli_w

from . import __version__
from .logsum import LogSum
from .model import Domain, Instance, InvariantKernel, Task, to_fraction

__all__ = [
    "DocumentError",
    "InstanceDocument",
    "loads_document",
    "load_document",
    "dumps_document",
    "save_document",
    "digest",
    "rational",
    "render_value",
    "render_report",
]


class DocumentError(ValueError):
    """A document failed to parse; ``location`` is a key path or line/column."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class InstanceDocument:
    instance: Instance
    domains: dict = field(default_factory=dict)
    training: tuple = ()

    @property
    def training_domains(self) -> list[Domain]:
        return [self.domains[name] for name in self.training]

    def as_float(self) -> InstanceDocument:
        return InstanceDocument(
            self.instance.as_float(),
            {k: d.as_float() for k, d in self.domains.items()},
            self.training,
        )


def rational(x) -> str:
    """``"num/den"`` rendering of an exact rational."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# parsing ---------------------------------------------------------------


def _get(table: dict, key: str, path: str):
    if key not in table:
        raise DocumentError(path or "<root>", f"missing key {key!r}")
    return table[key]


def _frac(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError(path, f"expected a rational string or integer, got {value!r}")
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(path, f"bad rational {value!r}") from exc


def _vector(value, path: str) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise DocumentError(path, "expected an array")
    return tuple(_frac(v, f"{path}[{i}]") for i, v in enumerate(value))


def _points(value, path: str) -> tuple:
    if not isinstance(value, list):
        raise DocumentError(path, "expected an array of points")
    return tuple(_vector(p, f"{path}[{i}]") for i, p in enumerate(value))


def _from_dict(data: dict) -> InstanceDocument:
    try:
        task = Task(_get(data, "task", ""))
    except ValueError as exc:
        raise DocumentError("task", f"must be 'regression' or 'classification', got {data['task']!r}") from exc
    h_size = _get(data, "h_size", "")
    if isinstance(h_size, bool) or not isinstance(h_size, int):
        raise DocumentError("h_size", "expected an integer")
    spaces = _get(data, "spaces", "")
    x1 = _points(_get(spaces, "x1", "spaces"), "spaces.x1")
    x2 = _points(_get(spaces, "x2", "spaces"), "spaces.x2")
    y_raw = _get(spaces, "y", "spaces")
    if task is Task.CLASSIFICATION:
        if not isinstance(y_raw, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in y_raw):
            raise DocumentError("spaces.y", "classification labels must be integers")
        ys = tuple(y_raw)
    else:
        ys = _points(y_raw, "spaces.y")
    kernel_raw = _get(data, "kernel", "")
    if not isinstance(kernel_raw, list):
        raise DocumentError("kernel", "expected an array of rows")
    kernel = InvariantKernel(tuple(_vector(r, f"kernel[{i}]") for i, r in enumerate(kernel_raw)))
    instance = Instance(x1, x2, ys, h_size, kernel, task)

    domains = {}
    for name, body in data.get("domains", {}).items():
        path = f"domains.{name}"
        if not isinstance(body, dict):
            raise DocumentError(path, "expected a table")
        marginal = _vector(_get(body, "x1_marginal", path), f"{path}.x1_marginal")
        q_raw = _get(body, "x2_given_x1y", path)
        if not isinstance(q_raw, list) or not all(isinstance(r, list) for r in q_raw):
            raise DocumentError(f"{path}.x2_given_x1y", "expected a 3-level array [x1][y][x2]")
        q = tuple(
            tuple(_vector(vec, f"{path}.x2_given_x1y[{i}][{j}]") for j, vec in enumerate(per_y))
            for i, per_y in enumerate(q_raw)
        )
        domains[name] = Domain(marginal, q)

    training = data.get("training", [])
    if not isinstance(training, list):
        raise DocumentError("training", "expected an array of domain names")
    for i, name in enumerate(training):
        if name not in domains:
            raise DocumentError(f"training[{i}]", f"unknown domain {name!r}")
    return InstanceDocument(instance, domains, tuple(training))


def loads_document(text: str) -> InstanceDocument:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise DocumentError("toml", str(exc)) from exc
    return _from_dict(data)


def load_document(path) -> InstanceDocument:
    return loads_document(Path(path).read_text())


# serialization ---------------------------------------------------------


def _to_dict(doc: InstanceDocument) -> dict:
    inst = doc.instance
    vec = lambda v: [rational(x) for x in v]  # noqa: E731
    if inst.task is Task.CLASSIFICATION:
        ys = list(inst.y_points)
    else:
        ys = [vec(y) for y in inst.y_points]
    return {
        "task": inst.task.value,
        "h_size": inst.h_size,
        "training": list(doc.training),
        "kernel": [vec(row) for row in inst.kernel.table],
        "spaces": {
            "x1": [vec(p) for p in inst.x1_points],
            "x2": [vec(p) for p in inst.x2_points],
            "y": ys,
        },
        "domains": {
            name: {
                "x1_marginal": vec(d.x1_marginal),
                "x2_given_x1y": [[vec(v) for v in per_y] for per_y in d.x2_given_x1y],
            }
            for name, d in doc.domains.items()
        },
    }


def dumps_document(doc: InstanceDocument) -> str:
    if not doc.instance.exact:
        raise ValueError("only exact instances serialize")
    return tomli_w.dumps(_to_dict(doc))


def save_document(doc: InstanceDocument, path) -> None:
    Path(path).write_text(dumps_document(doc))


def digest(doc: InstanceDocument) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(dumps_document(doc).encode()).hexdigest()


# reports ---------------------------------------------------------------


def render_value(x) -> dict:
    """Exact rendering plus an advisory decimal."""
    if isinstance(x, float):
        if math.isinf(x):
            return {"exact": "+inf", "decimal": "+inf"}
        return {"exact": None, "decimal": f"{x:.12g}"}
    if isinstance(x, LogSum):
        return {"exact": f"log-linear: {x}", "decimal": f"{float(x):.12g}"}
    return {"exact": rational(x), "decimal": f"{float(x):.12g}"}


def render_report(command: str, doc: InstanceDocument | None, results: dict) -> str:
    """Deterministic JSON report: sorted keys, fixed indentation."""
    payload = {
        "command": command,
        "instance_digest": digest(doc) if doc is not None else None,
        "results": results,
        "version": __version__,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
