"""JSON files for states and channels.

A state file looks like::

    {"dims": [2, 2], "matrix": [[[0.5, 0.0], ...], ...], "name": "phi2"}

with every complex entry written as ``[re, im]``, rows first.  Channel files
use the same layout for the Choi matrix with ``dims`` a 4-tuple
(in_A, in_B, out_A, out_B).
"""

from __future__ import annotations

import json
import math

import numpy as np

from .channels import ChoiChannel, from_choi
from .errors import ParseError
from .states import BipartiteState, make_state


def _load(data: bytes | str, source: str) -> dict:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(source, f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(source, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError(source, "top level must be an object")
    return obj


def _dims(obj: dict, n: int, source: str) -> tuple[int, ...]:
    dims = obj.get("dims")
    if not isinstance(dims, list) or len(dims) != n:
        raise ParseError(f"{source}:dims", f"expected a list of {n} positive integers")
    out = []
    for i, d in enumerate(dims):
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise ParseError(f"{source}:dims[{i}]", f"expected a positive integer, got {d!r}")
        out.append(d)
    return tuple(out)


def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParseError(path, f"expected a finite number, got {x!r}")
    return float(x)


def _matrix(obj: dict, size: int, source: str) -> np.ndarray:
    rows = obj.get("matrix")
    if not isinstance(rows, list) or len(rows) != size:
        raise ParseError(f"{source}:matrix", f"expected {size} rows")
    out = np.zeros((size, size), complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != size:
            raise ParseError(f"{source}:matrix[{i}]", f"expected {size} entries")
        for j, entry in enumerate(row):
            path = f"{source}:matrix[{i}][{j}]"
            if not isinstance(entry, list) or len(entry) != 2:
                raise ParseError(path, "complex entries must be [re, im]")
            out[i, j] = complex(_number(entry[0], path), _number(entry[1], path))
    return out


def parse_state_file(data: bytes | str, source: str = "<state>") -> BipartiteState:
    obj = _load(data, source)
    da, db = _dims(obj, 2, source)
    if "name" in obj and not isinstance(obj["name"], str):
        raise ParseError(f"{source}:name", "name must be a string")
    return make_state(_matrix(obj, da * db, source), da, db)


def parse_channel_file(data: bytes | str, source: str = "<channel>") -> ChoiChannel:
    obj = _load(data, source)
    dims = _dims(obj, 4, source)
    size = dims[0] * dims[1] * dims[2] * dims[3]
    return from_choi(_matrix(obj, size, source), dims)


def _entries(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, complex)]


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, round-trip float repr."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def serialize_state(rho: BipartiteState, name: str | None = None) -> bytes:
    obj = {"dims": [rho.dim_a, rho.dim_b], "matrix": _entries(rho.matrix)}
    if name is not None:
        obj["name"] = name
    return dumps(obj).encode("utf-8")


def serialize_channel(ch: ChoiChannel, name: str | None = None) -> bytes:
    obj = {"dims": list(ch.dims), "matrix": _entries(ch.choi)}
    if name is not None:
        obj["name"] = name
    return dumps(obj).encode("utf-8")


def read_state(path: str) -> BipartiteState:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ParseError(path, str(exc)) from exc
    return parse_state_file(data, path)


def read_channel(path: str) -> ChoiChannel:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ParseError(path, str(exc)) from exc
    return parse_channel_file(data, path)
