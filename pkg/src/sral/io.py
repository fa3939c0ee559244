"""JSON readers and writers for matrices, families, algebras, operators and
chains.

Complex entries are ``[re, im]`` pairs.  Python's ``repr`` of a float is
the shortest string that round-trips, so written values read back bit for
bit.  Writers sort keys so equal reports serialize to equal bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .elementary import ElementaryOperator, OperatorValuedCurve
from .errors import InputError, ShapeMismatch
from .families import SummableFamily
from .triangular import SubspaceChain


def _require(obj, key, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"missing field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"field {key!r} has the wrong type")
    return val


def _scalar(entry) -> complex:
    if isinstance(entry, bool):
        raise InputError("boolean is not a matrix entry")
    if isinstance(entry, (int, float)):
        re, im = float(entry), 0.0
    elif isinstance(entry, (list, tuple)) and len(entry) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry
    ):
        re, im = float(entry[0]), float(entry[1])
    else:
        raise InputError(f"matrix entry {entry!r} is not a number or [re, im] pair")
    if not (math.isfinite(re) and math.isfinite(im)):
        raise InputError("matrix entries must be finite")
    return complex(re, im)


def matrix_from_json(obj) -> np.ndarray:
    rows = _require(obj, "rows", int)
    cols = _require(obj, "cols", int)
    data = _require(obj, "data", list)
    if rows < 0 or cols < 0:
        raise InputError("negative matrix dimension")
    if len(data) != rows or any(not isinstance(r, list) or len(r) != cols for r in data):
        raise ShapeMismatch(f"data does not have shape {rows}x{cols}")
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        for j, entry in enumerate(row):
            out[i, j] = _scalar(entry)
    return out


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        a = a[:, None]
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[[float(v.real), float(v.imag)] for v in row] for row in a],
    }


def family_from_json(obj) -> SummableFamily:
    members = [matrix_from_json(m) for m in _require(obj, "members", list)]
    if not members:
        raise InputError("family has no members")
    d = obj.get("dimension")
    if d is not None and any(m.shape != (d, d) for m in members):
        raise ShapeMismatch(f"members are not {d}x{d}")
    mult = obj.get("multiplicities")
    if mult is not None:
        if not isinstance(mult, list) or len(mult) != len(members):
            raise InputError("one multiplicity per member is required")
        if any(isinstance(k, bool) or not isinstance(k, int) or k < 1 for k in mult):
            raise InputError("multiplicities must be positive integers")
    return SummableFamily(members, mult)


def family_to_json(M: SummableFamily) -> dict:
    return {
        "dimension": M.dimension,
        "members": [matrix_to_json(m) for m in M.members],
        "multiplicities": [int(k) for k in M.multiplicities],
    }


def algebra_from_json(obj) -> tuple[list[np.ndarray], bool]:
    gens = [matrix_from_json(m) for m in _require(obj, "generators", list)]
    if not gens:
        raise InputError("algebra has no generators")
    d = obj.get("dimension", gens[0].shape[0])
    if any(g.shape != (d, d) for g in gens):
        raise ShapeMismatch(f"generators are not {d}x{d}")
    unital = obj.get("unital", True)
    if not isinstance(unital, bool):
        raise InputError("field 'unital' must be boolean")
    return gens, unital


def operator_from_json(obj) -> ElementaryOperator:
    m = _require(obj, "m", int)
    n = _require(obj, "n", int)
    terms, flags = [], []
    for t in _require(obj, "terms", list):
        terms.append((matrix_from_json(_require(t, "a")), matrix_from_json(_require(t, "b"))))
        flags.append((bool(t.get("a_compact", False)), bool(t.get("b_compact", False))))
    return ElementaryOperator(m, n, terms, flags)


def operator_to_json(T: ElementaryOperator) -> dict:
    return {
        "m": T.m,
        "n": T.n,
        "terms": [
            {"a": matrix_to_json(a), "b": matrix_to_json(b), "a_compact": fa, "b_compact": fb}
            for (a, b), (fa, fb) in zip(T.terms, T.compact_flags)
        ],
    }


def curve_from_json(obj, side: str = "left") -> OperatorValuedCurve:
    interval = _require(obj, "interval", list)
    if len(interval) != 2:
        raise InputError("interval must have two endpoints")
    samples = [matrix_from_json(s) for s in _require(obj, "samples", list)]
    if not samples:
        raise InputError("curve has no samples")
    return OperatorValuedCurve.from_samples(samples, (float(interval[0]), float(interval[1])), side)


def chain_to_json(chain: SubspaceChain) -> dict:
    return {
        "dimension": chain.dimension,
        "bases": [[matrix_to_json(b[:, j]) for j in range(b.shape[1])] for b in chain.bases],
    }


def chain_from_json(obj) -> SubspaceChain:
    d = _require(obj, "dimension", int)
    bases = []
    for cols in _require(obj, "bases", list):
        vecs = [matrix_from_json(c) for c in cols]
        if any(v.shape != (d, 1) for v in vecs):
            raise ShapeMismatch(f"basis vectors must be {d}x1")
        bases.append(np.hstack(vecs) if vecs else np.zeros((d, 0), dtype=complex))
    return SubspaceChain(d, tuple(bases))


def load_json(path) -> object:
    """Parse a JSON file; any read or syntax failure is an input error."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from exc


def _reject_constant(name):
    raise InputError(f"non-finite value {name} in input")


def to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        # JSON has no infinities; an unbounded value is written as null
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(float(obj.real)), to_plain(float(obj.imag))]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text with sorted keys and a trailing newline."""
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))
