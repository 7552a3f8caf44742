"""Reading pairs from JSON and writing reports as CSV or JSON.

Input layout::

    {"base": {"kind": "interval", "a": 0, "b": 1, "n": 33}
             | {"kind": "finite", "labels": ["u", "v"]},
     "fiber_dim": 2,
     "P": [matrix per base point], "Q": [...],
     "closed_form": {"name": "universal", "params": {}}}     # optional

A matrix is either a flat row-major list of ``[re, im]`` pairs or a list of
rows. Output is deterministic: keys are sorted and floats use ``repr``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .fields import FINITE, INTERVAL, BaseSpace, ClosedForm, MatrixField
from .linalg import DEFAULT_TOL, ToleranceConfig
from .pair import ModulePair

SCHEMA_VERSION = 1
CSV_COLUMNS = ("point_label", "coordinate", "c_local", "intersection_rank", "pq_norm")


def _entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InputError(f"complex entries are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(float(x))
    raise InputError(f"bad matrix entry {x!r}")


def _is_scalar(x) -> bool:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return True
    return isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)


def _matrix(raw, d: int) -> np.ndarray:
    if not isinstance(raw, list):
        raise InputError("each matrix must be a list")
    if len(raw) == d * d and all(_is_scalar(x) for x in raw):
        return np.array([_entry(x) for x in raw], dtype=np.complex128).reshape(d, d)
    if len(raw) == d and all(isinstance(r, list) and len(r) == d for r in raw):
        return np.array([[_entry(x) for x in row] for row in raw], dtype=np.complex128)
    raise InputError(f"matrix does not have {d}x{d} entries")


def _base(raw) -> BaseSpace:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise InputError("'base' must be an object with a 'kind'")
    kind = raw["kind"]
    try:
        if kind == INTERVAL:
            return BaseSpace.interval(float(raw["a"]), float(raw["b"]), int(raw["n"]))
        if kind == FINITE:
            return BaseSpace.finite(raw["labels"])
    except KeyError as exc:
        raise InputError(f"base is missing field {exc.args[0]!r}") from None
    raise InputError(f"unknown base kind {kind!r}")


def pair_from_dict(doc: dict, tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    for key in ("base", "fiber_dim"):
        if key not in doc:
            raise InputError(f"input is missing {key!r}")
    base = _base(doc["base"])
    d = doc["fiber_dim"]
    if not isinstance(d, int) or d < 1:
        raise InputError("fiber_dim must be a positive integer")
    cf = doc.get("closed_form")
    if cf is not None:
        if "name" not in cf:
            raise InputError("closed_form needs a 'name'")
        tags = [ClosedForm(cf["name"], dict(cf.get("params", {})), c) for c in "PQ"]
        fields = [MatrixField.from_closed_form(base, t) for t in tags]
        if fields[0].fiber_dim != d:
            raise InputError(f"closed form has fibre dimension {fields[0].fiber_dim}, not {d}")
        meta = {"name": cf["name"], "family": cf["name"], "params": dict(cf.get("params", {}))}
    else:
        fields = []
        for key in ("P", "Q"):
            mats = doc.get(key)
            if not isinstance(mats, list) or len(mats) != len(base):
                raise InputError(f"{key!r} must list one matrix per base point ({len(base)})")
            fields.append(MatrixField(base, np.stack([_matrix(m, d) for m in mats])))
        meta = {"name": doc.get("name", "input")}
    return ModulePair(fields[0], fields[1], tol, meta)


def load_pair(path, tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    return pair_from_dict(doc, tol)


def _flat(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).ravel()]


def pair_to_dict(pair: ModulePair) -> dict:
    doc = {"base": pair.base.describe(), "fiber_dim": pair.fiber_dim,
           "P": [_flat(m) for m in pair.P.values], "Q": [_flat(m) for m in pair.Q.values]}
    name = pair.meta.get("name")
    if name:
        doc["name"] = name
    tp, tq = pair.P.field.closed_form, pair.Q.field.closed_form
    if (tp and tq and tp.name == tq.name and tp.params == tq.params
            and (tp.component, tq.component) == ("P", "Q") and not (tp.complement or tq.complement)):
        doc["closed_form"] = {"name": tp.name, "params": dict(tp.params)}
    return doc


def clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def profile_csv(profile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for label, coord, c, rank, pqn in profile.rows():
        w.writerow([label, repr(coord), repr(c), "" if rank is None else rank,
                    "" if pqn is None else repr(pqn)])
    return buf.getvalue()


def read_profile_csv(text: str) -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        for k in ("coordinate", "c_local", "pq_norm"):
            r[k] = float(r[k]) if r[k] else None
        r["intersection_rank"] = int(r["intersection_rank"]) if r["intersection_rank"] else None
    return rows
