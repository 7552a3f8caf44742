"""Sampled base spaces and operator/section fields over them.

The spectrum of a commutative coefficient algebra ``C(Y)`` is modelled as an
ordered finite sample of ``Y``; localising an adjointable operator at a point
is evaluating the field there. Fields are immutable: their value arrays are
marked read-only, and every algebraic operation returns a new field.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError, UnsupportedError
from .linalg import norms

DEFAULT_GRID = 257

INTERVAL = "interval"
FINITE = "finite"


@dataclass(frozen=True)
class BaseSpace:
    kind: str
    coords: tuple
    labels: tuple
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if not self.coords:
            raise InputError("a base space needs at least one point")
        if len(self.coords) != len(self.labels):
            raise InputError("labels and coordinates differ in length")
        if self.kind == INTERVAL:
            c = np.asarray(self.coords)
            if len(c) > 1 and np.any(np.diff(c) <= 0):
                raise InputError("interval coordinates must be strictly increasing")
        elif self.kind != FINITE:
            raise InputError(f"unknown base kind {self.kind!r}")

    @classmethod
    def interval(cls, a: float, b: float, n: int = DEFAULT_GRID) -> "BaseSpace":
        a, b, n = float(a), float(b), int(n)
        if n < 1:
            raise InputError("an interval grid needs at least one point")
        if n > 1 and not b > a:
            raise InputError(f"empty interval [{a}, {b}]")
        pts = np.linspace(a, b, n) if n > 1 else np.array([a])
        return cls(INTERVAL, tuple(float(t) for t in pts),
                   tuple(f"y{i}" for i in range(n)), a, b)

    @classmethod
    def finite(cls, labels) -> "BaseSpace":
        labels = tuple(str(x) for x in labels)
        if len(set(labels)) != len(labels):
            raise InputError("finite base labels must be distinct")
        return cls(FINITE, tuple(float(i) for i in range(len(labels))), labels)

    def __len__(self):
        return len(self.coords)

    @property
    def points(self):
        return list(zip(self.labels, self.coords))

    @property
    def coordinates(self) -> np.ndarray:
        return np.asarray(self.coords)

    @property
    def spacing(self) -> float:
        if self.kind != INTERVAL or len(self) < 2:
            return 0.0
        return (self.b - self.a) / (len(self) - 1)

    def index(self, y) -> int:
        """Resolve a label, an integer index or (interval only) a coordinate."""
        if isinstance(y, str):
            try:
                return self.labels.index(y)
            except ValueError:
                raise InputError(f"no base point labelled {y!r}") from None
        if isinstance(y, (int, np.integer)):
            if not -len(self) <= y < len(self):
                raise InputError(f"base index {y} out of range")
            return int(y) % len(self)
        if self.kind == INTERVAL:
            i = int(np.argmin(np.abs(self.coordinates - float(y))))
            if abs(self.coords[i] - float(y)) > 1e-12 * max(1.0, abs(float(y))):
                raise InputError(f"coordinate {y} is not a grid point")
            return i
        raise InputError(f"cannot locate base point {y!r}")

    def describe(self) -> dict:
        if self.kind == INTERVAL:
            return {"kind": INTERVAL, "a": self.a, "b": self.b, "n": len(self)}
        return {"kind": FINITE, "labels": list(self.labels)}


def refine(space: BaseSpace, factor: int = 2) -> BaseSpace:
    """Uniform refinement of an interval grid, keeping both endpoints."""
    if space.kind != INTERVAL:
        raise UnsupportedError("only interval base spaces can be refined")
    if int(factor) < 2:
        raise InputError("refinement factor must be at least 2")
    if len(space) < 2:
        raise UnsupportedError("a one-point interval grid cannot be refined")
    return BaseSpace.interval(space.a, space.b, (len(space) - 1) * int(factor) + 1)


# Analytic families: name -> evaluator(coords, params) -> (P stack, Q stack)
_FAMILIES: dict[str, Callable] = {}


def register_family(name: str):
    def deco(fn):
        _FAMILIES[name] = fn
        return fn
    return deco


def evaluate_family(name: str, coords: np.ndarray, params: dict):
    try:
        fn = _FAMILIES[name]
    except KeyError:
        raise InputError(f"unknown closed-form family {name!r}") from None
    return fn(np.asarray(coords, dtype=float), dict(params))


@dataclass(frozen=True)
class ClosedForm:
    """Tag naming the analytic family a field was sampled from.

    ``component`` selects the P or Q member of the family; ``complement``
    marks the field as ``1 - component``.
    """
    name: str
    params: dict = field(default_factory=dict)
    component: str = "P"
    complement: bool = False

    def evaluate(self, coords) -> np.ndarray:
        p, q = evaluate_family(self.name, coords, self.params)
        values = p if self.component == "P" else q
        if self.complement:
            values = np.eye(values.shape[-1]) - values
        return values

    def complemented(self) -> "ClosedForm":
        return ClosedForm(self.name, self.params, self.component, not self.complement)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


class MatrixField:
    """One ``d x d`` complex matrix per base point."""

    __slots__ = ("base", "values", "closed_form")

    def __init__(self, base: BaseSpace, values, closed_form: ClosedForm | None = None):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim != 3 or values.shape[0] != len(base) or values.shape[1] != values.shape[2]:
            raise InputError(
                f"field values must have shape ({len(base)}, d, d), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("field has non-finite entries")
        self.base = base
        self.values = _freeze(values)
        self.closed_form = closed_form

    @classmethod
    def constant(cls, base: BaseSpace, matrix) -> "MatrixField":
        matrix = np.asarray(matrix, dtype=np.complex128)
        return cls(base, np.broadcast_to(matrix, (len(base),) + matrix.shape))

    @classmethod
    def identity(cls, base: BaseSpace, dim: int) -> "MatrixField":
        return cls.constant(base, np.eye(dim))

    @classmethod
    def from_closed_form(cls, base: BaseSpace, tag: ClosedForm) -> "MatrixField":
        return cls(base, tag.evaluate(base.coordinates), tag)

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[-1]

    def __len__(self):
        return len(self.base)

    def at(self, y) -> np.ndarray:
        return self.values[self.base.index(y)]

    def _check(self, other: "MatrixField"):
        if other.base != self.base:
            raise InputError("fields live over different base spaces")
        if other.fiber_dim != self.fiber_dim:
            raise InputError("fields have different fibre dimensions")

    def __matmul__(self, other):
        if isinstance(other, VectorSection):
            return other.apply(self)
        self._check(other)
        return MatrixField(self.base, self.values @ other.values)

    def __add__(self, other: "MatrixField"):
        self._check(other)
        return MatrixField(self.base, self.values + other.values)

    def __sub__(self, other: "MatrixField"):
        self._check(other)
        return MatrixField(self.base, self.values - other.values)

    def __rmul__(self, scalar):
        return MatrixField(self.base, complex(scalar) * self.values)

    def __neg__(self):
        return MatrixField(self.base, -self.values)

    def adjoint(self) -> "MatrixField":
        return MatrixField(self.base, np.conj(np.swapaxes(self.values, -1, -2)))

    def complement(self) -> "MatrixField":
        tag = self.closed_form.complemented() if self.closed_form else None
        return MatrixField(self.base, np.eye(self.fiber_dim) - self.values, tag)

    def power(self, n: int) -> "MatrixField":
        return MatrixField(self.base, np.linalg.matrix_power(self.values, int(n)))

    def fiber_norms(self) -> np.ndarray:
        return norms(self.values)

    def modulus(self) -> float:
        """Largest operator-norm jump between adjacent base points."""
        if len(self) < 2 or self.base.kind != INTERVAL:
            return 0.0
        return float(norms(np.diff(self.values, axis=0)).max())

    def restrict(self, indices) -> "MatrixField":
        """Sub-field on the points ``indices`` of an interval base (a coarser grid)."""
        idx = np.asarray(indices)
        coords = self.base.coordinates[idx]
        base = BaseSpace(self.base.kind, tuple(float(c) for c in coords),
                         tuple(self.base.labels[i] for i in idx),
                         float(coords[0]) if self.base.kind == INTERVAL else None,
                         float(coords[-1]) if self.base.kind == INTERVAL else None)
        return MatrixField(base, self.values[idx], None)

    def refine(self, factor: int = 2) -> "MatrixField":
        """Re-evaluate the field exactly on a refined grid (closed forms only)."""
        if self.closed_form is None:
            raise UnsupportedError("only closed-form fields can be refined exactly")
        return MatrixField.from_closed_form(refine(self.base, factor), self.closed_form)

    def __repr__(self):
        tag = f", closed_form={self.closed_form.name!r}" if self.closed_form else ""
        return f"MatrixField(n={len(self)}, d={self.fiber_dim}{tag})"


class VectorSection:
    """One complex vector per base point."""

    __slots__ = ("base", "values")

    def __init__(self, base: BaseSpace, values):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim != 2 or values.shape[0] != len(base):
            raise InputError(f"section values must have shape ({len(base)}, d)")
        if not np.all(np.isfinite(values)):
            raise InputError("section has non-finite entries")
        self.base = base
        self.values = _freeze(values)

    @classmethod
    def constant(cls, base: BaseSpace, vector) -> "VectorSection":
        vector = np.asarray(vector, dtype=np.complex128)
        return cls(base, np.broadcast_to(vector, (len(base),) + vector.shape))

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[-1]

    def apply(self, f: MatrixField) -> "VectorSection":
        if f.base != self.base:
            raise InputError("section and field live over different base spaces")
        if f.fiber_dim != self.fiber_dim:
            raise InputError(
                f"section has fibre dimension {self.fiber_dim}, field has {f.fiber_dim}")
        return VectorSection(self.base, np.einsum("nij,nj->ni", f.values, self.values))

    def __sub__(self, other: "VectorSection"):
        return VectorSection(self.base, self.values - other.values)

    def fiber_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)


def sup_norm(f: MatrixField) -> float:
    """Grid approximation of the module operator norm: max fibre norm."""
    return float(f.fiber_norms().max())


def section_sup_norm(x: VectorSection) -> float:
    return float(x.fiber_norms().max())


def lipschitz_estimate(f: MatrixField) -> float:
    h = f.base.spacing
    return f.modulus() / h if h > 0 else 0.0
