"""Projection fields and pairs of complemented submodules.

A complemented submodule of ``C(Y, C^d)`` is the range of a continuous field
of orthogonal projections. :class:`ModulePair` holds two such fields together
with their fibrewise intersection projections (the kernel of ``1 - PQ``,
cross-checked against principal angles) and sum projections (the range of
``P + Q``).
"""
from __future__ import annotations

import numpy as np

from .errors import DiagnosticsError, InputError, NotAProjectionError
from .fields import INTERVAL, MatrixField
from .linalg import (DEFAULT_TOL, ToleranceConfig, adjoint, kernel_projections, norms,
                     oracle_intersections, range_projections)


class ProjectionField:
    """A :class:`MatrixField` certified Hermitian and idempotent at every fibre."""

    def __init__(self, field: MatrixField, herm_margin: float, idem_margin: float,
                 rank_profile: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL):
        self.field = field
        self.herm_margin = herm_margin
        self.idem_margin = idem_margin
        self.rank_profile = rank_profile
        self.tol = tol

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def base(self):
        return self.field.base

    @property
    def fiber_dim(self) -> int:
        return self.field.fiber_dim

    def at(self, y) -> np.ndarray:
        return self.field.at(y)

    def complement(self) -> "ProjectionField":
        return validate(self.field.complement(), self.tol)

    def __repr__(self):
        return (f"ProjectionField(n={len(self.field)}, d={self.fiber_dim}, "
                f"ranks={sorted(set(self.rank_profile.tolist()))})")


def validate(f: MatrixField, tol: ToleranceConfig = DEFAULT_TOL) -> ProjectionField:
    """Check ``P* = P^2 = P`` fibrewise; raise :class:`NotAProjectionError` otherwise."""
    p = f.values
    herm = norms(adjoint(p) - p)
    idem = norms(p @ p - p)
    eig = np.linalg.eigvalsh(0.5 * (p + adjoint(p)))
    spread = np.minimum(np.abs(eig), np.abs(eig - 1.0)).max(axis=-1)
    worst = np.maximum(np.maximum(herm, idem), spread)
    i = int(np.argmax(worst))
    if worst[i] > tol.idempotent_tol:
        label = f.base.labels[i]
        raise NotAProjectionError(
            f"fibre {label!r} (index {i}) is not an orthogonal projection: "
            f"|P*-P|={herm[i]:.3g}, |P^2-P|={idem[i]:.3g}, eigenvalue defect={spread[i]:.3g}",
            index=i, margin=float(worst[i]))
    ranks = np.sum(eig > 0.5, axis=-1)
    return ProjectionField(f, float(herm.max()), float(idem.max()), ranks, tol)


def _as_projection(p, tol) -> ProjectionField:
    if isinstance(p, ProjectionField):
        return p
    if isinstance(p, MatrixField):
        return validate(p, tol)
    raise InputError(f"expected a projection field, got {type(p).__name__}")


class ModulePair:
    """The pair ``(M, N) = (Ran P, Ran Q)`` over a shared base.

    Derived fibre data (intersection and sum projections, their ranks and
    margins) is computed once here. Construction raises
    :class:`DiagnosticsError` when the kernel route and the principal-angle
    route disagree on an intersection dimension.
    """

    def __init__(self, p, q, tol: ToleranceConfig = DEFAULT_TOL, meta: dict | None = None):
        self.tol = tol
        self.P = _as_projection(p, tol)
        self.Q = _as_projection(q, tol)
        if self.P.base != self.Q.base:
            raise InputError("P and Q must share the same base points")
        if self.P.fiber_dim != self.Q.fiber_dim:
            raise InputError("P and Q must have the same fibre dimension")
        self.meta = dict(meta or {})
        self._memo = {}

        p, q = self.P.values, self.Q.values
        eye = np.eye(self.fiber_dim)
        self.pq = p @ q
        omega, self.omega_ranks = kernel_projections(eye - self.pq, tol)
        self.omega = MatrixField(self.base, omega)

        dims, fried, oracle_proj = oracle_intersections(p, q)
        self.oracle_ranks = dims
        self.oracle_cosines = fried
        self.oracle_omega = oracle_proj
        bad = np.flatnonzero(dims != self.omega_ranks)
        if bad.size:
            i = int(bad[0])
            raise DiagnosticsError(
                f"intersection dimension at fibre {self.base.labels[i]!r}: "
                f"ker(1-PQ) gives {self.omega_ranks[i]}, principal angles give {dims[i]}")
        defect = np.maximum(norms(omega @ p - omega), norms(omega @ q - omega))
        if defect.max() > tol.equality_tol:
            i = int(np.argmax(defect))
            raise DiagnosticsError(
                f"intersection projection at fibre {self.base.labels[i]!r} is not "
                f"dominated by P and Q (defect {defect[i]:.3g})")

        sum_proj, self.sum_ranks, self.sum_margins = range_projections(p + q, tol)
        self.sum_projection = MatrixField(self.base, sum_proj)

    @property
    def base(self):
        return self.P.base

    @property
    def fiber_dim(self) -> int:
        return self.P.fiber_dim

    def __len__(self):
        return len(self.base)

    @property
    def is_refinable(self) -> bool:
        return (self.base.kind == INTERVAL and len(self.base) > 1
                and self.P.field.closed_form is not None
                and self.Q.field.closed_form is not None)

    def refined(self, factor: int = 2) -> "ModulePair":
        key = ("refined", factor)
        if key not in self._memo:
            self._memo[key] = ModulePair(self.P.field.refine(factor), self.Q.field.refine(factor),
                                         self.tol, self.meta)
        return self._memo[key]

    def restrict(self, indices) -> "ModulePair":
        return ModulePair(self.P.field.restrict(indices), self.Q.field.restrict(indices),
                          self.tol, self.meta)

    def perp(self) -> "ModulePair":
        """The pair of orthogonal complements ``(M^perp, N^perp)``."""
        if "perp" not in self._memo:
            self._memo["perp"] = ModulePair(self.P.complement(), self.Q.complement(),
                                            self.tol, self.meta)
        return self._memo["perp"]

    def swap(self) -> "ModulePair":
        return ModulePair(self.Q, self.P, self.tol, self.meta)

    def with_fields(self, p, q) -> "ModulePair":
        return ModulePair(p, q, self.tol, self.meta)

    def __repr__(self):
        name = self.meta.get("name", "pair")
        return f"ModulePair({name}, n={len(self)}, d={self.fiber_dim})"


def fiber_intersection(pair: ModulePair, y) -> np.ndarray:
    """Projection onto ``M_y ∩ N_y = ker(1 - P(y)Q(y))``."""
    return pair.omega.at(y)


def fiber_sum_projection(pair: ModulePair, y):
    """Projection onto ``Ran(P(y) + Q(y))`` and the fibre's closedness margin."""
    i = pair.base.index(y)
    margin = float(pair.sum_margins[i])
    return pair.sum_projection.values[i], (None if np.isnan(margin) else margin)


def intersection_rank_profile(pair: ModulePair) -> np.ndarray:
    return np.array(pair.omega_ranks, dtype=int)
