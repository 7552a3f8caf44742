"""Dense complex linear algebra on small matrices and stacks of them.

Matrices are plain ``numpy`` complex arrays. Functions that act fibrewise
accept stacks shaped ``(..., m, n)``; the single-matrix operations validate
their input and raise :class:`~concord.errors.InputError` on non-finite data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .jacobi import jacobi_eigh, jacobi_svd

#: absolute rank cutoff used when a matrix is numerically zero
ZERO_FLOOR = 1e-14
#: cosines within this distance of 1 count as a shared direction
CLUSTER_GAP = 1e-8


@dataclass(frozen=True)
class ToleranceConfig:
    rank_cutoff: float = 1e-9
    idempotent_tol: float = 1e-10
    equality_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_cutoff", "idempotent_tol", "equality_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise InputError(f"{name} must lie in (0, 1e-2), got {value!r}")

    def as_dict(self):
        return {"rank_cutoff": self.rank_cutoff, "idempotent_tol": self.idempotent_tol,
                "equality_tol": self.equality_tol}


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a, square=False) -> np.ndarray:
    """Coerce ``a`` to a finite complex 2-D array."""
    try:
        arr = np.asarray(a, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not a complex matrix: {exc}") from None
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def identity_like(a: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(a.shape[-1], dtype=np.complex128), a.shape)


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(a, compute_uv=False)


def norms(stack: np.ndarray) -> np.ndarray:
    """Operator norms of every matrix in a stack."""
    if stack.shape[-1] == 0 or stack.shape[-2] == 0:
        return np.zeros(stack.shape[:-2])
    return singular_values(stack)[..., 0]


def operator_norm(a) -> float:
    """Largest singular value of ``a``."""
    a = as_matrix(a)
    return float(norms(a))


def rank_cutoffs(sigma: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Per-matrix threshold below which a singular value counts as zero."""
    top = sigma[..., 0] if sigma.shape[-1] else np.zeros(sigma.shape[:-1])
    return np.where(top > ZERO_FLOOR, tol.rank_cutoff * top, ZERO_FLOOR)


def numerical_rank(a, tol: ToleranceConfig = DEFAULT_TOL):
    a = np.asarray(a, dtype=np.complex128)
    sigma = singular_values(a)
    ranks = np.sum(sigma >= rank_cutoffs(sigma, tol)[..., None], axis=-1)
    return int(ranks) if ranks.ndim == 0 else ranks


def kernel_projections(stack: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL):
    """Orthogonal projections onto the numerical kernels of a stack of square matrices.

    Returns ``(projections, kernel_dims)``.
    """
    _, sigma, vh = np.linalg.svd(stack)
    mask = sigma < rank_cutoffs(sigma, tol)[..., None]
    v = adjoint(vh)
    proj = np.einsum("...ij,...j,...kj->...ik", v, mask.astype(float), np.conj(v))
    return proj, mask.sum(axis=-1)


def kernel_basis(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of a square matrix.

    A zero-column array is returned when ``a`` is injective.
    """
    a = as_matrix(a, square=True)
    _, sigma, vh = np.linalg.svd(a)
    mask = sigma < rank_cutoffs(sigma, tol)
    return adjoint(vh)[:, mask]


def range_projections(stack: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL):
    """Projections onto the numerical column spaces of a stack.

    Returns ``(projections, ranks, margins)`` where ``margins`` holds the
    smallest retained singular value, ``nan`` for numerically zero matrices.
    """
    u, sigma, _ = np.linalg.svd(stack)
    keep = sigma >= rank_cutoffs(sigma, tol)[..., None]
    k = sigma.shape[-1]
    proj = np.einsum("...ij,...j,...kj->...ik", u[..., :, :k], keep.astype(float),
                     np.conj(u[..., :, :k]))
    margins = np.where(keep, sigma, np.inf).min(axis=-1)
    margins = np.where(np.isfinite(margins), margins, np.nan)
    return proj, keep.sum(axis=-1), margins


def range_projection(a, tol: ToleranceConfig = DEFAULT_TOL):
    """Projection onto the numerical column space of ``a`` and its closed-range margin.

    The margin is the smallest retained singular value, or ``None`` when ``a``
    is numerically zero.
    """
    a = as_matrix(a)
    proj, _, margin = range_projections(a, tol)
    margin = float(margin)
    return proj, (None if np.isnan(margin) else margin)


def is_orthonormal(u: np.ndarray, atol: float) -> bool:
    gram = adjoint(u) @ u
    return bool(np.all(np.abs(gram - np.eye(u.shape[-1])) <= atol))


def principal_angle_cosines(u, v, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Cosines of the principal angles between ``span(u)`` and ``span(v)``.

    ``u`` and ``v`` hold orthonormal columns in the same ambient space. The
    cosines are the singular values of ``u^H v``, computed with the Jacobi
    kernel (not LAPACK), clamped to ``[0, 1]`` and sorted descending.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape[0] != v.shape[0]:
        raise InputError("bases live in different ambient dimensions")
    for name, basis in (("U", u), ("V", v)):
        if not is_orthonormal(basis, tol.equality_tol):
            raise InputError(f"{name} does not have orthonormal columns")
    if u.shape[1] == 0 or v.shape[1] == 0:
        return np.zeros(0)
    return np.clip(jacobi_svd(adjoint(u) @ v)[1], 0.0, 1.0)


def intersection_dimension(cosines: np.ndarray) -> int:
    return int(np.sum(np.asarray(cosines) >= 1.0 - CLUSTER_GAP))


def friedrichs_cosine(cosines: np.ndarray) -> float:
    """Largest cosine strictly below the cosine-one cluster (0 if none)."""
    rest = np.asarray(cosines)[np.asarray(cosines) < 1.0 - CLUSTER_GAP]
    return float(rest.max()) if rest.size else 0.0


def projection_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of a Hermitian projection (Jacobi route)."""
    w, vecs = jacobi_eigh(p)
    return vecs[:, w > 0.5]


def oracle_intersection(p: np.ndarray, q: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL):
    """Principal-angle view of ``Ran p`` and ``Ran q``.

    Returns ``(cosines, intersection_projection)``; the projection is built
    from the principal vectors of the cosine-one cluster.
    """
    bp = projection_basis(p)
    bq = projection_basis(q)
    d = p.shape[-1]
    if bp.shape[1] == 0 or bq.shape[1] == 0:
        return np.zeros(0), np.zeros((d, d), dtype=np.complex128)
    _, sigma, vh = jacobi_svd(adjoint(bp) @ bq)
    cosines = np.clip(sigma, 0.0, 1.0)
    k = intersection_dimension(cosines)
    w = bq @ adjoint(vh)[:, :k]
    return cosines, w @ adjoint(w)


def oracle_intersections(p_stack: np.ndarray, q_stack: np.ndarray):
    """Batched :func:`oracle_intersection` over a stack of fibres.

    Returns ``(dims, friedrichs, projections)``: the cosine-one cluster size,
    the largest cosine below the cluster, and the cluster projection per fibre.
    """
    n, d, _ = p_stack.shape
    wp, vp = jacobi_eigh(p_stack)
    wq, vq = jacobi_eigh(q_stack)
    rp = np.sum(wp > 0.5, axis=-1)
    rq = np.sum(wq > 0.5, axis=-1)
    dims = np.zeros(n, dtype=int)
    fried = np.zeros(n)
    proj = np.zeros((n, d, d), dtype=np.complex128)
    for a, b in sorted(set(zip(rp.tolist(), rq.tolist()))):
        idx = np.flatnonzero((rp == a) & (rq == b))
        if a == 0 or b == 0:
            continue
        # eigenvalues ascending: the range basis is the trailing block
        bp = vp[idx][:, :, d - a:]
        bq = vq[idx][:, :, d - b:]
        _, sigma, vh = jacobi_svd(adjoint(bp) @ bq)
        cos = np.clip(sigma, 0.0, 1.0)
        in_cluster = cos >= 1.0 - CLUSTER_GAP
        dims[idx] = in_cluster.sum(axis=-1)
        fried[idx] = np.where(in_cluster, 0.0, cos).max(axis=-1)
        w = bq @ adjoint(vh)
        proj[idx] = np.einsum("nij,nj,nkj->nik", w, in_cluster.astype(float), np.conj(w))
    return dims, fried, proj
