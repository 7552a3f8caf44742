"""Batched Jacobi kernels for small complex matrices.

These are deliberately independent of LAPACK: they back the principal-angle
oracle, so that the angle and intersection computations in ``linalg`` (which
use ``numpy.linalg``) are always checked against a second code path.

Every routine accepts a single matrix ``(m, n)`` or a stack ``(..., m, n)``
and rotates all matrices of the stack in lock step.
"""
from __future__ import annotations

import numpy as np

_MAX_SWEEPS = 60


def _as_stack(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    if a.ndim < 2:
        raise ValueError("expected a matrix or a stack of matrices")
    lead = a.shape[:-2]
    return a.reshape((-1,) + a.shape[-2:]), lead


def _rotation(zeta):
    # smaller root of t^2 + 2 zeta t - 1 = 0
    sign = np.where(zeta >= 0, 1.0, -1.0)
    t = sign / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, c * t


def jacobi_svd(a, tol=1e-15):
    """One-sided (Hestenes) Jacobi SVD.

    Returns ``(u, s, vh)`` with ``s`` sorted in descending order and
    ``k = min(m, n)`` singular triplets, so that ``a ~= u @ diag(s) @ vh``.
    Left vectors belonging to zero singular values are returned as zeros.
    """
    stack, lead = _as_stack(a)
    b, m, n = stack.shape
    transposed = m < n
    if transposed:
        stack = np.conj(np.swapaxes(stack, -1, -2))
        m, n = n, m
    w = stack
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()

    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ai = w[:, :, i]
                aj = w[:, :, j]
                alpha = np.sum(ai.real ** 2 + ai.imag ** 2, axis=-1)
                beta = np.sum(aj.real ** 2 + aj.imag ** 2, axis=-1)
                gamma = np.sum(np.conj(ai) * aj, axis=-1)
                g = np.abs(gamma)
                active = g > tol * np.sqrt(alpha * beta)
                if not active.any():
                    continue
                rotated = True
                g_safe = np.where(active, g, 1.0)
                phase = np.where(active, gamma / g_safe, 1.0)
                c, s = _rotation(np.where(active, (beta - alpha) / (2.0 * g_safe), 0.0))
                c = np.where(active, c, 1.0)[:, None]
                s = np.where(active, s, 0.0)[:, None]
                ph = np.conj(phase)[:, None]

                bj = aj * ph
                w[:, :, i], w[:, :, j] = c * ai - s * bj, s * ai + c * bj
                vi = v[:, :, i]
                vj = v[:, :, j] * ph
                v[:, :, i], v[:, :, j] = c * vi - s * vj, s * vi + c * vj
        if not rotated:
            break

    sigma = np.linalg.norm(w, axis=1)
    order = np.argsort(-sigma, axis=-1, kind="stable")
    sigma = np.take_along_axis(sigma, order, axis=-1)
    w = np.take_along_axis(w, order[:, None, :], axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    safe = np.where(sigma > 0, sigma, 1.0)
    u = np.where(sigma[:, None, :] > 0, w / safe[:, None, :], 0.0)

    k = min(m, n)
    u, sigma, v = u[:, :, :k], sigma[:, :k], v[:, :, :k]
    if transposed:
        # a^H = u s v^H  =>  a = v s u^H
        u, v = v, u
    vh = np.conj(np.swapaxes(v, -1, -2))
    return (u.reshape(lead + u.shape[1:]), sigma.reshape(lead + sigma.shape[1:]),
            vh.reshape(lead + vh.shape[1:]))


def jacobi_singular_values(a, tol=1e-15):
    return jacobi_svd(a, tol)[1]


def jacobi_eigh(h, tol=1e-15):
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Returns ``(w, v)`` with eigenvalues ascending and eigenvectors as columns,
    mirroring ``numpy.linalg.eigh``. Only the Hermitian part of ``h`` is used.
    """
    stack, lead = _as_stack(h)
    b, n, n2 = stack.shape
    if n != n2:
        raise ValueError("jacobi_eigh needs square matrices")
    a = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
    scale = np.linalg.norm(a, axis=(-2, -1))
    scale = np.where(scale > 0, scale, 1.0)

    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                g = np.abs(apq)
                active = g > tol * scale
                if not active.any():
                    continue
                rotated = True
                g_safe = np.where(active, g, 1.0)
                phase = np.where(active, apq / g_safe, 1.0)
                tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * g_safe)
                c, s = _rotation(np.where(active, tau, 0.0))
                c = np.where(active, c, 1.0)
                s = np.where(active, s, 0.0)
                # G = D J with D = diag(1, .., e^{-i phi} at q, ..)
                rot = np.broadcast_to(np.eye(n, dtype=np.complex128), (b, n, n)).copy()
                rot[:, p, p] = c
                rot[:, p, q] = s
                rot[:, q, p] = -s * np.conj(phase)
                rot[:, q, q] = c * np.conj(phase)
                a = np.conj(np.swapaxes(rot, -1, -2)) @ a @ rot
                v = v @ rot
        if not rotated:
            break

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(lead + (n,)), v.reshape(lead + (n, n))
