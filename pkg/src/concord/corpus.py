"""Built-in example pairs and seeded random generators.

Every generator returns a :class:`~concord.pair.ModulePair` whose fields carry
a closed-form tag, so that they can be re-evaluated exactly on refined grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError
from .fields import INTERVAL, BaseSpace, ClosedForm, MatrixField, register_family
from .linalg import DEFAULT_TOL, ToleranceConfig
from .pair import ModulePair

HALF_PI = math.pi / 2


def _pair_from_family(base: BaseSpace, name: str, params: dict, tol: ToleranceConfig,
                      meta: dict) -> ModulePair:
    p = MatrixField.from_closed_form(base, ClosedForm(name, params, "P"))
    q = MatrixField.from_closed_form(base, ClosedForm(name, params, "Q"))
    meta = {"family": name, "params": dict(params), **meta}
    return ModulePair(p, q, tol, meta)


# -- the universal two-projection model ---------------------------------------

@register_family("universal")
def _universal(t, params):
    n = len(t)
    p = np.zeros((n, 2, 2), dtype=np.complex128)
    p[:, 0, 0] = 1.0
    c, s = np.cos(t), np.sin(t)
    q = np.empty((n, 2, 2), dtype=np.complex128)
    q[:, 0, 0] = c * c
    q[:, 0, 1] = q[:, 1, 0] = s * c
    q[:, 1, 1] = s * s
    return p, q


def universal_pair(base: BaseSpace | None = None, tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    """``P = diag(1, 0)`` and ``Q(t)`` the projection onto ``(cos t, sin t)``.

    The base must be an interval grid inside ``[0, pi/2]``.
    """
    base = base or BaseSpace.interval(0.0, HALF_PI)
    if base.kind != INTERVAL:
        raise InputError("the universal pair lives on an interval base")
    eps = 1e-12
    if base.coords[0] < -eps or base.coords[-1] > HALF_PI + eps:
        raise InputError(f"interval [{base.coords[0]}, {base.coords[-1]}] is not inside [0, pi/2]")
    full = abs(base.coords[0]) <= eps and abs(base.coords[-1] - HALF_PI) <= eps
    pair = _pair_from_family(base, "universal", {}, tol, {"name": "universal"})
    if full:
        ends = [pair.Q.values[0], pair.Q.values[-1], pair.P.values[0]]
        diagonal = all(abs(m[0, 1]) < 1e-15 and abs(m[1, 0]) < 1e-15 for m in ends)
        pair.meta["endpoint_diagonal"] = diagonal
    return pair


# -- two lines at a fixed angle -------------------------------------------------

@register_family("constant-angle")
def _constant_angle(t, params):
    theta = float(params["theta"])
    d = int(params.get("dim", 2))
    e1 = np.zeros(d, dtype=np.complex128)
    e1[0] = 1.0
    v = np.zeros(d, dtype=np.complex128)
    v[0], v[1] = math.cos(theta), math.sin(theta)
    n = len(t)
    p = np.broadcast_to(np.outer(e1, e1), (n, d, d))
    q = np.broadcast_to(np.outer(v, v.conj()), (n, d, d))
    return p, q


def constant_angle_pair(theta: float, dim: int = 2, base: BaseSpace | None = None,
                        tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    """Lines ``span(e1)`` and ``span(cos θ e1 + sin θ e2)``, constant over the base."""
    theta = float(theta)
    if dim < 2:
        raise InputError("constant_angle_pair needs ambient dimension >= 2")
    if theta == 0.0:
        raise InputError("theta = 0 makes P = Q; build that pair directly")
    if not 0.0 < theta <= HALF_PI + 1e-15:
        raise InputError(f"theta must lie in (0, pi/2], got {theta}")
    base = base or BaseSpace.interval(0.0, 1.0)
    return _pair_from_family(base, "constant-angle", {"theta": theta, "dim": int(dim)}, tol,
                             {"name": "constant-angle"})


# -- coinciding projections -----------------------------------------------------

@register_family("equal")
def _equal(t, params):
    d, r = int(params["dim"]), int(params["rank"])
    p = np.zeros((d, d), dtype=np.complex128)
    p[np.arange(r), np.arange(r)] = 1.0
    stack = np.broadcast_to(p, (len(t), d, d))
    return stack, stack


def equal_pair(dim: int = 2, rank: int | None = None, base: BaseSpace | None = None,
               tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    """``P = Q`` projecting onto the first ``rank`` coordinates (identity by default)."""
    rank = dim if rank is None else rank
    if not 0 <= rank <= dim:
        raise InputError("rank must lie in [0, dim]")
    base = base or BaseSpace.interval(0.0, 1.0)
    return _pair_from_family(base, "equal", {"dim": int(dim), "rank": int(rank)}, tol,
                             {"name": "identity" if rank == dim else "equal"})


# -- seeded random pairs --------------------------------------------------------

def _unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _orthonormal(rng, rows, cols):
    z = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    return np.linalg.qr(z)[0]


@register_family("random")
def _random(t, params):
    seed = int(params["seed"])
    d, rp, rq, k = (int(params[x]) for x in ("dim", "rank_p", "rank_q", "shared"))
    amp = float(params.get("smoothness", 0.0))
    rng = np.random.default_rng(seed)

    u0 = _unitary(rng, d)
    shared, p_only, rest = u0[:, :k], u0[:, k:rp], u0[:, rp:]
    m = rq - k
    a0 = rng.normal(size=(rp - k, m)) + 1j * rng.normal(size=(rp - k, m))
    if a0.size:
        a0 *= 0.8 / max(np.linalg.norm(a0, 2), 1e-300)
    b0 = _orthonormal(rng, d - rp, m) if m else np.zeros((d - rp, 0))
    beta = rng.uniform(0.5, 1.0, size=m)
    omega = rng.uniform(0.5, 2.0, size=m + 1)
    phase = rng.uniform(0.0, 2 * math.pi, size=m + 1)
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = h + h.conj().T
    h /= np.linalg.norm(h, 2)
    lam, vec = np.linalg.eigh(h)

    n = len(t)
    tt = t[:, None]
    # amplitudes stay in [0.7, 1.3] for smoothness <= 1, so B(t) keeps full column rank
    wob = 1.0 + 0.3 * min(amp, 1.0) * np.sin(omega * tt + phase)
    a_t = a0[None] * wob[:, :1, None] if a0.size else np.zeros((n, rp - k, m))
    b_t = b0[None] * (beta * wob[:, 1:])[:, None, :]
    extras = p_only[None] @ a_t + rest[None] @ b_t
    q_basis = np.concatenate([np.broadcast_to(shared, (n, d, k)), extras], axis=-1)
    if q_basis.shape[-1]:
        q_basis = np.linalg.qr(q_basis)[0]
    p_basis = u0[:, :rp]
    p0 = p_basis @ p_basis.conj().T
    q_t = q_basis @ np.conj(np.swapaxes(q_basis, -1, -2))

    rot = vec[None] * np.exp(1j * amp * tt * lam[None])[:, None, :] @ vec.conj().T[None]
    rot_h = np.conj(np.swapaxes(rot, -1, -2))
    p_t = rot @ p0[None] @ rot_h
    q_t = rot @ q_t @ rot_h
    # remove rounding asymmetry
    p_t = 0.5 * (p_t + np.conj(np.swapaxes(p_t, -1, -2)))
    q_t = 0.5 * (q_t + np.conj(np.swapaxes(q_t, -1, -2)))
    return p_t, q_t


def random_pair(seed: int, dim: int, rank_p: int, rank_q: int, shared: int = 0,
                base: BaseSpace | None = None, smoothness: float = 0.0,
                tol: ToleranceConfig = DEFAULT_TOL) -> ModulePair:
    """Seeded pair whose intersection has dimension ``shared`` at every fibre.

    A shared ``shared``-dimensional subspace is completed by independent
    directions; with ``smoothness > 0`` the non-shared directions wobble and
    the whole configuration rotates along the base by a seeded unitary path.
    The cosine of the Friedrichs angle stays below about 0.95.
    """
    if dim < 1 or not (0 <= shared <= min(rank_p, rank_q)):
        raise InputError("need 0 <= shared <= min(rank_p, rank_q)")
    if rank_p > dim or rank_q > dim or rank_p + rank_q - shared > dim:
        raise InputError(
            f"ranks {rank_p}, {rank_q} with {shared} shared do not fit in dimension {dim}")
    if smoothness < 0:
        raise InputError("smoothness must be nonnegative")
    base = base or BaseSpace.interval(0.0, 1.0, 33)
    params = {"seed": int(seed), "dim": int(dim), "rank_p": int(rank_p), "rank_q": int(rank_q),
              "shared": int(shared), "smoothness": float(smoothness)}
    return _pair_from_family(base, "random", params, tol, {"name": "random"})


def random_battery_params(count: int = 100, first_seed: int = 0):
    """Deterministic parameter sets for fuzzing: dims 2-6, constant and smooth."""
    out = []
    for i in range(count):
        rng = np.random.default_rng(10_000 + first_seed + i)
        d = 2 + i % 5
        rp = int(rng.integers(1, d + 1))
        rq = int(rng.integers(1, d + 1))
        lo = max(0, rp + rq - d)
        k = int(rng.integers(lo, min(rp, rq) + 1))
        out.append({"seed": first_seed + i, "dim": d, "rank_p": rp, "rank_q": rq,
                    "shared": k, "smoothness": 0.0 if i % 2 == 0 else 1.0})
    return out


# -- registry -------------------------------------------------------------------

@dataclass
class CorpusEntry:
    name: str
    description: str
    build: Callable[..., ModulePair]
    expected: dict = field(default_factory=dict)
    basis: dict = field(default_factory=dict)


def _universal_entry(grid=257, tol=DEFAULT_TOL, a=0.0, b=HALF_PI, **_):
    return universal_pair(BaseSpace.interval(a, b, grid), tol)


def _restricted_entry(grid=257, tol=DEFAULT_TOL, **_):
    pair = universal_pair(BaseSpace.interval(math.pi / 6, HALF_PI, grid), tol)
    pair.meta["name"] = "universal-restricted"
    return pair


def _zero_intersection_entry(grid=257, tol=DEFAULT_TOL, **_):
    pair = universal_pair(BaseSpace.interval(0.0, HALF_PI, grid), tol)
    pair.meta["name"] = "zero-intersection"
    return pair


def _finite_entry(tol=DEFAULT_TOL, **_):
    labels = ["0", "pi/6", "pi/4", "pi/3", "pi/2"]
    ts = [0.0, math.pi / 6, math.pi / 4, math.pi / 3, HALF_PI]
    base = BaseSpace.finite(labels)
    p, q = _universal(np.asarray(ts), {})
    pair = ModulePair(MatrixField(base, p), MatrixField(base, q), tol,
                      {"name": "universal-finite", "points": ts})
    return pair


def _constant_entry(grid=33, tol=DEFAULT_TOL, theta=math.pi / 3, dim=2, **_):
    return constant_angle_pair(theta, dim, BaseSpace.interval(0.0, 1.0, grid), tol)


def _orthogonal_entry(grid=33, tol=DEFAULT_TOL, **_):
    pair = constant_angle_pair(HALF_PI, 2, BaseSpace.interval(0.0, 1.0, grid), tol)
    pair.meta["name"] = "orthogonal-lines"
    return pair


def _identity_entry(grid=33, tol=DEFAULT_TOL, dim=2, **_):
    return equal_pair(dim, None, BaseSpace.interval(0.0, 1.0, grid), tol)


def _equal_entry(grid=33, tol=DEFAULT_TOL, dim=3, rank=1, **_):
    return equal_pair(dim, rank, BaseSpace.interval(0.0, 1.0, grid), tol)


def _random_entry(grid=33, tol=DEFAULT_TOL, seed=42, dim=5, rank_p=2, rank_q=2, shared=1,
                  smoothness=0.5, **_):
    return random_pair(seed, dim, rank_p, rank_q, shared,
                       BaseSpace.interval(0.0, 1.0, grid), smoothness, tol)


CORPUS: dict[str, CorpusEntry] = {e.name: e for e in [
    CorpusEntry(
        "universal", "universal two-projection model over [0, pi/2]", _universal_entry,
        {"verdict": "discordant", "global_angle": 1.0, "witness": 0.0, "angle_law": "abs_cos",
         "equivalence": False},
        {"verdict": "intersection rank drops from 1 to 0 off t = 0",
         "global_angle": "discordant pairs have cosine 1", "angle_law": "closed form |cos t|",
         "equivalence": "all conditions fail together"}),
    CorpusEntry(
        "universal-restricted", "universal model restricted to [pi/6, pi/2]", _restricted_entry,
        {"verdict": "concordant", "global_angle": math.cos(math.pi / 6), "angle_law": "abs_cos",
         "equivalence": True},
        {"verdict": "intersection is 0 on the whole interval",
         "global_angle": "|cos t| is largest at t = pi/6", "angle_law": "closed form |cos t|",
         "equivalence": "all conditions hold together"}),
    CorpusEntry(
        "zero-intersection", "module intersection is 0 (complemented), yet the pair is discordant",
        _zero_intersection_entry,
        {"verdict": "discordant", "global_angle": 1.0, "witness": 0.0, "equivalence": False},
        {"verdict": "same fields as the universal model",
         "global_angle": "discordant pairs have cosine 1",
         "equivalence": "all conditions fail together"}),
    CorpusEntry(
        "universal-finite", "universal model sampled on five discrete points", _finite_entry,
        {"verdict": "concordant", "global_angle": math.cos(math.pi / 6), "equivalence": True},
        {"verdict": "a finite discrete base splits every fibre",
         "global_angle": "largest cosine among the sampled points",
         "equivalence": "all conditions hold together"}),
    CorpusEntry(
        "constant-angle", "two lines at a fixed angle theta (default pi/3)", _constant_entry,
        {"verdict": "concordant", "global_angle": 0.5, "equivalence": True},
        {"verdict": "constant fields", "global_angle": "cos(pi/3)",
         "equivalence": "all margins equal 1 - cos(theta) or more"}),
    CorpusEntry(
        "orthogonal-lines", "two orthogonal lines, PQ = 0", _orthogonal_entry,
        {"verdict": "concordant", "global_angle": 0.0, "equivalence": True},
        {"verdict": "constant fields", "global_angle": "immediate", "equivalence": "immediate"}),
    CorpusEntry(
        "identity", "P = Q = 1", _identity_entry,
        {"verdict": "concordant", "global_angle": 0.0, "equivalence": True},
        {"verdict": "constant fields", "global_angle": "immediate", "equivalence": "immediate"}),
    CorpusEntry(
        "equal", "P = Q of rank 1 in C^3", _equal_entry,
        {"verdict": "concordant", "global_angle": 0.0, "equivalence": True},
        {"verdict": "constant fields", "global_angle": "immediate", "equivalence": "immediate"}),
    CorpusEntry(
        "random", "seeded random pair with a shared subspace", _random_entry,
        {"verdict": "concordant", "equivalence": True},
        {"verdict": "intersection dimension fixed by construction",
         "equivalence": "constant rank and smooth rotation"}),
]}


def corpus_pair(name: str, **params) -> ModulePair:
    try:
        entry = CORPUS[name]
    except KeyError:
        raise InputError(f"unknown corpus entry {name!r}; try one of {sorted(CORPUS)}") from None
    return entry.build(**params)
