"""Von Neumann's alternating projections on module pairs.

Words in ``P`` and ``Q`` are evaluated fibrewise. Convergence is judged on the
sampled base in two topologies: the norm topology (sup over fibres of the
operator-norm distance to the intersection projection) and the strong
topology, probed through a fixed battery of test sections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .fields import FINITE, MatrixField, VectorSection
from .linalg import adjoint, norms
from .pair import ModulePair

PATTERNS = ("PQ", "QP", "PQP", "QPQ", "alt_end_Q", "alt_end_P")

NORM_CAUCHY = "norm_cauchy"
STRONG_ONLY = "strong_only_fibrewise"
NOT_CAUCHY = "not_cauchy"

DEFAULT_MAX_N = 200
DEFAULT_STOP_TOL = 1e-10
FIT_WINDOW = 10
#: the spectral gap 1 - rate must keep at least this fraction under refinement
GAP_KEEP = 0.5
SANDWICH_SLACK = 1e-12


@dataclass(frozen=True)
class AlternatingWord:
    pattern: str
    n: int

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise InputError(f"unknown word pattern {self.pattern!r}; expected one of {PATTERNS}")
        if int(self.n) < 1:
            raise InputError("word length must be at least 1")


def _mpow(stack, n):
    return np.linalg.matrix_power(stack, int(n))


def word_values(pair: ModulePair, word: AlternatingWord) -> np.ndarray:
    p, q = pair.P.values, pair.Q.values
    n = word.n
    if word.pattern == "PQ":
        return _mpow(pair.pq, n)
    if word.pattern == "QP":
        return _mpow(q @ p, n)
    if word.pattern == "PQP":
        return _mpow(pair.pq @ p, n)
    if word.pattern == "QPQ":
        return _mpow(q @ pair.pq, n)
    # (P,Q)_n: n alternating factors ending in Q
    first, second = (p, q) if word.pattern == "alt_end_Q" else (q, p)
    half = _mpow(first @ second, n // 2)
    return half if n % 2 == 0 else second @ half


def word_field(pair: ModulePair, word: AlternatingWord) -> MatrixField:
    """The fibrewise product for ``word``; powers use repeated squaring."""
    return MatrixField(pair.base, word_values(pair, word))


# -- sections -------------------------------------------------------------------

def default_battery(pair: ModulePair, n_random: int = 8, seed: int = 0) -> list[VectorSection]:
    """Coordinate sections ``e_1..e_d`` plus seeded smooth random sections.

    Random sections are low-order trigonometric polynomials in the normalised
    coordinate, so they restrict consistently to refined grids.
    """
    base, d = pair.base, pair.fiber_dim
    out = [VectorSection.constant(base, np.eye(d)[i]) for i in range(d)]
    if base.kind == FINITE or len(base) < 2:
        s = np.arange(len(base), dtype=float)
    else:
        s = (base.coordinates - base.a) / (base.b - base.a)
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        coef = rng.normal(size=(3, 2, d)) + 1j * rng.normal(size=(3, 2, d))
        vals = sum(np.outer(np.cos(k * math.pi * s), coef[k, 0])
                   + np.outer(np.sin(k * math.pi * s), coef[k, 1]) for k in range(3))
        out.append(VectorSection(base, vals))
    return out


@dataclass
class SectionIterates:
    iterates: np.ndarray          # (max_n + 1, points, d): (PQ)^n x for n = 0..max_n
    deltas: np.ndarray            # sup-norm of (PQ)^n x - (PQ)^(n-1) x, n = 1..max_n
    omega_distances: np.ndarray   # sup-norm of (PQ)^n x - Omega x, n = 0..max_n


def iterate_section(pair: ModulePair, x: VectorSection, max_n: int) -> SectionIterates:
    """Apply ``PQ`` repeatedly to ``x`` and record successive differences."""
    if x.base != pair.base:
        raise InputError("section and pair live over different base spaces")
    if x.fiber_dim != pair.fiber_dim:
        raise InputError(
            f"section has fibre dimension {x.fiber_dim}, pair has {pair.fiber_dim}")
    pq = pair.pq
    cur = np.array(x.values)
    out = [cur]
    for _ in range(int(max_n)):
        cur = np.einsum("nij,nj->ni", pq, cur)
        out.append(cur)
    its = np.stack(out)
    limit = np.einsum("nij,nj->ni", pair.omega.values, x.values)
    deltas = np.linalg.norm(np.diff(its, axis=0), axis=-1).max(axis=-1)
    dist = np.linalg.norm(its - limit[None], axis=-1).max(axis=-1)
    return SectionIterates(its, deltas, dist)


# -- convergence ----------------------------------------------------------------

def fit_rate(distances) -> float:
    """Geometric rate from a least-squares fit of log-distances (last 10 values)."""
    d = np.asarray(distances, dtype=float)
    if d.size == 0 or d[-1] <= 0.0:
        return 0.0
    n = np.arange(1, d.size + 1)[-FIT_WINDOW:]
    tail = np.maximum(d[-FIT_WINDOW:], 1e-300)
    if tail.size < 2:
        return float(tail[0] ** (1.0 / n[0]))
    slope = np.polyfit(n, np.log(tail), 1)[0]
    return float(min(math.exp(slope), 1.0))


def _norm_distances(pair: ModulePair, max_n: int, stop_tol: float, pattern: str = "PQP"):
    step = word_values(pair, AlternatingWord(pattern, 1))
    omega = pair.omega.values
    cur = step
    out = []
    for n in range(1, int(max_n) + 1):
        if n > 1:
            cur = cur @ step
        out.append(float(norms(cur - omega).max()))
        if out[-1] < stop_tol:
            break
    return np.array(out)


def _battery_distances(pair: ModulePair, battery, max_n: int):
    """Sup distances ``|(PQ)^n x - Ω x|`` (rows: sections) and successive deltas."""
    xs = np.stack([x.values for x in battery])
    limit = np.einsum("nij,snj->sni", pair.omega.values, xs)
    cur = xs
    dist, deltas = [], []
    for _ in range(int(max_n)):
        nxt = np.einsum("nij,snj->sni", pair.pq, cur)
        deltas.append(np.linalg.norm(nxt - cur, axis=-1).max(axis=-1))
        dist.append(np.linalg.norm(nxt - limit, axis=-1).max(axis=-1))
        cur = nxt
    return np.array(dist).T, np.array(deltas).T


def _section_gaps(pair: ModulePair, max_n: int, stop_tol: float, battery_seed: int):
    dist, _ = _battery_distances(pair, default_battery(pair, seed=battery_seed), max_n)
    gaps = []
    for e in dist:
        hit = np.flatnonzero(e < stop_tol)
        gaps.append(1.0 - fit_rate(e[: hit[0] + 1] if hit.size else e))
    return gaps


@dataclass
class LevelSummary:
    points: int
    rate: float
    gap: float
    reached: bool


def _level(pair: ModulePair, max_n: int, stop_tol: float, dist=None) -> LevelSummary:
    dist = _norm_distances(pair, max_n, stop_tol) if dist is None else dist
    rate = fit_rate(dist)
    return LevelSummary(len(pair), rate, 1.0 - rate, bool(dist[-1] < stop_tol))


def refinement_chain(pair: ModulePair, rounds: int = 1) -> list[ModulePair]:
    """Pairs of increasing resolution ending at or starting from ``pair``.

    Closed-form pairs are refined exactly. Sampled interval pairs fall back to
    the coarsened grids obtained by dropping every other point. Pairs on a
    finite base have no refinement and yield ``[pair]``.
    """
    if pair.is_refinable:
        chain = [pair]
        for _ in range(rounds):
            chain.append(chain[-1].refined(2))
        return chain
    if pair.base.kind == FINITE or len(pair) < 3:
        return [pair]
    chain = [pair]
    idx = np.arange(len(pair))
    for _ in range(rounds):
        if len(idx) < 5 or (len(idx) - 1) % 2:
            break
        idx = idx[::2]
        chain.insert(0, pair.restrict(idx))
    return chain


def gap_collapses(coarse: float, fine: float) -> bool:
    """True when the gap to 1 shrinks by at least half under refinement."""
    return coarse > 0 and fine < GAP_KEEP * coarse


@dataclass
class ConvergenceReport:
    distances: list
    section_deltas: list
    rate_estimate: float
    verdict: str
    iterations_used: int
    angle_squared: float = 0.0
    levels: list = field(default_factory=list)
    battery_size: int = 0

    def as_dict(self) -> dict:
        return {
            "distances": list(self.distances),
            "section_deltas": list(self.section_deltas),
            "rate_estimate": self.rate_estimate,
            "angle_squared": self.angle_squared,
            "verdict": self.verdict,
            "iterations_used": self.iterations_used,
            "battery_size": self.battery_size,
            "levels": [{"points": lv.points, "rate": lv.rate, "gap": lv.gap,
                        "reached_stop_tol": lv.reached} for lv in self.levels],
        }


def convergence_report(pair: ModulePair, max_n: int = DEFAULT_MAX_N,
                       stop_tol: float = DEFAULT_STOP_TOL, battery_seed: int = 0) -> ConvergenceReport:
    """Distances of ``(PQP)^n`` to the intersection field, with a grid-level verdict.

    The iteration stops once the sup distance drops below ``stop_tol``. The
    verdict compares the fitted geometric rate on the pair's grid and one
    refinement: a spectral gap ``1 - rate`` that collapses under refinement
    means the module iteration is not norm-Cauchy; if the section battery
    still converges uniformly the verdict is ``strong_only_fibrewise``.
    """
    if max_n < 4:
        raise InputError("max_n must be at least 4")
    dist = _norm_distances(pair, max_n, stop_tol)
    battery = default_battery(pair, seed=battery_seed)
    _, deltas = _battery_distances(pair, battery, len(dist))
    sec_deltas = deltas.max(axis=0)
    rate = fit_rate(dist)
    angle = float(norms(pair.pq - pair.omega.values).max())

    chain = refinement_chain(pair, 1)
    levels = [_level(p, max_n, stop_tol, dist if p is pair else None) for p in chain]
    if len(levels) == 1:
        verdict = NORM_CAUCHY if levels[0].gap > 0 or levels[0].reached else NOT_CAUCHY
    else:
        coarse, fine = levels[0], levels[-1]
        if not gap_collapses(coarse.gap, fine.gap) and fine.gap > 0:
            verdict = NORM_CAUCHY
        else:
            lo = _section_gaps(chain[0], max_n, stop_tol, battery_seed)
            hi = _section_gaps(chain[-1], max_n, stop_tol, battery_seed)
            if any(gap_collapses(a, b) or b <= 0 for a, b in zip(lo, hi)):
                verdict = NOT_CAUCHY
            else:
                verdict = STRONG_ONLY
    return ConvergenceReport(dist.tolist(), sec_deltas.tolist(), rate, verdict, len(dist),
                             angle * angle, levels, len(battery))


# -- identities -----------------------------------------------------------------

CORRECTED_IDENTITIES = ("PQ", "QP", "PQP", "QPQ")


@dataclass
class PowerIdentityTable:
    k_max: int
    corrected: dict        # word -> sup residual of (W - Omega)^k - (W^k - Omega), per k
    printed: dict          # "PQ~PQP", "QP~QPQ" -> sup residual of the printed pairing, per k

    @property
    def max_corrected(self) -> float:
        return max(float(np.max(v)) for v in self.corrected.values())

    @property
    def max_printed(self) -> float:
        return max(float(np.max(v)) for v in self.printed.values())


def check_power_identity(pair: ModulePair, k_max: int) -> PowerIdentityTable:
    """Residuals of ``(W - Ω)^k = W^k - Ω`` for the four basic words, ``k <= k_max``.

    Also records the residual of pairing ``(PQ - Ω)^k`` with ``(PQP)^k - Ω``
    (and ``(QP - Ω)^k`` with ``(QPQ)^k - Ω``), which does not hold in general.
    """
    omega = pair.omega.values
    words = {w: word_values(pair, AlternatingWord(w, 1)) for w in CORRECTED_IDENTITIES}
    corrected = {w: np.zeros(k_max) for w in words}
    printed = {"PQ~PQP": np.zeros(k_max), "QP~QPQ": np.zeros(k_max)}
    for k in range(1, k_max + 1):
        lhs = {w: _mpow(m - omega, k) for w, m in words.items()}
        rhs = {w: _mpow(m, k) - omega for w, m in words.items()}
        for w in words:
            corrected[w][k - 1] = norms(lhs[w] - rhs[w]).max()
        printed["PQ~PQP"][k - 1] = norms(lhs["PQ"] - rhs["PQP"]).max()
        printed["QP~QPQ"][k - 1] = norms(lhs["QP"] - rhs["QPQ"]).max()
    return PowerIdentityTable(k_max, corrected, printed)


@dataclass
class SandwichTable:
    pq_norms: np.ndarray     # (n_max + 1, points): |(PQ)^n x| for n = 1..n_max+1
    qpq_norms: np.ndarray    # (n_max, points): |(QPQ)^n x| for n = 1..n_max
    violations: int
    worst_excess: float

    @property
    def holds(self) -> bool:
        return self.violations == 0


def check_sandwich(pair: ModulePair, x: VectorSection, n_max: int) -> SandwichTable:
    """Check ``|(PQ)^n x| >= |(QPQ)^n x| >= |(PQ)^(n+1) x|`` fibrewise for ``n <= n_max``."""
    it = iterate_section(pair, x, n_max + 1)
    q = pair.Q.values
    a = np.linalg.norm(it.iterates[1:], axis=-1)
    qpq = np.einsum("nij,knj->kni", q, it.iterates[1:n_max + 1])
    b = np.linalg.norm(qpq, axis=-1)
    excess = np.maximum(b - a[:-1], a[1:] - b)
    worst = float(excess.max()) if excess.size else 0.0
    return SandwichTable(a, b, int(np.sum(excess > SANDWICH_SLACK)), worst)


def adjoint_pair_residual(pair: ModulePair, n: int) -> float:
    """``max |word(PQ, n)^* - word(QP, n)|`` over fibres."""
    a = word_values(pair, AlternatingWord("PQ", n))
    b = word_values(pair, AlternatingWord("QP", n))
    return float(np.abs(adjoint(a) - b).max())
