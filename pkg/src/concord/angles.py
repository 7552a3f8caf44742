"""Friedrichs angles as functions on the base and the concordance verdict.

The local cosine at ``y`` is ``|P(y)Q(y) - Ω(y)|`` with ``Ω(y)`` the projection
onto ``M_y ∩ N_y``. A pair is concordant exactly when these fibre
intersections assemble into a complemented submodule; on a sampled interval
that is judged from the intersection rank profile, the continuity of the
intersection field and the behaviour of the sup cosine under refinement.
All verdicts are grid-certified evidence, never proofs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .alternating import (NORM_CAUCHY, NOT_CAUCHY, STRONG_ONLY, ConvergenceReport,
                          convergence_report, gap_collapses, refinement_chain)
from .fields import FINITE, INTERVAL, lipschitz_estimate
from .linalg import norms
from .pair import ModulePair

CONCORDANT = "concordant"
DISCORDANT = "discordant"
UNDECIDED = "undecided"

DISCORDANT_OVERRIDE = "discordant override"
GRID_SUP = "grid sup"
LOWER_BOUND = "undecided, lower bound only"

JUMP_FACTOR = 10.0
JUMP_FLOOR = 1e-6
#: Lipschitz ratios (fine / coarse) of the intersection field
LIP_STABLE = 1.5
LIP_BROKEN = 1.8
LIP_FLOOR = 1e-6
MAX_ROUNDS = 3


def local_angles(pair: ModulePair) -> np.ndarray:
    """Cosine of the local Friedrichs angle at every base point."""
    return np.clip(norms(pair.pq - pair.omega.values), 0.0, 1.0)


def local_angle(pair: ModulePair, y) -> float:
    i = pair.base.index(y)
    return float(local_angles(pair)[i])


def field_modulus(pair: ModulePair) -> float:
    return max(pair.P.field.modulus(), pair.Q.field.modulus())


@dataclass
class AngleProfile:
    coords: np.ndarray
    labels: tuple
    cosines: np.ndarray
    grid_sup: float
    refinement_trend: list = field(default_factory=list)
    discontinuity_points: list = field(default_factory=list)
    lsc_violations: list = field(default_factory=list)
    jump_threshold: float = JUMP_FLOOR
    kind: str = INTERVAL
    intersection_ranks: np.ndarray | None = None
    pq_norms: np.ndarray | None = None
    refined: "AngleProfile | None" = None

    @classmethod
    def from_values(cls, coords, cosines, jump_threshold=JUMP_FLOOR, labels=None):
        """Profile from raw values, for scanning data that did not come from a pair."""
        cosines = np.asarray(cosines, dtype=float)
        coords = np.asarray(coords, dtype=float)
        labels = tuple(labels) if labels is not None else tuple(f"y{i}" for i in range(len(coords)))
        return cls(coords, labels, cosines, float(cosines.max()), [float(cosines.max())],
                   jump_threshold=jump_threshold)

    def rows(self):
        blank = [None] * len(self.coords)
        ranks = blank if self.intersection_ranks is None else self.intersection_ranks
        pqn = blank if self.pq_norms is None else self.pq_norms
        for lab, c, v, r, p in zip(self.labels, self.coords, self.cosines, ranks, pqn):
            yield lab, float(c), float(v), (None if r is None else int(r)), (None if p is None else float(p))

    def as_dict(self) -> dict:
        return {
            "grid_sup": self.grid_sup,
            "refinement_trend": list(self.refinement_trend),
            "jump_threshold": self.jump_threshold,
            "discontinuity_points": [list(x) for x in self.discontinuity_points],
            "lsc_violations": list(self.lsc_violations),
            "points": [{"label": lab, "coordinate": c, "c_local": v, "intersection_rank": r,
                        "pq_norm": p} for lab, c, v, r, p in self.rows()],
        }


def _profile_of(pair: ModulePair) -> AngleProfile:
    cos = local_angles(pair)
    thr = max(JUMP_FACTOR * field_modulus(pair), JUMP_FLOOR)
    return AngleProfile(pair.base.coordinates, pair.base.labels, cos, float(cos.max()),
                        [float(cos.max())], jump_threshold=thr, kind=pair.base.kind,
                        intersection_ranks=np.array(pair.omega_ranks),
                        pq_norms=norms(pair.pq))


def angle_profile(pair: ModulePair, rounds: int = 2) -> AngleProfile:
    """Local cosines on the pair's grid, their sup trend under refinement and a scan."""
    chain = refinement_chain(pair, rounds)
    profiles = [_profile_of(p) for p in chain]
    mine = chain.index(pair)
    prof = profiles[mine]
    prof.refinement_trend = [p.grid_sup for p in profiles]
    if mine + 1 < len(profiles):
        prof.refined = profiles[mine + 1]
    scan = semicontinuity_scan(prof)
    prof.discontinuity_points = scan.discontinuities
    prof.lsc_violations = scan.lsc_violations
    return prof


@dataclass
class ScanResult:
    discontinuities: list      # (coordinate, jump size)
    lsc_violations: list       # coordinates
    threshold: float


def _raw_scan(c: np.ndarray, thr: float):
    n = len(c)
    if n < 2:
        return [], []
    jumps = np.abs(np.diff(c))
    big = jumps > thr
    left = np.concatenate([[True], big])     # jump towards the left neighbour (or none)
    right = np.concatenate([big, [True]])
    isolated = left & right & ~((np.arange(n) == 0) & (np.arange(n) == n - 1))
    disc = {}
    for i in np.flatnonzero(big):
        j = i if isolated[i] else (i + 1 if isolated[i + 1] else i)
        size = max(jumps[j - 1] if j > 0 else 0.0, jumps[j] if j < n - 1 else 0.0)
        disc[int(j)] = float(size)
    lsc = []
    for i in range(n):
        nbrs = [k for k in (i - 1, i + 1) if 0 <= k < n and not (isolated[k] and k in disc)]
        if nbrs and c[i] > min(c[k] for k in nbrs) + thr:
            lsc.append(i)
    return sorted(disc.items()), lsc


def semicontinuity_scan(profile: AngleProfile) -> ScanResult:
    """List jumps of the cosine profile and points violating lower semicontinuity.

    A jump counts when it exceeds the profile's threshold (ten times the
    continuity modulus of the input fields). When a refined profile is
    attached, a finding is kept only if it recurs at the same coordinate.
    """
    if profile.kind == FINITE:
        return ScanResult([], [], profile.jump_threshold)
    disc, lsc = _raw_scan(profile.cosines, profile.jump_threshold)
    ref = profile.refined
    if ref is not None:
        rdisc, rlsc = _raw_scan(ref.cosines, ref.jump_threshold)
        rdisc_at = {int(np.argmin(np.abs(ref.coords - ref.coords[i]))) for i, _ in rdisc}

        def near(i, found):
            j = int(np.argmin(np.abs(ref.coords - profile.coords[i])))
            return j in found

        disc = [(i, s) for i, s in disc if near(i, rdisc_at)]
        lsc = [i for i in lsc if near(i, set(rlsc))]
    return ScanResult([(float(profile.coords[i]), s) for i, s in disc],
                      [float(profile.coords[i]) for i in lsc], profile.jump_threshold)


# -- concordance ------------------------------------------------------------------

@dataclass
class Witness:
    index: int
    label: str
    coordinate: float
    kind: str
    detail: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class _Level:
    pair: ModulePair
    ranks: np.ndarray
    rank_jump: Witness | None
    lipschitz: float
    gap: float


def _rank_jump(pair: ModulePair) -> Witness | None:
    r = pair.omega_ranks
    edges = np.flatnonzero(np.diff(r) != 0)
    if not edges.size:
        return None
    i = int(edges[0])
    j = i if r[i] > r[i + 1] else i + 1
    lo = min(r[i], r[i + 1])
    return Witness(j, pair.base.labels[j], float(pair.base.coords[j]), "rank jump",
                   f"rank {int(r[j])} vs {int(lo)}")


def _level(pair: ModulePair) -> _Level:
    return _Level(pair, np.array(pair.omega_ranks), _rank_jump(pair),
                  lipschitz_estimate(pair.omega), 1.0 - float(local_angles(pair).max()))


def _classify(a: _Level, b: _Level):
    """Judge one refinement step; returns (status or None, witness, reason)."""
    if a.rank_jump and b.rank_jump:
        return DISCORDANT, b.rank_jump, "intersection rank jump persists under refinement"
    if a.rank_jump or b.rank_jump:
        return None, None, "rank jump seen at one resolution only"
    ratio = (b.lipschitz + LIP_FLOOR) / (a.lipschitz + LIP_FLOOR)
    if ratio >= LIP_BROKEN:
        i = int(np.argmax(norms(np.diff(b.pair.omega.values, axis=0))))
        w = Witness(i, b.pair.base.labels[i], float(b.pair.base.coords[i]), "continuity",
                    f"intersection field Lipschitz estimate grows x{ratio:.2f}")
        return DISCORDANT, w, "intersection field fails the continuity proxy"
    if gap_collapses(a.gap, b.gap) or b.gap <= 0:
        i = int(np.argmax(local_angles(b.pair)))
        w = Witness(i, b.pair.base.labels[i], float(b.pair.base.coords[i]), "angle collapse",
                    f"1 - sup cosine shrinks {a.gap:.3g} -> {b.gap:.3g}")
        return DISCORDANT, w, "sup cosine tends to 1 under refinement"
    if ratio <= LIP_STABLE:
        return CONCORDANT, None, "rank constant, intersection field continuous, angle stable"
    return None, None, f"intersection field Lipschitz ratio {ratio:.2f} inconclusive"


@dataclass
class ConcordanceVerdict:
    status: str
    witness: Witness | None
    evidence: dict

    def __post_init__(self):
        if self.status == DISCORDANT and self.witness is None:
            raise ValueError("a discordant verdict needs a witness")

    def as_dict(self) -> dict:
        return {"status": self.status, "certification": "grid-certified",
                "witness": self.witness.as_dict() if self.witness else None,
                "evidence": self.evidence}


def _transitions(pair: ModulePair):
    """(coarse, fine) level pairs, starting at the pair's own resolution."""
    if pair.is_refinable:
        a = _level(pair)
        for _ in range(MAX_ROUNDS):
            b = _level(a.pair.refined(2))
            yield a, b
            a = b
    else:
        levels = [_level(p) for p in reversed(refinement_chain(pair, MAX_ROUNDS))]
        for fine, coarse in zip(levels, levels[1:]):
            yield coarse, fine


def _consistent(status: str, conv: str) -> bool:
    if status == CONCORDANT:
        return conv in (NORM_CAUCHY, STRONG_ONLY)
    if status == DISCORDANT:
        return conv == NOT_CAUCHY
    return True


def concordance_verdict(pair: ModulePair, convergence: ConvergenceReport | None = None,
                        cross_check: bool = True) -> ConcordanceVerdict:
    """Grid-certified concordance verdict with a witness for discordance.

    The verdict is cross-checked against :func:`convergence_report`; a
    disagreement downgrades it to ``undecided``.
    """
    evidence = {"rank_profile": np.asarray(pair.omega_ranks).tolist(), "levels": [],
                "assumptions": ["module is full"]}
    if pair.base.kind == FINITE:
        status, witness, reason = CONCORDANT, None, "finite discrete base: every fibre splits"
    else:
        status, witness, reason = UNDECIDED, None, "no refinement available"
        seen = set()
        for a, b in _transitions(pair):
            for lv in (a, b):
                if id(lv) not in seen:
                    seen.add(id(lv))
                    evidence["levels"].append({
                        "points": len(lv.pair), "rank_constant": lv.rank_jump is None,
                        "omega_lipschitz": lv.lipschitz, "angle_gap": lv.gap})
            status, witness, reason = _classify(a, b)
            if status is not None:
                break
            status = UNDECIDED
        if witness is not None and witness.kind == "rank jump":
            own = _rank_jump(pair)
            witness = own or witness
    evidence["reason"] = reason

    if cross_check:
        conv = convergence or convergence_report(pair)
        evidence["iteration_verdict"] = conv.verdict
        if not _consistent(status, conv.verdict):
            evidence["reason"] = (f"{reason}; contradicted by iteration verdict {conv.verdict}")
            status, witness = UNDECIDED, None
    return ConcordanceVerdict(status, witness, evidence)


class GlobalAngle(NamedTuple):
    value: float
    provenance: str
    refinement_trend: list


def global_angle(pair: ModulePair, verdict: ConcordanceVerdict | None = None,
                 profile: AngleProfile | None = None) -> GlobalAngle:
    """Cosine of the Friedrichs angle of the module pair.

    A discordant pair has cosine exactly 1; otherwise the grid sup of the
    local cosines is returned, flagged as a lower bound when undecided.
    """
    verdict = verdict or concordance_verdict(pair)
    profile = profile or angle_profile(pair, rounds=1)
    if verdict.status == DISCORDANT:
        return GlobalAngle(1.0, DISCORDANT_OVERRIDE, profile.refinement_trend)
    prov = GRID_SUP if verdict.status == CONCORDANT else LOWER_BOUND
    return GlobalAngle(profile.grid_sup, prov, profile.refinement_trend)


def symmetry_check(pair: ModulePair):
    """``(c(M, N), c(M^perp, N^perp), |difference|)``."""
    c = global_angle(pair).value
    c_perp = global_angle(pair.perp()).value
    return c, c_perp, abs(c - c_perp)


def harmonious(pair: ModulePair) -> dict:
    """Concordance of ``(M,N)``, ``(M,N^perp)``, ``(M^perp,N)``, ``(M^perp,N^perp)``."""
    pc, qc = pair.P.complement(), pair.Q.complement()
    combos = {"M,N": pair, "M,N_perp": pair.with_fields(pair.P, qc),
              "M_perp,N": pair.with_fields(pc, pair.Q), "M_perp,N_perp": pair.perp()}
    verdicts = {k: concordance_verdict(v) for k, v in combos.items()}
    statuses = {k: v.status for k, v in verdicts.items()}
    if all(s == CONCORDANT for s in statuses.values()):
        overall = True
    elif any(s == DISCORDANT for s in statuses.values()):
        overall = False
    else:
        overall = None
    return {"harmonious": overall, "pairs": {k: v.as_dict() for k, v in verdicts.items()}}
