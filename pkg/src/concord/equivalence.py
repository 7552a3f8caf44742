"""Ten closed-range conditions for a module pair, evaluated side by side.

For a pair of complemented submodules the following are equivalent, and
each entry below encodes one of them as a fibre-infimum margin:

1. ``c(M, N) < 1``
2. ``(P Q)^n`` converges in norm
3. ``M ∩ N`` is complemented and ``|PQ - P_{M∩N}| < 1``
4. ``1 - PQ`` and ``1 - QP`` are bijective on ``(M ∩ N)^perp``
5. ``1 - PQ`` and ``1 - QP`` have closed range
6. ``X = (M ∩ N) ⊕ (M^perp + N^perp)``
7. ``M^perp + N^perp`` is closed
8. ``X = (M^perp ∩ N^perp) ⊕ (M + N)``
9. ``M + N`` is closed
10. ``M ∩ N`` is complemented and ``((M∩N)^perp ∩ M) + ((M∩N)^perp ∩ N)`` is closed

A sampled margin certifies closedness when it clears the threshold at two
resolutions and does not halve under refinement.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .alternating import NORM_CAUCHY, ConvergenceReport, convergence_report, refinement_chain
from .angles import (DISCORDANT, UNDECIDED, ConcordanceVerdict, concordance_verdict,
                     global_angle, local_angles)
from .fields import FINITE, MatrixField, sup_norm
from .linalg import kernel_projections, range_projections, singular_values
from .pair import ModulePair

DEFAULT_THRESHOLD = 1e-6
#: margin reported for a sum that is the zero space (trivially closed)
EMPTY_MARGIN = 1.0

CONDITION_NAMES = {
    1: "angle_below_one",
    2: "alternating_norm_cauchy",
    3: "intersection_complemented_and_gap",
    4: "bijective_on_intersection_complement",
    5: "closed_range_one_minus_pq",
    6: "intersection_plus_perp_sum",
    7: "perp_sum_closed",
    8: "perp_intersection_plus_sum",
    9: "sum_closed",
    10: "intersection_complemented_and_reduced_sum_closed",
}


@dataclass
class ConditionEvidence:
    id: int
    name: str
    holds: bool | None
    margin: float
    threshold: float
    refined_margin: float | None = None
    note: str = ""

    def __post_init__(self):
        if not np.isfinite(self.margin):
            raise ValueError(f"condition {self.id}: margin must be finite")

    def as_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "holds": self.holds, "margin": self.margin,
                "refined_margin": self.refined_margin, "threshold": self.threshold,
                "note": self.note}


@dataclass
class EquivalenceReport:
    entries: list
    threshold: float
    consistency: bool = field(init=False)
    narrative: str = field(init=False)

    def __post_init__(self):
        decided = [e for e in self.entries if e.holds is not None]
        truths = {e.holds for e in decided}
        self.consistency = len(truths) <= 1
        self.narrative = _narrative(self.entries, self.threshold)

    def __getitem__(self, cid: int) -> ConditionEvidence:
        for e in self.entries:
            if e.id == cid:
                return e
        raise KeyError(cid)

    @property
    def value(self) -> bool | None:
        """The common truth value, or None when undecided throughout or inconsistent."""
        truths = {e.holds for e in self.entries if e.holds is not None}
        return truths.pop() if len(truths) == 1 else None

    def flipped(self, cid: int) -> "EquivalenceReport":
        """Copy with one decided entry negated; used to exercise the diagnostic."""
        entries = [replace(e, holds=(not e.holds)) if e.id == cid and e.holds is not None else e
                   for e in self.entries]
        return EquivalenceReport(entries, self.threshold)

    def as_dict(self) -> dict:
        return {"threshold": self.threshold, "consistency": self.consistency,
                "narrative": self.narrative,
                "conditions": [e.as_dict() for e in self.entries]}


def _narrative(entries, threshold) -> str:
    decided = [e for e in entries if e.holds is not None]
    undecided = [e.id for e in entries if e.holds is None]
    tail = f"; undecided: {undecided}" if undecided else ""
    if not decided:
        return "no condition could be decided" + tail
    yes = [e for e in decided if e.holds]
    no = [e for e in decided if not e.holds]
    if not yes or not no:
        return f"all {len(decided)} decided conditions {'hold' if yes else 'fail'}" + tail
    minority = yes if len(yes) < len(no) else no
    parts = ", ".join(f"{e.id} ({e.name}, margin {e.margin:.3g})" for e in minority)
    word = "hold" if minority is yes else "fail"
    return (f"conditions {parts} {word} against the majority "
            f"(threshold {threshold:g})" + tail)


def _gap_field(pair: ModulePair) -> MatrixField:
    return MatrixField(pair.base, pair.pq - pair.omega.values)


# -- per-level margins ------------------------------------------------------------

def _min_nonzero_sv(stack: np.ndarray, tol):
    """Per-fibre smallest retained singular value and numerical rank."""
    _, ranks, margins = range_projections(stack, tol)
    return np.where(np.isnan(margins), EMPTY_MARGIN, margins), ranks


def _restricted_sv(op: np.ndarray, omega: np.ndarray, omega_ranks: np.ndarray) -> np.ndarray:
    """Smallest singular value of ``op`` on ``Ran(1 - Ω)`` fibrewise."""
    d = op.shape[-1]
    sigma = singular_values(op @ (np.eye(d) - omega))
    k = d - omega_ranks
    out = np.full(len(op), EMPTY_MARGIN)
    has = k > 0
    out[has] = sigma[has, k[has] - 1]
    return out


@dataclass
class _Margins:
    values: dict          # condition id -> per-fibre margin array
    constant: dict        # condition id -> rank constancy on this grid
    identity_ok: dict     # fibrewise rank identities (6 and 8)


def _level_margins(pair: ModulePair) -> _Margins:
    d = pair.fiber_dim
    eye = np.eye(d)
    p, q, om = pair.P.values, pair.Q.values, pair.omega.values
    r_om = np.asarray(pair.omega_ranks)
    qp = q @ p
    pc, qc = eye - p, eye - q

    m4 = np.minimum(_restricted_sv(eye - pair.pq, om, r_om), _restricted_sv(eye - qp, om, r_om))
    s5a, r5a = _min_nonzero_sv(eye - pair.pq, pair.tol)
    s5b, r5b = _min_nonzero_sv(eye - qp, pair.tol)
    s7, r7 = _min_nonzero_sv(pc + qc, pair.tol)
    s9, r9 = _min_nonzero_sv(p + q, pair.tol)
    s10, r10 = _min_nonzero_sv((p - om) + (q - om), pair.tol)

    _, perp_int = kernel_projections(eye - pc @ qc, pair.tol)
    cst = lambda *rs: all(len(set(np.asarray(r).tolist())) <= 1 for r in rs)
    return _Margins(
        values={4: m4, 5: np.minimum(s5a, s5b), 6: s7, 7: s7, 8: s9, 9: s9, 10: s10},
        constant={4: cst(r_om), 5: cst(r5a, r5b), 6: cst(r_om, r7), 7: cst(r7),
                  8: cst(perp_int, r9), 9: cst(r9), 10: cst(r_om, r10)},
        identity_ok={6: bool(np.all(r_om + r7 == d)), 8: bool(np.all(perp_int + r9 == d))},
    )


def _closedness(margins: list, constant: list, threshold: float, finite: bool):
    """Apply the two-resolution closedness rule; returns (holds, note)."""
    if finite:
        ok = margins[0] > threshold
        return ok, "finite base: margin against threshold"
    if len(margins) < 2:
        return None, "no second resolution available"
    coarse, fine = margins[0], margins[1]
    if not all(constant):
        return False, "rank not locally constant on the grid"
    if coarse <= threshold or fine <= threshold:
        return False, "margin below threshold"
    if fine < 0.5 * coarse:
        return False, "fails under refinement"
    return True, "margin stable under refinement"


def evaluate_conditions(pair: ModulePair, threshold: float = DEFAULT_THRESHOLD,
                        verdict: ConcordanceVerdict | None = None,
                        convergence: ConvergenceReport | None = None) -> EquivalenceReport:
    convergence = convergence or convergence_report(pair)
    verdict = verdict or concordance_verdict(pair, convergence=convergence)
    finite = pair.base.kind == FINITE
    chain = refinement_chain(pair, 1)
    if len(chain) > 1 and chain[-1] is pair:
        chain = chain[-2:]
    else:
        chain = chain[:2]
    levels = [_level_margins(p) for p in chain]
    entries = {}

    def add(cid, holds, margins, note=""):
        margins = [float(m) for m in margins]
        entries[cid] = ConditionEvidence(cid, CONDITION_NAMES[cid], holds,
                                         margins[0], threshold,
                                         margins[1] if len(margins) > 1 else None, note)

    def closed(cid, note_prefix=""):
        ms = [float(lv.values[cid].min()) for lv in levels]
        holds, note = _closedness(ms, [lv.constant[cid] for lv in levels], threshold, finite)
        return holds, ms, (note_prefix + note)

    # 1 and 3 share the fibre quantity |PQ - Ω|; 1 goes through the overridden angle
    angle = global_angle(pair, verdict)
    gaps = [1.0 - float(local_angles(p).max()) for p in chain]
    gap_const = [lv.constant[4] for lv in levels]
    if verdict.status == DISCORDANT:
        add(1, False, [1.0 - angle.value], angle.provenance)
        add(3, False, [1.0 - sup_norm(_gap_field(pair))], "intersection not complemented")
    elif verdict.status == UNDECIDED:
        add(1, None, [1.0 - angle.value], angle.provenance)
        add(3, None, [1.0 - sup_norm(_gap_field(pair))], "concordance undecided")
    else:
        h, note = _closedness(gaps, gap_const, threshold, finite)
        add(1, h, [1.0 - angle.value] + gaps[1:], f"{angle.provenance}; {note}")
        sup_gaps = [1.0 - sup_norm(_gap_field(p)) for p in chain]
        h3, note3 = _closedness(sup_gaps, gap_const, threshold, finite)
        add(3, h3, sup_gaps, note3)

    conv_gaps = [lv.gap for lv in convergence.levels] or [0.0]
    add(2, convergence.verdict == NORM_CAUCHY, conv_gaps[:2], f"verdict {convergence.verdict}")

    for cid in (4, 5, 7, 9):
        add(cid, *closed(cid))
    for cid in (6, 8):
        holds, ms, note = closed(cid)
        if not all(lv.identity_ok[cid] for lv in levels):
            holds, note = False, "fibrewise rank identity fails"
        add(cid, holds, ms, note)

    holds, ms, note = closed(10)
    if verdict.status == DISCORDANT:
        holds, note = False, "intersection not complemented"
    elif verdict.status == UNDECIDED:
        holds, note = None, "concordance undecided"
    add(10, holds, ms, note)

    return EquivalenceReport([entries[i] for i in sorted(entries)], threshold)


@dataclass
class EquivalenceResult:
    passed: bool
    diagnostic: str

    def __bool__(self):
        return self.passed


def assert_equivalence(report: EquivalenceReport) -> EquivalenceResult:
    """Pass when every decided condition agrees; otherwise say which ones broke ranks."""
    if report.consistency:
        return EquivalenceResult(True, report.narrative)
    return EquivalenceResult(False, "inconsistent: " + report.narrative)

