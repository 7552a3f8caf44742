"""One-shot analysis of a pair and re-checking of corpus expectations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .alternating import ConvergenceReport, convergence_report
from .angles import (AngleProfile, ConcordanceVerdict, GlobalAngle, angle_profile,
                     concordance_verdict, global_angle)
from .corpus import CORPUS, CorpusEntry
from .equivalence import EquivalenceReport, assert_equivalence, evaluate_conditions
from .formats import SCHEMA_VERSION, clean
from .pair import ModulePair


def describe_pair(pair: ModulePair) -> dict:
    meta = {k: v for k, v in pair.meta.items() if k != "name"}
    return {"name": pair.meta.get("name", "pair"), "fiber_dim": pair.fiber_dim,
            "base": pair.base.describe(), "meta": clean(meta),
            "rank_P": sorted(set(pair.P.rank_profile.tolist())),
            "rank_Q": sorted(set(pair.Q.rank_profile.tolist()))}


@dataclass
class AnalysisBundle:
    pair: dict
    profile: AngleProfile
    verdict: ConcordanceVerdict
    angle: GlobalAngle
    convergence: ConvergenceReport
    equivalence: EquivalenceReport
    tolerances: dict
    seed: int
    tool_version: str = __version__

    @property
    def consistent(self) -> bool:
        return bool(assert_equivalence(self.equivalence))

    @property
    def undecided(self) -> bool:
        return (self.verdict.status == "undecided"
                or any(e.holds is None for e in self.equivalence.entries))

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "grid": self.pair["base"],
            "pair": self.pair,
            "angle_profile": self.profile.as_dict(),
            "global_angle": {"value": self.angle.value, "provenance": self.angle.provenance,
                             "refinement_trend": list(self.angle.refinement_trend)},
            "concordance": self.verdict.as_dict(),
            "convergence": self.convergence.as_dict(),
            "equivalence": self.equivalence.as_dict(),
        }


def analyze(pair: ModulePair, seed: int = 0, threshold: float = 1e-6,
            max_n: int = 200) -> AnalysisBundle:
    conv = convergence_report(pair, max_n=max_n, battery_seed=seed)
    verdict = concordance_verdict(pair, convergence=conv)
    profile = angle_profile(pair)
    angle = global_angle(pair, verdict, profile)
    eq = evaluate_conditions(pair, threshold, verdict=verdict, convergence=conv)
    tol = dict(pair.tol.as_dict(), equivalence_threshold=threshold)
    return AnalysisBundle(describe_pair(pair), profile, verdict, angle, conv, eq, tol, seed)


def check_entry(entry: CorpusEntry, pair: ModulePair | None = None) -> list[str]:
    """Re-derive an entry's expected facts; returns a list of failures (empty when fine)."""
    pair = pair or entry.build()
    exp = entry.expected
    fails = []
    verdict = concordance_verdict(pair)
    if "verdict" in exp and verdict.status != exp["verdict"]:
        fails.append(f"verdict {verdict.status}, expected {exp['verdict']}")
    if "witness" in exp:
        w = verdict.witness
        if w is None or abs(w.coordinate - exp["witness"]) > 1e-12:
            fails.append(f"witness {w and w.coordinate}, expected {exp['witness']}")
    if "global_angle" in exp:
        got = global_angle(pair, verdict).value
        if abs(got - exp["global_angle"]) > 1e-10:
            fails.append(f"global angle {got!r}, expected {exp['global_angle']!r}")
    if exp.get("angle_law") == "abs_cos":
        t = pair.base.coordinates
        want = np.where(t > 0, np.abs(np.cos(t)), 0.0)
        err = float(np.max(np.abs(angle_profile(pair, rounds=0).cosines - want)))
        if err > 1e-10:
            fails.append(f"angle law off by {err:.3g}")
    if "equivalence" in exp:
        rep = evaluate_conditions(pair, verdict=verdict)
        if rep.value is not exp["equivalence"]:
            fails.append(f"equivalence {rep.value}, expected {exp['equivalence']}: {rep.narrative}")
    return fails


def check_corpus() -> dict[str, list[str]]:
    return {name: check_entry(entry) for name, entry in CORPUS.items()}

