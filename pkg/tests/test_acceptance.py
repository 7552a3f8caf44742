"""The ten acceptance criteria, one test each.

Every test appends a PASS/FAIL line to ``RESULTS``; the lines are printed at
the end of the pytest run, or directly when this file is run as a script.
"""
import math
import time

import numpy as np
import pytest

from concord.alternating import (NORM_CAUCHY, NOT_CAUCHY, AlternatingWord, check_power_identity,
                                 check_sandwich, convergence_report, default_battery, word_values)
from concord.angles import (CONCORDANT, DISCORDANT, DISCORDANT_OVERRIDE, concordance_verdict,
                            global_angle, local_angles, symmetry_check)
from concord.cli import main
from concord.corpus import (CORPUS, constant_angle_pair, corpus_pair, random_battery_params,
                            random_pair, universal_pair)
from concord.equivalence import assert_equivalence, evaluate_conditions
from concord.fields import BaseSpace
from concord.linalg import norms

RESULTS = []
_T0 = time.perf_counter()


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{num:<2} {title}: {detail}"
    RESULTS.append(line)
    return ok


@pytest.fixture(scope="module")
def pairs():
    out = {name: e.build() for name, e in CORPUS.items()}
    for prm in random_battery_params(100):
        out[f"random[{prm['seed']}]"] = random_pair(**prm)
    return out


@pytest.fixture(scope="module")
def reports(pairs):
    return {k: convergence_report(p) for k, p in pairs.items()}


@pytest.fixture(scope="module")
def verdicts(pairs, reports):
    # no cross-check here: the iteration verdict is what criterion 4 compares against
    return {k: concordance_verdict(p, cross_check=False) for k, p in pairs.items()}


def test_ac1_angle_law():
    t0 = time.perf_counter()
    pair = universal_pair(BaseSpace.interval(0.0, math.pi / 2, 257))
    c = local_angles(pair)
    elapsed = time.perf_counter() - t0
    t = pair.base.coordinates
    err = max(abs(c[0]), float(np.max(np.abs(c[1:] - np.abs(np.cos(t[1:]))))))
    ok = err <= 1e-10 and elapsed < 1.0
    assert record(1, "angle law c_t = |cos t|, c_0 = 0", ok,
                  f"max error {err:.2e} (tol 1e-10), {elapsed:.3f} s (limit 1 s)")


def test_ac2_discordance(pairs):
    full, restricted = pairs["universal"], pairs["universal-restricted"]
    v = concordance_verdict(full)
    ga = global_angle(full, v)
    w = v.witness
    vr = concordance_verdict(restricted)
    gr = global_angle(restricted, vr)
    err = abs(gr.value - math.cos(math.pi / 6))
    ok = (v.status == DISCORDANT and w is not None and w.coordinate == 0.0
          and w.detail == "rank 1 vs 0" and ga.value == 1.0 and ga.provenance == DISCORDANT_OVERRIDE
          and vr.status == CONCORDANT and err <= 1e-10)
    assert record(2, "discordance detection", ok,
                  f"full: {v.status}, witness t={w and w.coordinate} ({w and w.detail}), "
                  f"angle {ga.value!r} [{ga.provenance}]; [pi/6, pi/2]: {vr.status}, "
                  f"|angle - cos(pi/6)| = {err:.1e}")


def test_ac3_convergence_rate():
    pair = constant_angle_pair(math.pi / 3)
    n = np.arange(1, 21)
    dist = np.array([norms(word_values(pair, AlternatingWord("PQP", int(k)))
                           - pair.omega.values).max() for k in n])
    rel = float(np.max(np.abs(dist / 4.0 ** -n - 1)))
    rep = convergence_report(pair)
    head = np.array(rep.distances[:20])
    rel_rep = float(np.max(np.abs(head / 4.0 ** -np.arange(1, len(head) + 1) - 1)))
    rate_err = abs(rep.rate_estimate / 0.25 - 1)
    ok = rel <= 1e-12 and rel_rep <= 1e-12 and rate_err <= 0.01
    assert record(3, "alternating rate 4^-n at theta = pi/3", ok,
                  f"max rel error {max(rel, rel_rep):.1e} over n <= 20 (tol 1e-12), fitted rate "
                  f"{rep.rate_estimate:.6f} ({100 * rate_err:.2e}% from 0.25)")


def test_ac4_concordance_matches_iteration(pairs, reports, verdicts):
    bad = []
    for k in pairs:
        s, c = verdicts[k].status, reports[k].verdict
        if not ((s == CONCORDANT and c == NORM_CAUCHY) or (s == DISCORDANT and c == NOT_CAUCHY)):
            bad.append(f"{k}: {s}/{c}")
    n_disc = sum(v.status == DISCORDANT for v in verdicts.values())
    assert record(4, "concordance vs norm-Cauchy iteration", not bad,
                  f"{len(pairs)} pairs ({n_disc} discordant), exceptions: {bad or 0}")


def test_ac5_power_identities(pairs):
    worst = max(check_power_identity(p, 8).max_corrected for p in pairs.values())
    fibre = universal_pair(BaseSpace.interval(math.pi / 4, math.pi / 4, 1))
    printed = check_power_identity(fibre, 2).printed["PQ~PQP"][1]
    ok = worst < 1e-10 and printed > 0.05
    assert record(5, "corrected power identities", ok,
                  f"max residual {worst:.1e} for k <= 8 (tol 1e-10); printed pairing residual "
                  f"{printed:.4f} at t = pi/4, k = 2 (needs > 0.05)")


def test_ac6_sandwich(pairs):
    violations, worst, sections = 0, 0.0, 0
    for p in pairs.values():
        for x in default_battery(p):
            tab = check_sandwich(p, x, 20)
            violations += tab.violations
            worst = max(worst, tab.worst_excess)
            sections += 1
    assert record(6, "sandwich |(PQ)^n x| >= |(QPQ)^n x| >= |(PQ)^(n+1) x|", violations == 0,
                  f"{sections} sections, n <= 20, {violations} violations, "
                  f"worst excess {worst:.1e} (slack 1e-12)")


def test_ac7_perp_symmetry(pairs):
    worst = max(symmetry_check(p)[2] for p in pairs.values())
    assert record(7, "perp symmetry c(M,N) = c(M^perp,N^perp)", worst < 1e-8,
                  f"max difference {worst:.1e} over {len(pairs)} pairs (tol 1e-8)")


def test_ac8_kernel_oracle(pairs):
    tested = list(pairs.values()) + [pairs["universal"].refined(), pairs["universal"].perp()]
    rank_bad = sum(int(np.sum(p.oracle_ranks != p.omega_ranks)) for p in tested)
    proj_err = max(float(norms(p.omega.values - p.oracle_omega).max()) for p in tested)
    fibres = sum(len(p) for p in tested)
    ok = rank_bad == 0 and proj_err <= 1e-8
    assert record(8, "ker(1-PQ) vs principal-angle oracle", ok,
                  f"{fibres} fibres, {rank_bad} rank mismatches, projection error {proj_err:.1e} "
                  "(tol 1e-8)")


def test_ac9_ten_way_equivalence(pairs, reports):
    failures, values = [], {}
    for k, p in pairs.items():
        rep = evaluate_conditions(p, convergence=reports[k])
        values[k] = rep.value
        res = assert_equivalence(rep)
        if not res.passed:
            failures.append(f"{k}: {res.diagnostic}")
    extremes = values["constant-angle"] is True and values["universal"] is False
    undecided = [k for k, v in values.items() if v is None]
    elapsed = time.perf_counter() - _T0
    ok = not failures and extremes and not undecided and elapsed < 60
    assert record(9, "ten-way equivalence", ok,
                  f"{len(pairs)} pairs, {len(failures)} inconsistent, {len(undecided)} undecided, "
                  f"all-true constant-angle {values['constant-angle']}, all-false universal "
                  f"{values['universal'] is False}; acceptance suite {elapsed:.1f} s (limit 60 s)"
                  + (f"; {failures[:3]}" if failures else ""))


def test_ac10_determinism(tmp_path):
    blobs = {}
    for name, extra in (("universal", []), ("random", ["--seed", "42"])):
        runs = []
        for i in range(2):
            out = tmp_path / f"{name}{i}.json"
            code = main(["analyze", "--corpus", name, *extra, "--out", str(out)])
            runs.append((code, out.read_bytes()))
        blobs[name] = runs
    ok = all(a[0] == 0 and a == b for a, b in blobs.values())
    sizes = ", ".join(f"{k} {len(v[0][1])} bytes" for k, v in blobs.items())
    assert record(10, "byte-identical analyze output", ok, f"two runs each: {sizes}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
