import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from concord.angles import (CONCORDANT, DISCORDANT, DISCORDANT_OVERRIDE, GRID_SUP, LOWER_BOUND,
                            UNDECIDED, AngleProfile, ConcordanceVerdict, angle_profile,
                            concordance_verdict, global_angle, harmonious, local_angle,
                            local_angles, semicontinuity_scan, symmetry_check)
from concord.corpus import CORPUS, constant_angle_pair, random_pair
from concord.fields import BaseSpace, MatrixField
from concord.pair import ModulePair


def _sampled(pair, n=None):
    """Same values with the closed-form tags dropped."""
    p = MatrixField(pair.base, pair.P.values)
    q = MatrixField(pair.base, pair.Q.values)
    out = ModulePair(p, q, pair.tol, {"name": "sampled"})
    return out if n is None else out.restrict(range(n))


def test_angle_law(universal):
    t = universal.base.coordinates
    c = local_angles(universal)
    assert c[0] == 0.0
    np.testing.assert_allclose(c[1:], np.abs(np.cos(t[1:])), atol=1e-12)
    assert local_angle(universal, "y128") == pytest.approx(math.cos(math.pi / 4), abs=1e-12)


@pytest.mark.parametrize("name", list(CORPUS))
def test_local_angle_matches_principal_angles(name):
    pair = CORPUS[name].build()
    np.testing.assert_allclose(local_angles(pair), pair.oracle_cosines, atol=1e-8)


@given(st.integers(0, 10_000), st.integers(2, 6), st.floats(0, 1))
def test_local_angle_oracle_random(seed, d, smooth):
    pair = random_pair(seed, d, 1, d - 1, 0, BaseSpace.interval(0, 1, 5), smooth)
    c = local_angles(pair)
    assert np.all((c >= 0) & (c < 1))
    np.testing.assert_allclose(c, pair.oracle_cosines, atol=1e-8)


def test_universal_is_discordant(universal):
    v = concordance_verdict(universal)
    assert v.status == DISCORDANT
    assert v.witness.coordinate == 0.0 and v.witness.detail == "rank 1 vs 0"
    assert v.evidence["iteration_verdict"] == "not_cauchy"
    ga = global_angle(universal, v)
    assert ga.value == 1.0 and ga.provenance == DISCORDANT_OVERRIDE


def test_restricted_is_concordant(restricted):
    v = concordance_verdict(restricted)
    assert v.status == CONCORDANT and v.witness is None
    ga = global_angle(restricted, v)
    assert ga.value == pytest.approx(math.cos(math.pi / 6), abs=1e-10)
    assert ga.provenance == GRID_SUP


def test_finite_base_is_concordant():
    pair = CORPUS["universal-finite"].build()
    v = concordance_verdict(pair)
    assert v.status == CONCORDANT
    assert global_angle(pair, v).value == pytest.approx(math.cos(math.pi / 6))


def test_sampled_universal_uses_coarsening(universal):
    v = concordance_verdict(_sampled(universal))
    assert v.status == DISCORDANT and v.witness.coordinate == 0.0
    assert [lv["points"] for lv in v.evidence["levels"]][:2] == [129, 257]


def test_too_short_grid_is_undecided(lines60):
    pair = _sampled(lines60, 3)
    v = concordance_verdict(pair)
    assert v.status == UNDECIDED
    assert global_angle(pair, v).provenance == LOWER_BOUND


def test_discordant_needs_witness():
    with pytest.raises(ValueError):
        ConcordanceVerdict(DISCORDANT, None, {})


def test_universal_profile_scan(universal):
    prof = angle_profile(universal)
    assert [c for c, _ in prof.discontinuity_points] == [0.0]
    assert prof.lsc_violations == []
    assert prof.refinement_trend[0] < prof.refinement_trend[1] < prof.refinement_trend[2] < 1


def test_synthetic_spike_up_is_an_lsc_violation():
    c = np.full(11, 0.3)
    c[5] = 0.9
    scan = semicontinuity_scan(AngleProfile.from_values(np.linspace(0, 1, 11), c, 0.05))
    assert scan.lsc_violations == [0.5]
    assert [x for x, _ in scan.discontinuities] == [0.5]


def test_synthetic_spike_down_is_not():
    c = np.full(11, 0.8)
    c[0] = 0.0
    scan = semicontinuity_scan(AngleProfile.from_values(np.linspace(0, 1, 11), c, 0.05))
    assert scan.lsc_violations == []
    assert [x for x, _ in scan.discontinuities] == [0.0]


def test_smooth_profile_is_clean():
    t = np.linspace(0, 1, 50)
    scan = semicontinuity_scan(AngleProfile.from_values(t, 0.5 + 0.1 * np.sin(t), 0.05))
    assert scan.discontinuities == [] and scan.lsc_violations == []


def test_concordant_profile_jumps_shrink():
    pair = random_pair(7, 4, 2, 2, 1, BaseSpace.interval(0, 1, 17), smoothness=1.0)
    coarse = np.abs(np.diff(local_angles(pair))).max()
    fine = np.abs(np.diff(local_angles(pair.refined()))).max()
    assert fine < 0.75 * coarse


@pytest.mark.parametrize("name", list(CORPUS))
def test_perp_symmetry_corpus(name):
    c, cp, diff = symmetry_check(CORPUS[name].build())
    assert diff < 1e-8


@given(st.integers(0, 10_000), st.integers(2, 5))
def test_perp_symmetry_fibrewise(seed, d):
    pair = random_pair(seed, d, 1, 1, 0, BaseSpace.interval(0, 1, 5), 0.7)
    np.testing.assert_allclose(local_angles(pair), local_angles(pair.perp()), atol=1e-10)


def test_harmonious():
    assert harmonious(constant_angle_pair(0.9))["harmonious"] is True
    out = harmonious(CORPUS["universal"].build())
    assert out["harmonious"] is False
    assert out["pairs"]["M_perp,N_perp"]["status"] == DISCORDANT
