import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from concord.alternating import (NORM_CAUCHY, NOT_CAUCHY, AlternatingWord, adjoint_pair_residual,
                                 check_power_identity, check_sandwich, convergence_report,
                                 default_battery, fit_rate, iterate_section, refinement_chain,
                                 word_values)
from concord.corpus import CORPUS, constant_angle_pair, random_pair, universal_pair
from concord.errors import InputError
from concord.fields import BaseSpace, VectorSection


def _explicit(p, q, pattern, n):
    """Multiply out the word factor by factor."""
    seq = {"alt_end_Q": "PQ", "alt_end_P": "QP"}[pattern]
    factors = [seq[(i + n) % 2] for i in range(n)]   # n letters ending in the last one
    out = np.eye(p.shape[-1])
    for f in factors:
        out = out @ (p if f == "P" else q)
    return out


@pytest.mark.parametrize("pattern", ["alt_end_Q", "alt_end_P"])
@pytest.mark.parametrize("n", range(1, 8))
def test_alternating_words_multiply_out(lines60, pattern, n):
    p, q = lines60.P.values[0], lines60.Q.values[0]
    got = word_values(lines60, AlternatingWord(pattern, n))[0]
    np.testing.assert_allclose(got, _explicit(p, q, pattern, n), atol=1e-14)


def test_single_letter_words(lines60):
    np.testing.assert_allclose(word_values(lines60, AlternatingWord("alt_end_Q", 1)),
                               lines60.Q.values)
    np.testing.assert_allclose(word_values(lines60, AlternatingWord("alt_end_P", 1)),
                               lines60.P.values)


@pytest.mark.parametrize("pattern,n", [("PQR", 2), ("PQ", 0)])
def test_word_validation(pattern, n):
    with pytest.raises(InputError):
        AlternatingWord(pattern, n)


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_adjoint_of_pq_power(universal, n):
    assert adjoint_pair_residual(universal, n) < 1e-14


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, math.pi / 3, 1.2])
def test_constant_pair_rate(theta):
    rep = convergence_report(constant_angle_pair(theta))
    c2 = math.cos(theta) ** 2
    n = np.arange(1, len(rep.distances) + 1)
    np.testing.assert_allclose(rep.distances, c2 ** n, rtol=1e-10)
    assert rep.rate_estimate == pytest.approx(c2, rel=1e-6)
    assert rep.verdict == NORM_CAUCHY
    assert rep.angle_squared == pytest.approx(c2)


def test_stop_tolerance_truncates(lines60):
    rep = convergence_report(lines60, stop_tol=1e-10)
    assert rep.iterations_used == len(rep.distances) < 200
    assert rep.distances[-1] < 1e-10 <= rep.distances[-2]


def test_max_n_floor(lines60):
    with pytest.raises(InputError):
        convergence_report(lines60, max_n=3)


@pytest.mark.parametrize("name", list(CORPUS))
def test_corpus_verdicts(name):
    entry = CORPUS[name]
    rep = convergence_report(entry.build())
    want = NOT_CAUCHY if entry.expected["verdict"] == "discordant" else NORM_CAUCHY
    assert rep.verdict == want


def test_universal_gap_collapses(universal):
    rep = convergence_report(universal)
    coarse, fine = rep.levels
    assert fine.points == 2 * coarse.points - 1
    assert fine.gap < 0.5 * coarse.gap
    # the spectral gap at the first interior point is 1 - cos^2(h)
    h = universal.base.spacing
    assert coarse.gap == pytest.approx(1 - math.cos(h) ** 2, rel=0.05)


def test_fit_rate_edges():
    assert fit_rate([]) == 0.0
    assert fit_rate([0.5, 0.0]) == 0.0
    assert fit_rate([0.25]) == pytest.approx(0.25)
    assert fit_rate([0.5 ** k for k in range(1, 30)]) == pytest.approx(0.5)


def test_refinement_chain_shapes(universal):
    assert [len(p) for p in refinement_chain(universal, 2)] == [257, 513, 1025]
    sampled = random_pair(3, 3, 1, 1).restrict(range(33))
    chain = refinement_chain(sampled, 2)
    assert [len(p) for p in chain] == [9, 17, 33] and chain[-1] is sampled
    assert refinement_chain(CORPUS["universal-finite"].build(), 3)[0].base.kind == "finite"


def test_iterate_section_converges_to_intersection(lines60):
    x = VectorSection.constant(lines60.base, [1.0, 0.0])
    it = iterate_section(lines60, x, 10)
    np.testing.assert_allclose(it.omega_distances[1:], 0.25 ** np.arange(1, 11), rtol=1e-10)
    with pytest.raises(InputError):
        iterate_section(lines60, VectorSection.constant(lines60.base, [1.0, 0, 0]), 3)


def test_battery_is_deterministic(universal):
    a = default_battery(universal, seed=4)
    b = default_battery(universal, seed=4)
    assert len(a) == 2 + 8
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))


def test_power_identities_on_universal(universal):
    table = check_power_identity(universal, 8)
    assert table.max_corrected < 1e-10
    assert table.max_printed > 0.05


def test_printed_pairing_counterexample_value():
    fibre = universal_pair(BaseSpace.interval(math.pi / 4, math.pi / 4, 1))
    table = check_power_identity(fibre, 3)
    # at t = pi/4 the k = 2 residual is cos^3 t sin t = 1/4
    assert table.printed["PQ~PQP"][1] == pytest.approx(0.25, abs=1e-14)


def test_sandwich_closed_form_for_e1(universal):
    x = VectorSection.constant(universal.base, [1.0, 0.0])
    table = check_sandwich(universal, x, 20)
    c = np.abs(np.cos(universal.base.coordinates))
    c[0] = 1.0                                     # P and Q agree at t = 0
    n = np.arange(1, 21)[:, None]
    np.testing.assert_allclose(table.pq_norms[:20], c ** (2 * n), atol=1e-13)
    np.testing.assert_allclose(table.qpq_norms, c ** (2 * n + 1), atol=1e-13)
    assert table.holds


@given(st.integers(0, 5000), st.integers(2, 5), st.floats(0.0, 1.5))
def test_sandwich_on_random_pairs(seed, d, smooth):
    pair = random_pair(seed, d, 1, 1, 0, BaseSpace.interval(0, 1, 9), smooth)
    for x in default_battery(pair, n_random=2, seed=seed):
        assert check_sandwich(pair, x, 10).holds


@given(st.integers(0, 5000))
def test_qpq_power_oracle(seed):
    pair = random_pair(seed, 3, 1, 2, 1, BaseSpace.interval(0, 1, 5))
    q = pair.Q.values
    direct = np.linalg.matrix_power(q @ pair.P.values @ q, 4)
    np.testing.assert_allclose(word_values(pair, AlternatingWord("QPQ", 4)), direct, atol=1e-12)
