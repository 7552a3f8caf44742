import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from concord.analysis import check_corpus
from concord.corpus import corpus_pair

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_sessionstart(session):
    # a corpus entry whose expected facts no longer hold invalidates every other result
    failures = {k: v for k, v in check_corpus().items() if v}
    if failures:
        lines = "\n".join(f"  {k}: {'; '.join(v)}" for k, v in failures.items())
        pytest.exit(f"corpus expectations failed:\n{lines}", returncode=3)


@pytest.fixture(scope="session")
def universal():
    return corpus_pair("universal")


@pytest.fixture(scope="session")
def restricted():
    return corpus_pair("universal-restricted")


@pytest.fixture(scope="session")
def lines60():
    return corpus_pair("constant-angle", theta=np.pi / 3)


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng, d, k):
    u = random_unitary(rng, d)[:, :k]
    return u @ u.conj().T


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
