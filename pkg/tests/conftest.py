import numpy as np
import pytest
from hypothesis import strategies as st

from bdmix import _backend
from bdmix.core import BDChain

BACKENDS = ["python"] + (["compiled"] if _backend.HAVE_COMPILED else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel implementation."""
    from bdmix import _kernels_py
    mod = _kernels_py if request.param == "python" else _backend._compiled
    monkeypatch.setattr(_backend, "kernels", mod)
    return request.param


def random_chain(rng, n, lo=1e-4, hi=0.5):
    up = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    down = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    return BDChain(np.append(up, 0.0), np.insert(down, 0, 0.0))


@st.composite
def chains(draw, max_n=20, lo=1e-3):
    """Valid chains with rates log-uniform in ``[lo, 1/2]``."""
    n = draw(st.integers(1, max_n))
    logs = st.floats(np.log(lo), np.log(0.5))
    up = np.exp(draw(st.lists(logs, min_size=n, max_size=n)))
    down = np.exp(draw(st.lists(logs, min_size=n, max_size=n)))
    return BDChain(np.append(up, 0.0), np.insert(down, 0, 0.0))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
