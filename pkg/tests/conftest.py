import numpy as np
import pytest

from effham.superop import lindblad_generator, random_hermitian


def random_lindblad(d, rng, n_jumps=None, traceless=True):
    """Lindblad generator with traceless H and traceless jumps; returns (L, H)."""
    h = random_hermitian(d, rng, traceless=True)
    n_jumps = n_jumps if n_jumps is not None else rng.integers(1, d + 2)
    jumps = []
    for _ in range(n_jumps):
        op = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if traceless:
            op = op - np.trace(op) / d * np.eye(d)
        jumps.append((float(rng.uniform(0.1, 2.0)), op))
    return lindblad_generator(h, jumps), h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line and assert it: ``criterion(n, ok, detail)``."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
