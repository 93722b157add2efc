import numpy as np
import pytest

from reefgpr import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=sorted(_kernels.backends()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = _kernels.backends()[request.param]
    for name in ("smo_solve", "best_split", "pair_step", "dual_objective"):
        monkeypatch.setattr(_kernels, name, getattr(impl, name))
    return request.param


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion; printed at session end."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
