import numpy as np
import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Collect one pass/fail line per acceptance criterion."""
    def _record(number: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def unit(rng, m):
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def random_rotation(rng, m):
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))
