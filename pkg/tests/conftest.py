import numpy as np
import pytest

SQRT2 = np.sqrt(2.0)
UNIT_SQUARE = np.array([1.0, SQRT2, 1.0, 1.0, SQRT2, 1.0])
SQUARE_LAMBDA = (1 + 2**-1.5) / 2
SQUARE_SIGMA = (1 - SQUARE_LAMBDA) / 2
# trapezoid with bases 4 and 2 and height 2
HAND_TRAPEZOID = np.array([[0.0, 0.0], [4.0, 0.0], [3.0, 2.0], [1.0, 2.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def fd_gradient(f, x, step=1e-5):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        out[k] = (f(x + e) - f(x - e)) / (2 * step)
    return out


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
