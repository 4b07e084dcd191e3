import numpy as np
import pytest

from reltoda import BidiagonalPencil

REPORT: list[str] = []

EXAMPLE_A = (3.0, 12.0, 16.0, 7.0, 5.0)
EXAMPLE_B = (1.0, 6.0, 11.0, 5.0)
EXAMPLE_LAMBDA = np.array([1.9812757881, 2.6941860907, 6.6927423653, 13.8305993379, 40.8011964181])
EXAMPLE_W = np.array([0.0097186754, 0.8409233539, 0.0757415291, 0.0665694128, 0.0070470286])


def random_pencils(seed, count, n_max=12):
    """N uniform in 1..n_max, entries log-uniform in [0.1, 10]."""
    rng = np.random.default_rng(seed)
    lo, hi = np.log(0.1), np.log(10.0)
    out = []
    for _ in range(count):
        N = int(rng.integers(1, n_max + 1))
        a = np.exp(rng.uniform(lo, hi, N))
        b = np.exp(rng.uniform(lo, hi, N - 1))
        out.append(BidiagonalPencil(a, b))
    return out


@pytest.fixture
def example():
    return BidiagonalPencil(EXAMPLE_A, EXAMPLE_B)


@pytest.fixture
def report():
    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        print(line)
        REPORT.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
