import numpy as np
import pytest

from irpnm.linop import DenseMap
from irpnm.model import Problem
from irpnm.regularizer import L1
from irpnm.smooth import Quadratic, SmoothTerm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def lasso_problem(rng, m=50, n=200, lam_frac=0.1):
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    x_true = np.zeros(n)
    x_true[rng.choice(n, 10, replace=False)] = rng.standard_normal(10)
    b = A @ x_true + 0.01 * rng.standard_normal(m)
    lam = lam_frac * np.abs(A.T @ b).max()
    return Problem(SmoothTerm(Quadratic(), DenseMap(A), b), L1(lam)), A, b, lam


def ista(A, b, lam, iters=200000, x0=None):
    """Reference lasso solver: plain ISTA with step 1/||A||^2, stops at a fixed point."""
    L = np.linalg.norm(A, 2) ** 2
    x = np.zeros(A.shape[1]) if x0 is None else x0.copy()
    for _ in range(iters):
        v = x - A.T @ (A @ x - b) / L
        x_new = np.sign(v) * np.maximum(np.abs(v) - lam / L, 0.0)
        if np.array_equal(x_new, x):
            break
        x = x_new
    return x


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def record_acceptance(cid, title, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {cid}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES[cid] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[cid])
