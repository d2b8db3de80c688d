import math
from fractions import Fraction

from hypothesis import settings

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def brute_min_L(vals):
    """Smallest integer L with 1/L <= d(n+1) <= L d(n), by direct search."""
    d = [b - a for a, b in zip(vals, vals[1:])]
    for L in range(1, 10**4):
        if all(Fraction(1, L) <= d[n + 1] <= L * d[n] for n in range(len(d) - 1)):
            return L
    return None


def brute_growth_constant(f, h):
    """Smallest A with f(n) <= A h(An+A) + A and back, over every checkable n."""
    H = min(len(f), len(h)) - 1
    for A in range(1, H + 1):
        ok = True
        for a, b in ((f, h), (h, f)):
            for n in range(H):
                if A * n + A > H:
                    break
                if a[n] > A * b[A * n + A] + A:
                    ok = False
                    break
        if ok:
            return A
    return None


def subexp(n):
    return math.floor(math.exp(2 * n ** (1 / 3))) + n


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
