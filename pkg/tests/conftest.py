import numpy as np
import pytest

from varcond.jet import JetSpec
from varcond.parser import parse_expression

# name -> (n, m, s, lagrangian text)
TEST_LAGRANGIANS = {
    "dirichlet": (2, 1, 1, "u_x1^2 + u_x2^2"),
    "quadratic_min": (1, 1, 1, "u^2 + u_x^2"),
    "saddle": (1, 1, 1, "u_x^2 - u^2"),
    "biharmonic": (1, 1, 2, "u_xx^2"),
    "minimal_surface": (2, 1, 1, "sqrt(1 + u_x1^2 + u_x2^2)"),
    "coupled": (1, 2, 1, "u1_x*u2_x"),
}


def lagrangian(name):
    n, m, s, text = TEST_LAGRANGIANS[name]
    spec = JetSpec(n, m, s)
    return spec, parse_expression(text, spec)


def random_jet(spec, rng, order=None, scale=1.0):
    """Random values for every coordinate up to ``order`` (default 2s + 1)."""
    order = 2 * spec.s + 1 if order is None else order
    big = spec.with_order(order)
    return {c: float(rng.uniform(-scale, scale)) for c in big.coordinates}


def random_polynomial(spec, order, rng, terms=4):
    """Random polynomial in x and the jet coordinates of order <= ``order``."""
    from varcond.expr import Constant, coord, var

    pool = [var(i) for i in range(1, spec.n + 1)]
    pool += [coord(c) for c in spec.with_order(order).coordinates]
    out = Constant(0)
    for _ in range(terms):
        term = Constant(float(rng.uniform(-1, 1)))
        for _ in range(int(rng.integers(1, 4))):
            term = term * pool[int(rng.integers(len(pool)))]
        out = out + term
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def problem_from(lagrangian, candidate="0", n=1, m=1, s=1, bounds=(0, 1), grid=None, extra=""):
    """Build a Problem through the problem-file reader."""
    from varcond.parser import parse_problem

    indep = "x" if n == 1 else " ".join(f"x{i}" for i in range(1, n + 1))
    dep = "u" if m == 1 else " ".join(f"u{j}" for j in range(1, m + 1))
    cands = [candidate] if isinstance(candidate, str) else list(candidate)
    lines = ["[problem]", f"independent = {indep}", f"dependent = {dep}", f"order = {s}", f"lagrangian = {lagrangian}", "[domain]"]
    lines += [f"{name} = {bounds[0]} {bounds[1]}" for name in indep.split()]
    lines.append("[candidate]")
    lines += [f"{name} = {c}" for name, c in zip(dep.split(), cands)]
    if grid is not None or extra:
        lines.append("[numerics]")
        if grid is not None:
            lines.append(f"grid = {grid}")
        lines += extra.splitlines()
    return parse_problem("\n".join(lines) + "\n")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title, detail, elapsed = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail} ({elapsed:.3g} s)")
