import itertools
import math

import numpy as np
import pytest

from tameslope import ExampleOne, golden_mean, interval_map, tent

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tribonacci_map():
    return interval_map([[0, 1, 0], [0, 0, 1], [1, 1, 1]], increasing=[True, True, False],
                        name="tribonacci")


def doubling_map():
    return interval_map([[1, 1, 0], [0, 0, 1], [1, 1, 1]], increasing=[True, True, False],
                        name="three-lap")


FINITE_BUILTINS = {
    "tent2": lambda: tent(2),
    "tent3": lambda: tent(3),
    "golden": golden_mean,
    "tribonacci": tribonacci_map,
    "three-lap": doubling_map,
}


@pytest.fixture(params=sorted(FINITE_BUILTINS))
def finite_map(request):
    return FINITE_BUILTINS[request.param]()


def brute_force_count(succ, i, j, n):
    """Count words i=i0..in=j by enumerating every forward word."""
    if n == 0:
        return int(i == j)
    total = 0
    stack = [(i, 0)]
    while stack:
        a, k = stack.pop()
        if k == n:
            total += a == j
            continue
        for b in succ(a):
            stack.append((b, k + 1))
    return total


def all_words(labels, succ, n):
    """Every admissible word of n+1 letters, by filtering the full product."""
    for w in itertools.product(labels, repeat=n + 1):
        if all(b in succ(a) for a, b in zip(w, w[1:])):
            yield w


def numpy_power(array, n):
    return np.linalg.matrix_power(np.asarray(array, dtype=object), n) if n else np.eye(len(array), dtype=int)


def realization_oracle(model):
    """Direct piecewise-linear realization on [0, 1] from vertex positions and the vertex map.

    Returns (f, breakpoints, arc order) where f acts on line coordinates.
    """
    fmap = model.fmap
    order = fmap.interval_order
    arcs = sorted(model.arcs, key=lambda a: order.index(fmap.endpoints(a)[0]))
    xs = [0.0]
    for a in arcs:
        xs.append(xs[-1] + float(model.lengths[a]))
    pos = dict(zip(order, xs))
    ys = []
    for k, v in enumerate(order):
        a = arcs[k] if k < len(arcs) else arcs[-1]
        end = "tail" if k < len(arcs) else "head"
        ys.append(pos[fmap.vertex_image(a, end)])
    xs_a, ys_a = np.array(xs), np.array(ys)

    def f(x):
        return float(np.interp(x, xs_a, ys_a))

    return f, xs_a, arcs


LOG_PHI = math.log((1 + math.sqrt(5)) / 2)
