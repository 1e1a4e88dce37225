"""Loop counts as horseshoes, and the entropy lower bounds they give.

Each admissible loop ``j i1 .. i(n-1) j`` is a subarc of ``j`` that ``f^n``
maps over ``j``, so ``s_n = m_jj(n)`` disjoint such subarcs form an
``s_n``-horseshoe and ``log(s_n) / n <= h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import CylinderWord, Refinement, source_matrix
from .transition import (
    CountableMatrix,
    FiniteMatrix,
    ParameterError,
    column_powers,
    diagonal_counts,
    submatrix,
)


def _log_bound(count: int, n: int) -> float:
    return math.log(count) / n if count > 0 else -math.inf


@dataclass
class HorseshoeSequence:
    base: object
    counts: dict  # n -> s_n
    bounds: dict  # n -> log(s_n) / n, -inf when there is no loop

    def best(self, upto: int | None = None) -> float:
        ns = [n for n in self.bounds if upto is None or n <= upto]
        return max((self.bounds[n] for n in ns), default=-math.inf)

    def rows(self) -> list[tuple]:
        """``(n, s_n, bound)`` with ``"no loop"`` in place of ``-inf``."""
        return [(n, self.counts[n], self.bounds[n] if self.counts[n] else "no loop")
                for n in sorted(self.counts)]


def horseshoe_sequence(M, j, N: int) -> HorseshoeSequence:
    """``s_n = m_jj(n)`` and ``log(s_n)/n`` for ``n = 1 .. N``."""
    if N < 1:
        raise ParameterError("N must be at least 1")
    M, _ = source_matrix(M)
    diag = diagonal_counts(M, j, N)
    counts = {n: diag[n] for n in range(1, N + 1)}
    return HorseshoeSequence(j, counts, {n: _log_bound(c, n) for n, c in counts.items()})


def horseshoe_witness(fmap, j, n: int, budget: int | None = None) -> Refinement:
    """The loop words ``j i1 .. i(n-1) j``, enumerated depth first.

    Backward reachability layers prune every branch that cannot close up,
    so the enumeration cost is proportional to the number of loops.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    M, _ = source_matrix(fmap)
    layers = [set(w) for w in column_powers(M, j, n)]  # layers[k]: reach j in exactly k steps
    words: list[CylinderWord] = []
    if j not in layers[n]:
        return Refinement(words, complete=True)
    stack = [(j,)]
    while stack:
        w = stack.pop()
        left = n - (len(w) - 1)
        if left == 0:
            if budget is not None and len(words) >= budget:
                return Refinement(words, complete=False)
            words.append(CylinderWord(w))
            continue
        for b in reversed(list(M.successors(w[-1]))):
            if b in layers[left - 1]:
                stack.append(w + (b,))
    return Refinement(words, complete=True)


@dataclass
class GrowthRow:
    n: int
    trace: int
    bound: float | None  # None when no word of length n closes up

    @property
    def note(self) -> str:
        return "" if self.trace else f"no fixed words at level {self.n}"


def periodic_growth_report(A, N: int) -> list[GrowthRow]:
    """``log(trace A^n) / n`` for ``n = 1 .. N`` on a finite (truncated) matrix.

    ``trace A^n`` counts closed words of length ``n`` inside the truncation,
    a lower bound for the number of period-``n`` points.
    """
    if N < 1:
        raise ParameterError("N must be at least 1")
    if isinstance(A, CountableMatrix):
        F = submatrix(A, A.labels())
    elif isinstance(A, FiniteMatrix):
        F = A
    else:
        M, arcs = source_matrix(A)
        F = submatrix(M, arcs)
    M = F.as_matrix()
    traces = [0] * (N + 1)
    for j in F.labels:
        for n, c in enumerate(diagonal_counts(M, j, N)):
            traces[n] += c
    return [GrowthRow(n, traces[n], math.log(traces[n]) / n if traces[n] else None)
            for n in range(1, N + 1)]
