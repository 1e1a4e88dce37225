"""Countable 0/1 transition matrices.

Rows may in principle be infinite, columns never are, so every power or
series computation runs *backward* from the target column through the
finite predecessor lists.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

Label = Hashable


class UnknownIndexError(KeyError):
    """Raised for a label that is not in the matrix's index set."""


class EmptyTruncationError(ValueError):
    pass


class ParameterError(ValueError):
    pass


class CountableMatrix:
    """A 0/1 matrix over a countable index set, accessed through rules.

    Subclasses provide ``successors``, ``predecessors`` and membership.
    ``level_of`` drives the enumeration: the prefix at level ``k`` is
    ``{i : level_of(i) <= k}`` and must be finite for every ``k``.
    """

    finite = False

    def successors(self, i: Label) -> Sequence[Label]:
        raise NotImplementedError

    def predecessors(self, i: Label) -> Sequence[Label]:
        raise NotImplementedError

    def __contains__(self, i: Label) -> bool:
        raise NotImplementedError

    def level_of(self, i: Label) -> int:
        return 0

    def labels(self) -> list[Label]:
        raise TypeError("index set is infinite; use a truncation")

    def check(self, i: Label) -> None:
        if i not in self:
            raise UnknownIndexError(i)

    def entry(self, i: Label, j: Label) -> int:
        self.check(i)
        self.check(j)
        return int(i in self.predecessors(j))


class ExplicitMatrix(CountableMatrix):
    """Finite matrix given by explicit successor lists."""

    finite = True

    def __init__(self, labels: Iterable[Label], successors: dict):
        self._labels = list(labels)
        self._index = {lab: k for k, lab in enumerate(self._labels)}
        if len(self._index) != len(self._labels):
            raise ValueError("duplicate labels")
        self._succ = {i: list(dict.fromkeys(successors.get(i, ()))) for i in self._labels}
        pred = {i: [] for i in self._labels}
        for i in self._labels:
            for j in self._succ[i]:
                if j not in self._index:
                    raise UnknownIndexError(j)
                pred[j].append(i)
        self._pred = pred

    @classmethod
    def from_array(cls, array, labels: Sequence[Label] | None = None) -> "ExplicitMatrix":
        a = np.asarray(array)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        if labels is None:
            labels = [str(k) for k in range(a.shape[0])]
        labels = list(labels)
        succ = {labels[r]: [labels[c] for c in np.flatnonzero(a[r])] for r in range(a.shape[0])}
        return cls(labels, succ)

    def successors(self, i):
        self.check(i)
        return self._succ[i]

    def predecessors(self, i):
        self.check(i)
        return self._pred[i]

    def __contains__(self, i):
        try:
            return i in self._index
        except TypeError:
            return False

    def labels(self):
        return list(self._labels)

    def to_array(self) -> np.ndarray:
        n = len(self._labels)
        a = np.zeros((n, n), dtype=np.int64)
        for i in self._labels:
            for j in self._succ[i]:
                a[self._index[i], self._index[j]] = 1
        return a


class RuleMatrix(CountableMatrix):
    """Matrix whose rows and columns are generated on demand by rules."""

    def __init__(
        self,
        successors: Callable[[Label], Sequence[Label]],
        predecessors: Callable[[Label], Sequence[Label]],
        contains: Callable[[Label], bool],
        level_of: Callable[[Label], int] | None = None,
        labels: Sequence[Label] | None = None,
        name: str = "",
    ):
        self._succ = successors
        self._pred = predecessors
        self._contains = contains
        self._level = level_of
        self._labels = list(labels) if labels is not None else None
        self.finite = labels is not None
        self.name = name

    def successors(self, i):
        self.check(i)
        return self._succ(i)

    def predecessors(self, i):
        self.check(i)
        return self._pred(i)

    def __contains__(self, i):
        try:
            return bool(self._contains(i))
        except (TypeError, ValueError):
            return False

    def level_of(self, i):
        return 0 if self._level is None else self._level(i)

    def labels(self):
        if self._labels is None:
            return super().labels()
        return list(self._labels)


def full_shift(n: int) -> RuleMatrix:
    """All-ones ``n x n`` matrix given by rules (labels ``"0" .. "n-1"``)."""
    labels = [str(k) for k in range(n)]
    members = set(labels)
    return RuleMatrix(
        successors=lambda i: labels,
        predecessors=lambda i: labels,
        contains=lambda i: i in members,
        labels=labels,
        name=f"full-{n}-shift",
    )


@dataclass
class FiniteMatrix:
    """Principal submatrix of a :class:`CountableMatrix` on ``labels``.

    ``closed`` records that no successor of a member leaves the set, so the
    submatrix carries the whole forward dynamics of its members.
    """

    labels: tuple
    csr: sps.csr_matrix
    closed: bool = False
    depth: int | None = None

    def __post_init__(self):
        self.index = {lab: k for k, lab in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def dense(self) -> np.ndarray:
        return self.csr.toarray().astype(np.int64)

    def entry(self, i, j) -> int:
        return int(self.csr[self.index[i], self.index[j]])

    def successors(self, i) -> list:
        r = self.index[i]
        cols = self.csr.indices[self.csr.indptr[r]:self.csr.indptr[r + 1]]
        return [self.labels[c] for c in sorted(cols)]

    @classmethod
    def from_dense(cls, array, labels: Sequence[Label] | None = None) -> "FiniteMatrix":
        a = np.asarray(array)
        if labels is None:
            labels = [str(k) for k in range(a.shape[0])]
        return cls(tuple(labels), sps.csr_matrix(a.astype(np.int8)), closed=True)

    def as_matrix(self) -> ExplicitMatrix:
        return ExplicitMatrix(self.labels, {i: self.successors(i) for i in self.labels})


def submatrix(M: CountableMatrix, labels: Sequence[Label]) -> FiniteMatrix:
    labels = tuple(labels)
    index = {lab: k for k, lab in enumerate(labels)}
    rows, cols = [], []
    closed = True
    for r, i in enumerate(labels):
        for j in M.successors(i):
            c = index.get(j)
            if c is None:
                closed = False
            else:
                rows.append(r)
                cols.append(c)
    n = len(labels)
    data = np.ones(len(rows), dtype=np.int8)
    csr = sps.csr_matrix((data, (rows, cols)), shape=(n, n))
    csr.sum_duplicates()
    csr.data[:] = 1
    return FiniteMatrix(labels, csr, closed=closed)


# --------------------------------------------------------------------------
# powers


def column_powers(
    M: CountableMatrix, j: Label, n_max: int, weight=1, avoid: bool = False
) -> Iterator[dict]:
    """Yield ``{i: m_ij(n) * weight**n}`` for ``n = 0 .. n_max``.

    With ``avoid`` only paths that do not visit ``j`` at an interior
    position are counted (first-return / taboo counts).
    """
    M.check(j)
    w = {j: weight ** 0}
    yield w
    for n in range(1, n_max + 1):
        nxt: dict = defaultdict(int)
        for k, c in w.items():
            if avoid and k == j and n > 1:
                continue
            cw = c * weight
            for p in M.predecessors(k):
                nxt[p] += cw
        w = dict(nxt)
        yield w


def power_entry(M: CountableMatrix, i: Label, j: Label, n: int) -> int:
    """Exact entry ``m_ij(n)`` of ``M**n`` (number of admissible words i..j)."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    M.check(i)
    w = {}
    for w in column_powers(M, j, n):
        pass
    return int(w.get(i, 0))


def diagonal_counts(M: CountableMatrix, j: Label, n_max: int) -> list[int]:
    """``[m_jj(0), ..., m_jj(n_max)]``."""
    return [int(w.get(j, 0)) for w in column_powers(M, j, n_max)]


# --------------------------------------------------------------------------
# truncations and spectral radius


def truncation(M: CountableMatrix, depth: int, base: Label) -> FiniteMatrix:
    """Arcs within ``depth`` successor steps of ``base`` inside the level-``depth`` prefix."""
    if depth < 0:
        raise ParameterError("depth must be nonnegative")
    M.check(base)
    if M.level_of(base) > depth:
        raise EmptyTruncationError(f"{base!r} is not in the level-{depth} prefix")
    seen = {base}
    order = [base]
    frontier = [base]
    for _ in range(depth):
        nxt = []
        for i in frontier:
            for j in M.successors(i):
                if j not in seen and M.level_of(j) <= depth:
                    seen.add(j)
                    order.append(j)
                    nxt.append(j)
        frontier = nxt
        if not frontier:
            break
    A = submatrix(M, order)
    A.depth = depth
    return A


@dataclass(frozen=True)
class Radius:
    """Collatz-Wielandt bracket ``lower <= r <= upper`` for a spectral radius."""

    lower: float
    upper: float
    irreducible: bool
    method: str

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def __float__(self):
        return self.value


_DENSE_LIMIT = 400


def spectral_radius(A: FiniteMatrix, tol: float = 1e-10, max_iter: int = 20000) -> Radius:
    """Spectral radius of a nonnegative matrix with a certified bracket.

    The matrix is split into strongly connected components; each nontrivial
    block is handled by ``(A + I)``-shifted power iteration with
    Collatz-Wielandt bounds.  Blocks that are large or do not converge
    within ``max_iter`` (long cycles make the shifted spectrum nearly
    degenerate) switch to bisection on the resolvent: ``(t I - A) x = 1``
    has a positive solution iff ``t > r``, and that solution also yields
    Collatz-Wielandt bounds ``t - 1/min x <= r <= t - 1/max x``.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    S = sps.csr_matrix(A.csr, dtype=np.float64)
    n = S.shape[0]
    if n == 0:
        raise EmptyTruncationError("empty matrix")
    if S.nnz == 0:
        return Radius(0.0, 0.0, irreducible=False, method="zero")
    ncomp, comp = connected_components(S, directed=True, connection="strong")
    irreducible = ncomp == 1
    lo_best = hi_best = 0.0
    methods = set()
    order = np.argsort(comp, kind="stable")
    bounds = np.flatnonzero(np.diff(comp[order])) + 1
    diag = S.diagonal()
    for idx in np.split(order, bounds):
        if len(idx) == 1:
            if diag[idx[0]] > 0:
                lo_best, hi_best = max(lo_best, 1.0), max(hi_best, 1.0)
                methods.add("self-loop")
            continue
        block = S[idx][:, idx]
        lo, hi, how = _irreducible_radius(block, tol, max_iter)
        lo_best, hi_best = max(lo_best, lo), max(hi_best, hi)
        methods.add(how)
    return Radius(lo_best, hi_best, irreducible=irreducible, method="+".join(sorted(methods)))


def _irreducible_radius(B: sps.csr_matrix, tol: float, max_iter: int):
    rows = np.asarray(B.sum(axis=1)).ravel()
    lo, hi = float(rows.min()), float(rows.max())
    if hi - lo < tol:
        return lo, hi, "row-sums"
    if B.shape[0] <= _DENSE_LIMIT:
        lo2, hi2, ok = _shifted_power(B.toarray(), tol, max_iter)
        if ok:
            return lo2, hi2, "collatz-wielandt"
        lo, hi = max(lo, lo2), min(hi, hi2)
    return _resolvent_bisection(B, lo, hi, tol)


def _shifted_power(D: np.ndarray, tol: float, max_iter: int):
    v = np.ones(D.shape[0])
    lo, hi = 0.0, math.inf
    for _ in range(max_iter):
        w = D @ v
        ratio = w / v
        lo, hi = max(lo, ratio.min()), min(hi, ratio.max())
        if hi - lo < tol:
            return lo, hi, True
        v = v + w
        v /= v.max()
    return lo, hi, False


def _resolvent_bisection(B: sps.csr_matrix, lo: float, hi: float, tol: float):
    n = B.shape[0]
    eye = sps.identity(n, format="csc")
    Bc = B.tocsc()
    ones = np.ones(n)
    for _ in range(400):
        if hi - lo < tol:
            break
        t = 0.5 * (lo + hi)
        try:
            x = splu((t * eye - Bc).tocsc()).solve(ones)
        except RuntimeError:  # exactly singular: t is an eigenvalue, so t <= r
            lo = t
            continue
        if np.all(np.isfinite(x)) and x.min() > 0:
            hi = min(hi, t - 1.0 / x.max())
            lo = max(lo, t - 1.0 / x.min())
        else:
            lo = t
    return lo, hi, "resolvent"


# --------------------------------------------------------------------------
# Gurevich entropy


@dataclass(frozen=True)
class TruncationBound:
    depth: int
    size: int
    log_radius: float
    log_upper: float
    irreducible: bool


@dataclass
class EntropyEstimate:
    """Nondecreasing truncation lower bounds for ``log lambda_M``."""

    lower_bounds: list[TruncationBound]
    value: float
    status: str
    tol: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def gurevich_entropy(
    M: CountableMatrix,
    base: Label,
    max_depth: int,
    tol: float = 1e-9,
    schedule: Iterable[int] | None = None,
) -> EntropyEstimate:
    """Certified lower bounds ``log r(truncation(M, k, base))`` over a depth schedule.

    ``schedule`` defaults to ``1 .. max_depth``.  Stops with status
    ``converged`` when two consecutive values differ by less than ``tol``
    or when a truncation of a finite matrix is closed under successors
    and contains every index; otherwise ``budget-exhausted``.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    depths = list(schedule) if schedule is not None else list(range(1, max_depth + 1))
    if not depths:
        raise ParameterError("empty depth schedule")
    bounds: list[TruncationBound] = []
    status = "budget-exhausted"
    best = -math.inf
    for k in depths:
        A = truncation(M, k, base)
        rad = spectral_radius(A, tol=tol * 1e-2)
        best = max(best, _log(rad.lower))
        prev = bounds[-1].log_radius if bounds else None
        bounds.append(TruncationBound(k, A.size, best, _log(rad.upper), rad.irreducible))
        whole = M.finite and A.closed and A.size == len(M.labels())
        if whole:
            status = "converged"
            break
        if prev is not None and math.isfinite(prev) and best - prev < tol:
            status = "converged"
            break
    return EntropyEstimate(bounds, bounds[-1].log_radius, status, tol)


# --------------------------------------------------------------------------
# generating functions


@dataclass
class SeriesResult:
    """Partial sum of ``sum_n m_ij(n) z**n`` with a tail diagnosis.

    ``tail_flag`` is ``convergent-estimate`` (geometric tail bound
    ``tail_bound`` from the empirical ratio ``ratio`` < ``q_max``),
    ``diverging`` (partial sums passed the ceiling) or ``inconclusive``.
    """

    partial_sum: object
    tail_flag: str
    tail_bound: float | None
    ratio: float | None
    terms: list

    @property
    def estimate(self) -> float:
        if self.tail_flag != "convergent-estimate":
            return float(self.partial_sum)
        return float(self.partial_sum) + self.tail_bound


def _tail(terms: list, exhausted: bool, q_max: float):
    """Geometric tail bound from the last quarter of ``terms``."""
    if exhausted:
        return "convergent-estimate", 0.0, 0.0
    N = len(terms) - 1
    if N < 4:
        return "inconclusive", None, None
    start = N - max(2, (N + 1) // 4)
    window = [float(t) for t in terms[start:]]
    if any(t <= 0 for t in window):
        return "inconclusive", None, None
    q = max(b / a for a, b in zip(window, window[1:]))
    if q >= q_max:
        return "inconclusive", None, q
    return "convergent-estimate", window[-1] * q / (1 - q), q


def column_series(
    M: CountableMatrix,
    j: Label,
    z,
    N: int,
    rows: Iterable[Label] | None = None,
    ceiling: float = 1e12,
    q_max: float = 0.999,
) -> dict:
    """``{i: SeriesResult}`` for the column-``j`` series at ``z`` (one backward pass)."""
    if not z > 0:
        raise ParameterError("z must be positive")
    if N < 0:
        raise ParameterError("N must be nonnegative")
    layers = list(column_powers(M, j, N, weight=z))
    exhausted = not layers[-1]
    if rows is None:
        rows = set().union(*layers)
    out = {}
    for i in rows:
        terms = [w.get(i, 0) for w in layers]
        total = sum(terms, 0 * z)
        if float(total) > ceiling:
            out[i] = SeriesResult(total, "diverging", None, None, terms)
            continue
        flag, bound, q = _tail(terms, exhausted, q_max)
        out[i] = SeriesResult(total, flag, bound, q, terms)
    return out


def generating_fn(
    M: CountableMatrix, i: Label, j: Label, z, N: int, ceiling: float = 1e12, q_max: float = 0.999
) -> SeriesResult:
    """``sum_{n<=N} m_ij(n) z**n`` plus tail diagnosis; exact when ``z`` is a Fraction."""
    M.check(i)
    return column_series(M, j, z, N, rows=[i], ceiling=ceiling, q_max=q_max)[i]


# --------------------------------------------------------------------------
# Vere-Jones classification


@dataclass
class Recurrence:
    status: str  # recurrent | transient | inconclusive
    first_return_sum: float
    tail_bound: float | None
    first_returns: list[int] = field(repr=False)


def vere_jones_classify(
    M: CountableMatrix, lambda_est, j: Label, N: int, tol: float = 1e-9
) -> Recurrence:
    """Recurrent/transient test at ``lambda_est`` via first-return loops at ``j``.

    ``F = sum_n f_jj(n) lambda**-n`` where ``f_jj(n)`` counts loops at ``j``
    not visiting ``j`` in between.  Recurrent iff ``F = 1`` (Vere-Jones).
    """
    if not lambda_est > 0:
        raise ParameterError("lambda must be positive")
    layers = list(column_powers(M, j, N, avoid=True))
    counts = [int(w.get(j, 0)) if n > 0 else 0 for n, w in enumerate(layers)]
    lam = lambda_est
    terms = [Fraction(c) / Fraction(lam) ** n if isinstance(lam, (int, Fraction)) else c * float(lam) ** -n
             for n, c in enumerate(counts)]
    F = float(sum(terms))
    # taboo mass sitting on j is absorbed, so the loop count dies out exactly
    exhausted = N > 0 and not any(k != j for k in layers[-1])
    flag, bound, _ = _tail(terms[1:] if len(terms) > 1 else terms, exhausted, 0.999)
    if N < 2 or flag != "convergent-estimate":
        return Recurrence("inconclusive", F, bound, counts)
    if bound < tol and abs(F - 1.0) <= tol + bound:
        status = "recurrent"
    elif F + bound < 1.0 - tol:
        status = "transient"
    else:
        status = "inconclusive"
    return Recurrence(status, F, bound, counts)
