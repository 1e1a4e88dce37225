"""Subeigenvectors, residual checks and constant/bounded-slope models.

A positive vector ``v`` with ``Mv <= lam v`` defines a piecewise-affine model:
arc ``i`` gets length ``v_i`` and slope ``lam_i = (Mv)_i / v_i``, and the
image of arc ``i`` (its edge path) has total length ``lam_i v_i``.
"""
from __future__ import annotations

import math
import warnings
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np
import sympy as sp
from scipy.sparse.csgraph import connected_components

from .exact import AlgebraicValue, algebraic_field, is_exact
from .graph import FWD, MarkovMap, PointCoord, step_start
from .transition import (
    CountableMatrix,
    EntropyEstimate,
    ExplicitMatrix,
    FiniteMatrix,
    ParameterError,
    column_series,
    gurevich_entropy,
    spectral_radius,
    submatrix,
)


class PreconditionError(ValueError):
    pass


class ReducibleMatrixError(ValueError):
    pass


class NotSummableError(ValueError):
    pass


class PositiveLengthCylinderWarning(UserWarning):
    """A nested chain of cylinders whose lengths do not shrink to zero."""


def _finite(obj) -> FiniteMatrix:
    if isinstance(obj, FiniteMatrix):
        return obj
    if isinstance(obj, MarkovMap):
        obj = obj.matrix()
    if isinstance(obj, CountableMatrix):
        return submatrix(obj, obj.labels())
    return FiniteMatrix.from_dense(obj)


def _matrix(obj) -> CountableMatrix:
    if isinstance(obj, MarkovMap):
        return obj.matrix()
    if isinstance(obj, FiniteMatrix):
        return obj.as_matrix()
    if isinstance(obj, CountableMatrix):
        return obj
    return ExplicitMatrix.from_array(obj)


def _zero(x):
    return x - x


# --------------------------------------------------------------------------
# the vector type


@dataclass
class SubEigenvector:
    """``(lam, v)`` with ``Mv <= lam v``; strict rows are listed in ``deficiency``.

    ``total`` is ``None`` when the entries are not summable on the truncation.
    ``status`` is ``inconclusive`` when a series tail could not be certified.
    """

    lam: object
    entries: Mapping
    matrix: CountableMatrix
    deficiency: frozenset = frozenset()
    total: object | None = None
    status: str = "ok"
    report: "ResidualReport | None" = field(default=None, repr=False)
    defect: object | None = None

    def __getitem__(self, i):
        return self.entries[i]

    def image_length(self, i):
        return sum((self.entries[j] for j in self.matrix.successors(i)), _zero(self.entries[i]))

    def slope(self, i):
        """Declared slope: ``lam`` off the deficiency set, ``(Mv)_i / v_i`` on it."""
        if i in self.deficiency:
            return self.image_length(i) / self.entries[i]
        return self.lam

    def arcs(self) -> list:
        return list(self.entries)


# --------------------------------------------------------------------------
# Perron vectors


def perron_vector(A, tol: float = 1e-12, exact: bool = False) -> SubEigenvector:
    """Perron eigenpair of an irreducible finite 0/1 matrix, normalized to sum 1.

    With ``exact`` the eigenvalue is represented as an element of the number
    field it generates (rational when the characteristic factor is linear).
    """
    F = _finite(A)
    labels = list(F.labels)
    ncomp, _ = connected_components(F.csr, directed=True, connection="strong")
    if ncomp != 1 or F.csr.nnz == 0:
        raise ReducibleMatrixError("Perron vector needs an irreducible matrix")
    D = F.dense()
    vals, vecs = np.linalg.eig(D.astype(float))
    k = int(np.argmax(vals.real))
    lam_f = float(vals[k].real)
    if lam_f <= 1 + tol:
        raise PreconditionError(f"spectral radius {lam_f:.12g} is not > 1")
    M = F.as_matrix()
    if not exact:
        v = np.abs(vecs[:, k].real)
        v = v / v.sum()
        lam_f = float(spectral_radius(F, tol=tol).value)
        entries = {lab: float(x) for lab, x in zip(labels, v)}
        return SubEigenvector(lam_f, entries, M, frozenset(), 1.0)
    lam, vec = _exact_perron(D, lam_f)
    total = sum(vec[1:], vec[0])
    entries = {lab: x / total for lab, x in zip(labels, vec)}
    return SubEigenvector(lam, entries, M, frozenset(), Fraction(1))


def _exact_perron(D: np.ndarray, approx: float):
    from sympy.polys.matrices import DomainMatrix

    x = sp.Symbol("x")
    n = D.shape[0]
    cp = sp.Matrix(D.tolist()).charpoly(x).as_expr()
    factors = [f for f, _ in sp.factor_list(cp)[1]]
    best = min(factors, key=lambda f: min(abs(complex(r) - approx) for r in sp.Poly(f, x).nroots()))
    K, theta = algebraic_field(sp.Poly(best, x), approx)
    if K is None:
        shifted = sp.Matrix(D.tolist()) - sp.Rational(theta.numerator, theta.denominator) * sp.eye(n)
        basis = shifted.nullspace()[0]
        vec = [Fraction(int(sp.fraction(e)[0]), int(sp.fraction(e)[1])) for e in basis]
        if vec[0] < 0:
            vec = [-e for e in vec]
        return theta, vec
    rows = [[K.from_sympy(sp.Integer(int(D[r, c]))) - (theta.rep if r == c else K.zero)
             for c in range(n)] for r in range(n)]
    basis = DomainMatrix(rows, (n, n), K).nullspace().to_list()[0]
    vec = [AlgebraicValue(K, e) for e in basis]
    if vec[0].sign() < 0:
        vec = [-e for e in vec]
    return theta, vec


# --------------------------------------------------------------------------
# residuals


@dataclass(frozen=True)
class RowResidual:
    arc: Hashable
    image: object  # (Mv)_i
    scaled: object  # lam * v_i
    slack: object
    kind: str  # eigen | subeigen | violation


@dataclass
class ResidualReport:
    lam: object
    rows: list[RowResidual]
    partial_sum: object
    skipped: list
    summability: str | None = None

    @property
    def violations(self) -> list[RowResidual]:
        return [r for r in self.rows if r.kind == "violation"]

    @property
    def deficient(self) -> list:
        return [r.arc for r in self.rows if r.kind == "subeigen"]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def all_equal(self) -> bool:
        return all(r.kind == "eigen" for r in self.rows)

    def row(self, arc) -> RowResidual:
        for r in self.rows:
            if r.arc == arc:
                return r
        raise KeyError(arc)


def _classify(slack, scale, tol) -> str:
    if is_exact(slack):
        s = slack.sign() if isinstance(slack, AlgebraicValue) else (slack > 0) - (slack < 0)
        return "eigen" if s == 0 else ("subeigen" if s > 0 else "violation")
    bound = tol * max(1.0, abs(float(scale)))
    if abs(slack) <= bound:
        return "eigen"
    return "subeigen" if slack > 0 else "violation"


def check_subeigenvector(
    M, lam, v: Mapping, rows: Iterable | None = None, tol: float = 1e-12,
    leo_witness: int | None = None,
) -> ResidualReport:
    """Compare ``(Mv)_i`` with ``lam v_i`` row by row.

    Rows whose successors have no value in ``v`` are listed in ``skipped``.
    When ``leo_witness`` ``n0`` is given (every arc reaches every arc in
    ``n0`` steps), ``lam**n0 * v_i`` bounds every partial sum of ``v``;
    the outcome of that check is recorded in ``summability``.
    """
    M = _matrix(M)
    entries = v.entries if isinstance(v, SubEigenvector) else v
    rows = list(entries) if rows is None else list(rows)
    out, skipped = [], []
    total = None
    for i in rows:
        vi = entries[i]
        try:
            image = sum((entries[j] for j in M.successors(i)), _zero(vi))
        except KeyError:
            skipped.append(i)
            continue
        scaled = lam * vi
        slack = scaled - image
        kind = _classify(slack, scaled, tol)
        if not (vi > 0):
            kind = "violation"
        out.append(RowResidual(i, image, scaled, slack, kind))
        total = vi if total is None else total + vi
    summability = None
    if leo_witness is not None and out:
        smallest = min(entries[r.arc] for r in out)
        bound = lam ** leo_witness * smallest
        ok = total <= bound if is_exact(total) else float(total) <= float(bound) * (1 + tol)
        summability = (f"partial sum {float(total):.12g} <= lam^{leo_witness} * min v = {float(bound):.12g}"
                       if ok else f"partial sum exceeds lam^{leo_witness} * min v = {float(bound):.12g}")
    return ResidualReport(lam, out, total, skipped, summability)


# --------------------------------------------------------------------------
# subeigenvectors from first-passage series


def vj_subeigenvector(
    M,
    lam,
    j,
    N: int = 200,
    tol: float = 1e-9,
    entropy_lower: float | None = None,
    exact: bool = False,
    rows: Sequence | None = None,
    entropy_depth: int = 8,
) -> SubEigenvector:
    """``v_i = sum_n m_ij(n) lam**-n``: a ``lam``-subeigenvector deficient only at ``j``.

    Needs ``log lam`` strictly above the entropy lower bound (computed when
    not supplied).  Finite matrices in ``exact`` mode are solved exactly
    from ``(I - M/lam) v = e_j``; otherwise ``N`` series terms plus a
    geometric tail estimate are used and uncertified tails mark the result
    ``inconclusive``.  ``defect`` is ``(Mv)_j - lam (v_j - 1)``.
    """
    M = _matrix(M)
    M.check(j)
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    if entropy_lower is None:
        if M.finite:
            F = submatrix(M, M.labels())
            r = spectral_radius(F, tol=1e-12)
            entropy_lower = math.log(r.upper) if r.upper > 0 else -math.inf
        else:
            entropy_lower = gurevich_entropy(M, j, entropy_depth).value
    if not math.log(float(lam)) > entropy_lower:
        raise PreconditionError(
            f"log lambda = {math.log(float(lam)):.12g} is not above the entropy bound {entropy_lower:.12g}")
    status = "ok"
    if exact and M.finite and is_exact(lam):
        lam = Fraction(lam)
        labels = M.labels()
        n = len(labels)
        pos = {lab: k for k, lab in enumerate(labels)}
        z = 1 / sp.Rational(lam.numerator, lam.denominator)
        system = sp.eye(n)
        for i in labels:
            for s in M.successors(i):
                system[pos[i], pos[s]] -= z
        rhs = sp.zeros(n, 1)
        rhs[pos[j]] = 1
        sol = system.LUsolve(rhs)
        entries = {lab: Fraction(int(sp.fraction(sol[pos[lab]])[0]), int(sp.fraction(sol[pos[lab]])[1]))
                   for lab in labels}
    else:
        z = 1 / Fraction(lam) if exact and is_exact(lam) else 1.0 / float(lam)
        series = column_series(M, j, z, N)
        if any(s.tail_flag != "convergent-estimate" for s in series.values()):
            status = "inconclusive"
        if exact and is_exact(lam):
            entries = {i: s.partial_sum for i, s in series.items()}
        else:
            lam = float(lam)
            entries = {i: s.estimate for i, s in series.items()}
        if M.finite:
            entries = {i: entries.get(i, 0 * z) for i in M.labels()}
    if rows is None:
        rows = [i for i in entries if entries[i] > 0 and all(s in entries for s in M.successors(i))]
    report = check_subeigenvector(M, lam, entries, rows=rows, tol=tol)
    image_j = sum((entries[s] for s in M.successors(j)), _zero(entries[j]))
    defect = image_j - lam * (entries[j] - 1)
    total = sum(entries.values(), _zero(entries[j])) if M.finite else None
    return SubEigenvector(lam, entries, M, frozenset(report.deficient), total, status, report, defect)


# --------------------------------------------------------------------------
# models


@dataclass
class ConstantSlopeModel:
    """Piecewise-affine realization: arc ``i`` has length ``lengths[i]`` and slope ``slopes[i]``."""

    fmap: MarkovMap
    lam: object
    lengths: dict
    slopes: dict
    mode: str  # constant | bounded
    deficiency: frozenset = frozenset()
    numeric: str = "exact"

    def __post_init__(self):
        self._vertex_rep = {}
        for a in self.lengths:
            t, h = self.fmap.endpoints(a)
            self._vertex_rep.setdefault(t, PointCoord(a, _zero(self.lengths[a])))
            self._vertex_rep.setdefault(h, PointCoord(a, self.lengths[a]))

    @property
    def arcs(self) -> list:
        return list(self.lengths)

    def vertex_point(self, vertex) -> PointCoord:
        return self._vertex_rep[vertex]

    def vertex_of(self, x: PointCoord):
        """Vertex at ``x`` or ``None`` for interior points."""
        t, h = self.fmap.endpoints(x.arc)
        if x.offset == 0:
            return t
        if x.offset == self.lengths[x.arc]:
            return h
        return None

    def point(self, arc, offset) -> PointCoord:
        """Validated, canonical point: vertices normalize to one representative."""
        if arc not in self.lengths:
            raise KeyError(arc)
        if self.numeric == "float":
            offset = float(offset)
        if offset < 0 or offset > self.lengths[arc]:
            raise ValueError(f"offset {offset} outside arc {arc!r} of length {self.lengths[arc]}")
        x = PointCoord(arc, offset)
        v = self.vertex_of(x)
        return x if v is None else self._vertex_rep[v]

    def image_length_identity(self) -> list[tuple]:
        """``(arc, path length, slope * length, equal)`` for every arc."""
        out = []
        for a in self.lengths:
            path_len = sum((self.lengths[b] for b, _ in self.fmap.image_path(a)), _zero(self.lengths[a]))
            rhs = self.slopes[a] * self.lengths[a]
            if is_exact(path_len) and is_exact(rhs):
                eq = path_len == rhs
            else:
                eq = abs(float(path_len) - float(rhs)) <= 1e-12 * max(1.0, abs(float(rhs)))
            out.append((a, path_len, rhs, eq))
        return out

    def position(self, x: PointCoord) -> float:
        """Coordinate on the line for interval realizations (arcs laid out in vertex order)."""
        order = self.fmap.interval_order
        if order is None:
            raise TypeError("model is not an interval realization")
        starts = self._starts()
        return starts[x.arc] + float(x.offset)

    def _starts(self) -> dict:
        if not hasattr(self, "_start_cache"):
            order = self.fmap.interval_order
            where = {}
            for a in self.lengths:
                t, _ = self.fmap.endpoints(a)
                where[order.index(t)] = a
            acc, starts = 0.0, {}
            for k in sorted(where):
                starts[where[k]] = acc
                acc += float(self.lengths[where[k]])
            self._start_cache = starts
        return self._start_cache


def _partial_sums_by_level(M: CountableMatrix, arcs: Sequence, v: Mapping) -> list:
    by_level: dict = {}
    for a in arcs:
        by_level.setdefault(M.level_of(a), []).append(v[a])
    sums, acc = [], None
    for lvl in sorted(by_level):
        part = sum(by_level[lvl][1:], by_level[lvl][0])
        acc = part if acc is None else acc + part
        sums.append((lvl, acc))
    return sums


def _summability(fmap: MarkovMap, v: Mapping, ceiling: float, q_max: float = 0.999):
    """Total of ``v`` over the materialized arcs, or ``None`` when it diverges."""
    arcs = fmap.arc_ids
    M = fmap.matrix()
    if M.finite:
        return sum((v[a] for a in arcs[1:]), v[arcs[0]])
    sums = _partial_sums_by_level(M, arcs, v)
    total = sums[-1][1]
    if float(total) > ceiling:
        return None
    incs = [float(b[1]) - float(a[1]) for a, b in zip(sums, sums[1:])]
    tail = incs[-max(2, len(incs) // 4):]
    if len(tail) >= 2 and all(x > 0 for x in tail[:-1]):
        q = max(b / a for a, b in zip(tail, tail[1:]))
        if q >= q_max:
            return None
    return total


def shrinking_scan(v: SubEigenvector, starts: Iterable, steps: int = 30) -> list[tuple]:
    """Follow the largest-``Delta`` successor for ``steps`` refinements from each start.

    Returns ``(word, first Delta, last Delta)`` for chains whose ``Delta``
    did not halve over the second half of the walk, i.e. cylinders that look
    like they keep positive length.
    """
    M = v.matrix
    flagged = []
    for s in starts:
        word, d = [s], v[s]
        history = [d]
        for _ in range(steps):
            denom = v.slope(word[-1])
            best = None
            for nxt in M.successors(word[-1]):
                cand = _delta_step(v, word, nxt, d, denom)
                if best is None or cand > best[1]:
                    best = (nxt, cand)
            word.append(best[0])
            d = best[1]
            history.append(d)
        if history[-1] > 0 and float(history[-1]) > 0.5 * float(history[steps // 2]):
            flagged.append((tuple(word), history[0], history[-1]))
    return flagged


def _delta_step(v, word, nxt, d, denom):
    # Delta(w j) = Delta(w) * v_j / (v_{last} * slope(last))
    return d * v[nxt] / (v[word[-1]] * denom)


def build_constant_slope_model(
    fmap: MarkovMap, v: SubEigenvector, numeric: str | None = None, ceiling: float = 1e12,
    scan_starts: int = 8, scan_steps: int = 30,
) -> ConstantSlopeModel:
    """Normalize ``v`` to total length 1 and attach per-arc slopes.

    Rejects vectors that are not positive, violate ``Mv <= lam v``, have
    infinitely many deficient rows or are not summable.  On infinite
    families a greedy scan looks for cylinders that fail to shrink and
    reports them with :class:`PositiveLengthCylinderWarning`.
    """
    arcs = fmap.arc_ids
    if any(not v[a] > 0 for a in arcs):
        raise ValueError("lengths must be strictly positive")
    infinite = not fmap.is_finite()
    if infinite:
        top = sorted(arcs, key=lambda a: float(v[a]), reverse=True)[:scan_starts]
        flagged = shrinking_scan(v, top, scan_steps)
        if flagged:
            word, first, last = min(flagged, key=lambda f: float(f[2]))
            warnings.warn(PositiveLengthCylinderWarning(
                f"{len(flagged)} cylinder chain(s) keep positive length; e.g. the chain starting "
                f"{list(word[:3])} has length {float(last):.6g} after {scan_steps} refinements "
                f"(started at {float(first):.6g}), so a slope-lam model would collapse an arc"),
                stacklevel=2)
    report = check_subeigenvector(fmap.matrix(), v.lam, v.entries, rows=arcs)
    if report.violations:
        raise ValueError(f"Mv <= lam v fails on rows {[r.arc for r in report.violations][:5]}")
    if report.skipped:
        raise ValueError(f"rows without successor values: {report.skipped[:5]}")
    deficiency = frozenset(report.deficient)
    if infinite and deficiency and len(deficiency) == len(arcs):
        raise PreconditionError("deficiency does not look finite: every materialized row is strict")
    total = _summability(fmap, v.entries, ceiling)
    if total is None:
        raise NotSummableError(
            "v is not summable on the materialized arcs; the constant-slope construction "
            "needs a summable lam-eigenvector (finitely deficient for bounded slope)")
    if numeric is None:
        numeric = "exact" if all(is_exact(v[a]) for a in arcs) else "float"
    lengths, slopes = {}, {}
    for r in report.rows:
        a = r.arc
        if numeric == "float":
            lengths[a] = float(v[a]) / float(total)
            slopes[a] = float(r.image) / float(v[a])
        else:
            lengths[a] = v[a] / total
            slopes[a] = r.image / v[a]
    mode = "bounded" if deficiency else "constant"
    lam = float(v.lam) if numeric == "float" else v.lam
    return ConstantSlopeModel(fmap, lam, lengths, slopes, mode, deficiency, numeric)


def evaluate_model(model: ConstantSlopeModel, x: PointCoord) -> PointCoord:
    """Image of ``x``: offset ``slope * t`` along the image path of its arc.

    Endpoints go through the vertex map; a point landing on a vertex is
    returned as that vertex's canonical representative.
    """
    fmap = model.fmap
    x = model.point(x.arc, x.offset)
    vtx = model.vertex_of(x)
    if vtx is not None:
        end = "tail" if x.offset == 0 else "head"
        return model.vertex_point(fmap.vertex_image(x.arc, end))
    s = model.slopes[x.arc] * x.offset
    path = fmap.image_path(x.arc)
    acc = _zero(s)
    for k, (b, d) in enumerate(path):
        if s == acc:
            return model.vertex_point(step_start(fmap, (b, d)))
        nxt = acc + model.lengths[b]
        if s < nxt or k == len(path) - 1:
            local = s - acc
            if model.numeric == "float":
                local = min(local, float(model.lengths[b]))
            off = local if d == FWD else model.lengths[b] - local
            return model.point(b, off)
        acc = nxt
    raise AssertionError("unreachable")


@dataclass
class LipschitzReport:
    hausdorff_dim: int
    lipschitz: float
    product: float
    entropy: float
    gap: float
    epsilon: float
    holds: bool

    def rows(self) -> list[tuple]:
        return [("hausdorff_dim", self.hausdorff_dim), ("lipschitz", self.lipschitz),
                ("hd_log_lip", self.product), ("entropy_lower", self.entropy),
                ("gap", self.gap), ("epsilon", self.epsilon), ("holds", self.holds)]


def lipschitz_report(model: ConstantSlopeModel, entropy: EntropyEstimate, epsilon: float) -> LipschitzReport:
    """Dimension/Lipschitz product of a slope model against an entropy estimate.

    A countably affine graph with its length metric has Hausdorff dimension
    1, and the slope bound ``lam`` is a Lipschitz constant, so the product
    is ``log+ lam``.  ``holds`` certifies ``log+ lam < h + epsilon`` using
    the entropy lower bound.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    lam = float(model.lam)
    log_lam = math.log(lam)
    if log_lam < entropy.value - max(entropy.tol, 1e-12):
        raise PreconditionError(
            f"log lambda = {log_lam:.12g} is below the entropy lower bound {entropy.value:.12g}")
    product = 1 * max(log_lam, 0.0)
    return LipschitzReport(1, lam, product, entropy.value, log_lam - entropy.value,
                           epsilon, product < entropy.value + epsilon)
