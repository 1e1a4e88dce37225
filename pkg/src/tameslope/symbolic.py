"""Cylinder lengths, arc measures, itineraries, cylinder intervals and the length metric.

``Delta([i0 .. in]) = v_in / (lam_i0 * ... * lam_i(n-1))`` is the length of
the cylinder ``[i0 .. in]`` in the slope model built from ``v``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .exact import is_exact
from .graph import FWD, CylinderWord, MarkovMap, PointCoord
from .slope import ConstantSlopeModel, SubEigenvector, evaluate_model

__all__ = [
    "PointCoord",
    "UnsupportedInputError",
    "NotAdmissibleError",
    "delta",
    "arc_measure_n",
    "delta_identities_check",
    "itinerary",
    "psi_cylinder",
    "rho_distance",
]


class UnsupportedInputError(ValueError):
    pass


class NotAdmissibleError(ValueError):
    pass


def as_vector(obj) -> SubEigenvector:
    """Accept a :class:`SubEigenvector` or a slope model (lengths and slopes)."""
    if isinstance(obj, SubEigenvector):
        return obj
    if isinstance(obj, ConstantSlopeModel):
        return SubEigenvector(obj.lam, obj.lengths, obj.fmap.matrix(), obj.deficiency)
    raise TypeError(f"expected a SubEigenvector or ConstantSlopeModel, got {type(obj).__name__}")


def _word(word) -> tuple:
    return tuple(word.word) if isinstance(word, CylinderWord) else tuple(word)


def _require_admissible(M, w: tuple) -> None:
    if not w:
        raise NotAdmissibleError("empty word")
    for a, b in zip(w, w[1:]):
        if b not in M.successors(a):
            raise NotAdmissibleError(f"{a!r} -> {b!r} is not a transition")


def delta(word, v) -> object:
    """Cylinder length ``v_last / prod of slopes of the earlier letters``."""
    v = as_vector(v)
    w = _word(word)
    _require_admissible(v.matrix, w)
    denom = v.slope(w[0]) ** 0
    for a in w[:-1]:
        denom = denom * v.slope(a)
    out = v[w[-1]] / denom
    if not out > 0:
        raise ValueError(f"nonpositive length for {w!r}")
    return out


def _spread(v: SubEigenvector, mass: dict, steps: int) -> dict:
    """Push cylinder lengths ``steps`` levels down: ``Delta(w j) = Delta(w) v_j / (lam_last v_last)``."""
    M = v.matrix
    for _ in range(steps):
        nxt: dict = defaultdict(int)
        for a, d in mass.items():
            scale = d / (v.slope(a) * v[a])
            for b in M.successors(a):
                nxt[b] += scale * v[b]
        mass = dict(nxt)
    return mass


def arc_measure_n(fmap: MarkovMap, v, gamma, n: int):
    """Sum of ``Delta`` over level-``n`` cylinders inside ``gamma``.

    ``gamma`` is ``None`` (the whole graph), an arc label, or a list of
    pairwise non-nested admissible words of level at most ``n``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    v = as_vector(v)
    M = v.matrix
    if gamma is None:
        words = [(a,) for a in fmap.arc_ids]
    elif isinstance(gamma, (str, int)) and fmap.has_arc(gamma):
        words = [(gamma,)]
    elif isinstance(gamma, (list, tuple)) and all(isinstance(g, (list, tuple, CylinderWord)) for g in gamma):
        words = [_word(g) for g in gamma]
    else:
        raise UnsupportedInputError("gamma must be a union of cylinders given as words")
    for w in words:
        _require_admissible(M, w)
        if len(w) - 1 > n:
            raise UnsupportedInputError(f"cylinder {w!r} is finer than level {n}")
    ws = set(words)
    for w in words:
        if any(w[:k] in ws for k in range(1, len(w))):
            raise UnsupportedInputError(f"cylinder {w!r} is nested in another listed cylinder")
    total = None
    for w in words:
        mass = _spread(v, {w[-1]: delta(w, v)}, n - (len(w) - 1))
        part = sum(mass.values(), 0 * v[w[-1]])
        total = part if total is None else total + part
    return total


@dataclass(frozen=True)
class IdentityCheck:
    word: tuple
    refinement: bool  # Delta(w) equals the sum over one-letter extensions
    shift: bool  # Delta(w without first letter) equals lam_first * Delta(w)
    refinement_gap: float
    shift_gap: float

    @property
    def ok(self) -> bool:
        return self.refinement and self.shift


def _same(a, b, tol):
    if is_exact(a) and is_exact(b):
        return a == b, 0.0 if a == b else abs(float(a - b))
    gap = abs(float(a) - float(b))
    return gap <= tol * max(1.0, abs(float(a))), gap


def delta_identities_check(v, word, tol: float = 1e-12) -> IdentityCheck:
    """Refinement and shift identities of ``Delta`` at ``word``.

    Slopes are the declared ones (``lam`` off the deficiency set), so a
    vector that is not really a ``lam``-eigenvector fails the refinement
    identity.
    """
    v = as_vector(v)
    w = _word(word)
    d = delta(w, v)
    ext = sum((delta(w + (j,), v) for j in v.matrix.successors(w[-1])), 0 * d)
    ref, ref_gap = _same(ext, d, tol)
    if len(w) > 1:
        sh, sh_gap = _same(delta(w[1:], v), v.slope(w[0]) * d, tol)
    else:
        sh, sh_gap = True, 0.0
    return IdentityCheck(w, ref, sh, ref_gap, sh_gap)


# --------------------------------------------------------------------------
# itineraries and cylinder intervals


@dataclass(frozen=True)
class Itinerary:
    word: CylinderWord
    ambiguous: bool = False
    at_step: int | None = None
    candidates: tuple = ()


def _incident(model: ConstantSlopeModel, vertex) -> tuple:
    return tuple(a for a in model.arcs if vertex in model.fmap.endpoints(a))


def itinerary(model: ConstantSlopeModel, x: PointCoord, n: int) -> Itinerary:
    """Letters ``i0 .. in`` with ``f^k(x)`` in arc ``i_k``.

    Stops at the first iterate sitting on a vertex shared by several arcs and
    returns the letters so far with ``ambiguous`` set and the candidate arcs.
    """
    pt = model.point(x.arc, x.offset)
    letters = []
    for k in range(n + 1):
        vtx = model.vertex_of(pt)
        if vtx is not None:
            arcs = _incident(model, vtx)
            if len(arcs) > 1:
                return Itinerary(CylinderWord(tuple(letters)), True, k, arcs)
            letters.append(arcs[0])
        else:
            letters.append(pt.arc)
        if k < n:
            pt = evaluate_model(model, pt)
    return Itinerary(CylinderWord(tuple(letters)))


def psi_cylinder(model: ConstantSlopeModel, word) -> tuple[PointCoord, PointCoord]:
    """Offsets ``[lo, hi]`` in arc ``i0`` of the points whose itinerary starts with ``word``."""
    w = _word(word)
    fmap = model.fmap
    _require_admissible(fmap.matrix(), w)
    lo, hi = 0 * model.lengths[w[-1]], model.lengths[w[-1]]
    for a, b in zip(reversed(w[:-1]), reversed(w[1:])):
        acc = 0 * lo
        for c, d in fmap.image_path(a):
            if c == b:
                break
            acc = acc + model.lengths[c]
        else:
            raise NotAdmissibleError(f"{b!r} is not on the image path of {a!r}")
        if d == FWD:
            p, q = acc + lo, acc + hi
        else:
            p, q = acc + model.lengths[b] - hi, acc + model.lengths[b] - lo
        s = model.slopes[a]
        lo, hi = p / s, q / s
    return PointCoord(w[0], lo), PointCoord(w[0], hi)


def in_cylinder(model: ConstantSlopeModel, word, x: PointCoord) -> bool:
    lo, hi = psi_cylinder(model, word)
    return x.arc == lo.arc and lo.offset <= x.offset <= hi.offset


# --------------------------------------------------------------------------
# length metric


@dataclass(frozen=True)
class RhoResult:
    lower: float
    upper: float

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def __float__(self):
        return float(self.upper)


def _metric_graph(model: ConstantSlopeModel, points: Sequence[PointCoord]):
    G = nx.MultiGraph()
    nodes = []
    split: dict = defaultdict(list)
    for k, p in enumerate(points):
        vtx = model.vertex_of(p)
        if vtx is None:
            split[p.arc].append((float(p.offset), ("pt", k)))
            nodes.append(("pt", k))
        else:
            nodes.append(("v", vtx))
    for a in model.arcs:
        t, h = model.fmap.endpoints(a)
        length = float(model.lengths[a])
        stops = [(0.0, ("v", t))] + sorted(split.get(a, [])) + [(length, ("v", h))]
        for (o1, n1), (o2, n2) in zip(stops, stops[1:]):
            G.add_edge(n1, n2, weight=o2 - o1)
    return G, nodes


def rho_distance(model: ConstantSlopeModel, x: PointCoord, y: PointCoord) -> RhoResult:
    """Shortest connecting-arc length between ``x`` and ``y``.

    Finite models give ``lower == upper``.  When the model only covers part of
    an infinite family, the truncated graph gives the upper bound and gluing
    its boundary vertices at zero cost gives the lower bound.
    """
    x = model.point(x.arc, x.offset)
    y = model.point(y.arc, y.offset)
    if x == y:
        return RhoResult(0.0, 0.0)
    G, (nx_, ny_) = _metric_graph(model, [x, y])
    upper = nx.dijkstra_path_length(G, nx_, ny_, weight="weight")
    boundary = model.fmap.boundary_vertices()
    if model.fmap.is_finite() or len(boundary) < 2:
        return RhoResult(upper, upper)
    for b in boundary:
        G.add_edge(("hub",), ("v", b), weight=0.0)
    lower = nx.dijkstra_path_length(G, nx_, ny_, weight="weight")
    return RhoResult(lower, upper)


def words_at_level(v, n: int, starts: Iterable) -> dict:
    """``{word: Delta}`` for every admissible level-``n`` word from ``starts``."""
    v = as_vector(v)
    M = v.matrix
    out = {}
    stack = [((s,), v[s]) for s in starts]
    while stack:
        w, d = stack.pop()
        if len(w) == n + 1:
            out[w] = d
            continue
        a = w[-1]
        scale = d / (v.slope(a) * v[a])
        for b in M.successors(a):
            stack.append((w + (b,), scale * v[b]))
    return out
