"""Combinatorial graph models and countably Markov maps on them.

A map is described per partition arc by an oriented edge path: the image of
the arc, traversed from the image of its first endpoint (``tail``) to the
image of its second endpoint (``head``).  Each arc's ``tail`` is the origin
of its local coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sps

from .transition import (
    CountableMatrix,
    ExplicitMatrix,
    FiniteMatrix,
    submatrix,
    truncation,
)

FWD = "fwd"
REV = "rev"

Step = tuple  # (arc id, FWD | REV)


@dataclass(frozen=True)
class PointCoord:
    """Point ``offset`` units from the tail of ``arc``."""

    arc: Hashable
    offset: object

    def __str__(self):
        return f"({self.arc}, {self.offset})"


@dataclass(frozen=True)
class Arc:
    id: Hashable
    tail: Hashable
    head: Hashable


@dataclass
class GraphModel:
    vertices: list
    arcs: dict  # id -> Arc, in enumeration order

    @classmethod
    def from_triples(cls, vertices: Iterable, triples: Iterable[tuple]) -> "GraphModel":
        arcs = {}
        for a, t, h in triples:
            if a in arcs:
                raise ValueError(f"duplicate arc id {a!r}")
            arcs[a] = Arc(a, t, h)
        return cls(list(vertices), arcs)


def step_start(fmap: "MarkovMap", step: Step):
    arc, d = step
    t, h = fmap.endpoints(arc)
    return t if d == FWD else h


def step_end(fmap: "MarkovMap", step: Step):
    arc, d = step
    t, h = fmap.endpoints(arc)
    return h if d == FWD else t


class MarkovMap:
    """Interface shared by explicit maps and rule families.

    ``arc_ids`` lists the materialized arcs (all of them for finite maps, a
    depth-limited prefix for rule families).
    """

    name = ""
    interval_order: list | None = None

    @property
    def arc_ids(self) -> list:
        raise NotImplementedError

    def has_arc(self, arc) -> bool:
        raise NotImplementedError

    def endpoints(self, arc) -> tuple:
        raise NotImplementedError

    def image_path(self, arc) -> list[Step]:
        raise NotImplementedError

    def matrix(self) -> CountableMatrix:
        raise NotImplementedError

    def vertices(self) -> list:
        seen = {}
        for a in self.arc_ids:
            for v in self.endpoints(a):
                seen.setdefault(v, None)
        return list(seen)

    def vertex_image(self, arc, end: str):
        """Image of the ``"tail"`` or ``"head"`` endpoint of ``arc``."""
        path = self.image_path(arc)
        return step_start(self, path[0]) if end == "tail" else step_end(self, path[-1])

    def is_finite(self) -> bool:
        return self.matrix().finite

    def boundary_vertices(self) -> list:
        """Vertices where unmaterialized arcs attach to the materialized ones."""
        return []


@dataclass
class ExplicitMarkovMap(MarkovMap):
    graph: GraphModel
    paths: dict  # arc id -> list of (arc id, FWD|REV)
    name: str = ""
    interval_order: list | None = None
    _matrix: ExplicitMatrix | None = field(default=None, init=False, repr=False)

    @property
    def arc_ids(self):
        return list(self.graph.arcs)

    def has_arc(self, arc):
        return arc in self.graph.arcs

    def endpoints(self, arc):
        a = self.graph.arcs[arc]
        return a.tail, a.head

    def image_path(self, arc):
        return self.paths[arc]

    def vertices(self):
        return list(self.graph.vertices)

    def matrix(self):
        if self._matrix is None:
            self._matrix = ExplicitMatrix(
                self.arc_ids, {i: [a for a, _ in self.paths[i]] for i in self.arc_ids}
            )
        return self._matrix


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    arc: object
    detail: str

    def __str__(self):
        return f"{self.kind} at arc {self.arc}: {self.detail}"


@dataclass
class Diagnostics:
    violations: list[Violation]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(fmap: MarkovMap) -> Diagnostics:
    """Check the combinatorial Markov-map conditions on the materialized arcs."""
    out: list[Violation] = []
    images: dict = {}
    arcs = fmap.arc_ids
    for a in arcs:
        t, h = fmap.endpoints(a)
        if t == h:
            out.append(Violation("loop arc", a, f"both endpoints are {t!r}"))
        path = fmap.image_path(a)
        if not path:
            out.append(Violation("empty path", a, "image path is empty"))
            continue
        bad = [b for b, d in path if not fmap.has_arc(b) or d not in (FWD, REV)]
        if bad:
            out.append(Violation("unknown arc", a, f"path refers to {bad!r}"))
            continue
        names = [b for b, _ in path]
        if len(set(names)) != len(names):
            out.append(Violation("repeated arc", a, f"path {names!r} repeats an arc"))
        for s1, s2 in zip(path, path[1:]):
            if step_end(fmap, s1) != step_start(fmap, s2):
                out.append(Violation(
                    "path continuity", a,
                    f"{s1[0]!r} and {s2[0]!r} are not joined at a common vertex"))
                break
        else:
            walk = [step_start(fmap, path[0])] + [step_end(fmap, s) for s in path]
            if len(set(walk)) != len(walk):
                out.append(Violation("repeated vertex", a, f"path visits {walk!r}"))
        images.setdefault(t, {})[step_start(fmap, path[0])] = a
        images.setdefault(h, {})[step_end(fmap, path[-1])] = a
    for v, targets in images.items():
        if len(targets) > 1:
            witnesses = ", ".join(f"{w!r} via {a!r}" for w, a in targets.items())
            out.append(Violation("inconsistent vertex image", v, witnesses))
    if arcs and not _connected(fmap, arcs):
        out.append(Violation("disconnected graph", None, "materialized arcs are not connected"))
    return Diagnostics(out, len(arcs))


def _connected(fmap: MarkovMap, arcs: Sequence) -> bool:
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in arcs:
        t, h = fmap.endpoints(a)
        parent[find(t)] = find(h)
    roots = {find(v) for a in arcs for v in fmap.endpoints(a)}
    return len(roots) == 1


def transition_matrix(fmap: MarkovMap) -> CountableMatrix:
    """``m_ij = 1`` iff arc ``j`` lies on the image path of arc ``i``."""
    return fmap.matrix()


# --------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class CylinderWord:
    word: tuple
    admissible: bool = True

    def __len__(self):
        return len(self.word)

    @property
    def level(self) -> int:
        return len(self.word) - 1


def cylinder(M: CountableMatrix, word: Sequence) -> CylinderWord:
    word = tuple(word)
    ok = all(b in M.successors(a) for a, b in zip(word, word[1:])) if word else False
    return CylinderWord(word, ok)


@dataclass
class Refinement:
    words: list[CylinderWord]
    complete: bool


def source_matrix(obj) -> tuple[CountableMatrix, list]:
    if isinstance(obj, MarkovMap):
        return obj.matrix(), obj.arc_ids
    if isinstance(obj, FiniteMatrix):
        return obj.as_matrix(), list(obj.labels)
    if isinstance(obj, CountableMatrix):
        return obj, obj.labels() if obj.finite else None
    return ExplicitMatrix.from_array(obj), None


def admissible_words(
    M: CountableMatrix, n: int, start: Iterable, allowed: set | None = None
) -> Iterator[tuple]:
    """All admissible words of length ``n + 1`` from ``start``, depth first."""
    def rec(word):
        if len(word) == n + 1:
            yield word
            return
        for j in M.successors(word[-1]):
            if allowed is None or j in allowed:
                yield from rec(word + (j,))

    for i in start:
        yield from rec((i,))


def refinement(obj, n: int, budget: int | None = None, start: Iterable | None = None) -> Refinement:
    """Words ``i0 .. in`` naming the arcs of the level-``n`` refined partition."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    M, arcs = source_matrix(obj)
    if arcs is None:
        if start is None:
            raise ValueError("infinite matrix: pass start arcs")
        arcs = list(start)
        allowed = None
    else:
        allowed = set(arcs)
    words = []
    for w in admissible_words(M, n, start if start is not None else arcs, allowed):
        if budget is not None and len(words) >= budget:
            return Refinement(words, complete=False)
        words.append(CylinderWord(w))
    return Refinement(words, complete=True)


# --------------------------------------------------------------------------
# irreducibility / mixing


@dataclass
class MixingCertificate:
    size: int
    pruned: int
    irreducible: bool
    period: int | None
    leo_witness: int | None
    horizon: int
    note: str = ""

    @property
    def aperiodic(self) -> bool:
        return self.period == 1

    @property
    def summary(self) -> str:
        if not self.irreducible:
            return "not irreducible on truncation"
        parts = ["irreducible-on-truncation"]
        parts.append("aperiodic" if self.aperiodic else f"period {self.period}")
        if self.leo_witness is not None:
            parts.append(f"leo-witness {self.leo_witness}")
        else:
            parts.append("leo inconclusive")
        return ", ".join(parts)


def trim(M: CountableMatrix, labels: Sequence) -> list:
    """Drop arcs with no successor or no predecessor inside the set, repeatedly."""
    keep = list(labels)
    while True:
        s = set(keep)
        nxt = [i for i in keep
               if any(j in s for j in M.successors(i)) and any(p in s for p in M.predecessors(i))]
        if len(nxt) == len(keep):
            return keep
        keep = nxt


def period_of(A: FiniteMatrix) -> int | None:
    """gcd of loop lengths through the first index (period of an irreducible matrix)."""
    if A.size == 0:
        return None
    level = {0: 0}
    queue = [0]
    g = 0
    csr = A.csr
    for u in queue:
        for v in csr.indices[csr.indptr[u]:csr.indptr[u + 1]]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, level[u] + 1 - level[v])
    return g or None


_LEO_LIMIT = 5000


def leo_witness(A: FiniteMatrix, horizon: int) -> int | None:
    """Smallest ``n <= horizon`` with ``A**n`` entrywise positive."""
    n = A.size
    if n > _LEO_LIMIT:
        return None
    S = sps.csr_matrix(A.csr, dtype=np.float32)
    St = S.T.tocsr()
    P = S.toarray() > 0
    for k in range(1, horizon + 1):
        if P.all():
            return k
        # P <- P A, computed as (A^T P^T)^T to keep the sparse factor on the left
        P = (St @ P.T.astype(np.float32)).T > 0
    return None


def mixing_check(obj, horizon: int, depth: int | None = None, base=None) -> MixingCertificate:
    """Irreducibility, period and leo witness on a finite truncation.

    Rule families are truncated at ``depth`` around ``base``; maps use their
    materialized arcs.  Arcs whose image or preimage leaves the truncation
    are trimmed first and counted in ``pruned``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    from scipy.sparse.csgraph import connected_components

    if isinstance(obj, MarkovMap):
        M, labels = obj.matrix(), obj.arc_ids
    elif isinstance(obj, FiniteMatrix):
        M, labels = obj.as_matrix(), list(obj.labels)
    elif obj.finite and depth is None:
        M, labels = obj, obj.labels()
    else:
        if depth is None or base is None:
            raise ValueError("rule matrices need depth and base")
        M = obj
        labels = list(truncation(obj, depth, base).labels)
    core = trim(M, labels)
    pruned = len(labels) - len(core)
    if not core:
        return MixingCertificate(0, pruned, False, None, None, horizon, "empty core")
    A = submatrix(M, core)
    ncomp, _ = connected_components(A.csr, directed=True, connection="strong")
    irreducible = ncomp == 1
    per = period_of(A) if irreducible else None
    witness = leo_witness(A, horizon) if irreducible and per == 1 else None
    note = "" if A.size <= _LEO_LIMIT else "truncation too large for leo search"
    return MixingCertificate(A.size, pruned, irreducible, per, witness, horizon, note)
