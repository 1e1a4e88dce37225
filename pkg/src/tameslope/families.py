"""Built-in map families.

* ``tent``: full ``n``-shift tent maps on an interval of ``n`` laps.
* ``golden_mean``: the interval map with matrix ``[[1, 1], [1, 0]]``.
* ``interval``: any finite Markov interval map from (matrix, arc order,
  orientations).
* ``example1``: a countably Markov fan (dendrite with one branchpoint) whose
  transition matrix has a 2-eigenvector but which has no conjugate
  constant-slope model.  Its blades are split into monotone laps so the
  0/1 transition matrix applies.

Example-1 labels: ``A{n}.{k}`` (laps k = 1, 2, 3 of blade A_n, n >= 0), ``B``,
``C1`` and ``C{m}.{k}`` (laps k = 1, 2 of blade C_m, m >= 2).  Every lap is
oriented away from the branchpoint ``O``.
"""
from __future__ import annotations

import re
from functools import lru_cache
from collections.abc import Mapping
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import FWD, REV, ExplicitMarkovMap, GraphModel, MarkovMap
from .transition import RuleMatrix


def interval_map(
    matrix,
    order: Sequence | None = None,
    increasing: Sequence[bool] | None = None,
    labels: Sequence | None = None,
    name: str = "interval",
) -> ExplicitMarkovMap:
    """Markov interval map with arcs laid out left to right in ``order``.

    Arc ``i`` maps monotonically onto the union of the arcs ``j`` with
    ``m_ij = 1``; that union must be contiguous in ``order``.
    ``increasing[k]`` is the orientation of the ``k``-th arc of ``labels``.
    """
    a = np.asarray(matrix, dtype=int)
    n = a.shape[0]
    labels = [str(k) for k in range(n)] if labels is None else list(labels)
    order = list(labels) if order is None else [str(x) for x in order]
    if sorted(order) != sorted(labels):
        raise ValueError("order must be a permutation of the arc labels")
    increasing = [True] * n if increasing is None else list(increasing)
    pos = {lab: k for k, lab in enumerate(order)}
    vertices = [f"x{k}" for k in range(n + 1)]
    triples = [(lab, f"x{pos[lab]}", f"x{pos[lab] + 1}") for lab in labels]
    paths = {}
    for r, lab in enumerate(labels):
        hit = sorted(pos[labels[c]] for c in np.flatnonzero(a[r]))
        if not hit:
            raise ValueError(f"arc {lab} has an empty image")
        if hit != list(range(hit[0], hit[-1] + 1)):
            raise ValueError(f"image of arc {lab} is not contiguous in the arc order")
        if increasing[r]:
            paths[lab] = [(order[p], FWD) for p in hit]
        else:
            paths[lab] = [(order[p], REV) for p in reversed(hit)]
    return ExplicitMarkovMap(GraphModel.from_triples(vertices, triples), paths,
                             name=name, interval_order=vertices)


def tent(n: int = 2) -> ExplicitMarkovMap:
    """Full ``n``-shift: ``n`` laps of alternating orientation, each onto the whole interval."""
    if n < 2:
        raise ValueError("tent needs at least 2 laps")
    return interval_map(np.ones((n, n), dtype=int), increasing=[k % 2 == 0 for k in range(n)],
                        name=f"tent-{n}")


def golden_mean() -> ExplicitMarkovMap:
    """Arc 0 covers both arcs (decreasing), arc 1 covers arc 0 (increasing).

    Realized on the interval with arc ``1`` on the left.
    """
    return interval_map([[1, 1], [1, 0]], order=["1", "0"], increasing=[False, True],
                        name="golden-mean")


# --------------------------------------------------------------------------
# Example 1: the fan


_LAP = re.compile(r"^(A)(\d+)\.([123])$|^(C)(\d+)\.([12])$|^(B)$|^(C)(1)$")


@lru_cache(maxsize=1 << 16)
def parse_lap(label):
    """``(blade kind, blade index, lap number)``; ``None`` for foreign labels."""
    if type(label) is not str:
        return None
    m = _LAP.match(label)
    if not m:
        return None
    g = m.groups()
    if g[0]:
        return "A", int(g[1]), int(g[2])
    if g[3]:
        idx = int(g[4])
        return ("C", idx, int(g[5])) if idx >= 2 else None
    if g[6]:
        return "B", 0, 1
    return "C", 1, 1


def blade_laps(kind: str, n: int) -> list[str]:
    if kind == "A":
        return [f"A{n}.1", f"A{n}.2", f"A{n}.3"]
    if kind == "B":
        return ["B"]
    if n == 1:
        return ["C1"]
    return [f"C{n}.1", f"C{n}.2"]


def _is_pow2(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


class ExampleOne(MarkovMap):
    """The fan map, materialized up to blade ``A_depth`` and ``C_{2**depth}``.

    Rows and columns of the transition matrix are available for every lap
    through rules; ``depth`` only bounds ``arc_ids``.
    """

    name = "example1"
    eigenvalue = 2

    def __init__(self, depth: int = 8):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        self.depth = depth
        self._matrix = RuleMatrix(
            successors=lambda i: [a for a, _ in self.image_path(i)],
            predecessors=self._predecessors,
            contains=self.has_arc,
            level_of=self.level_of,
            name="example1",
        )

    @property
    def arc_ids(self):
        out = ["B"]
        for n in range(self.depth + 1):
            out += blade_laps("A", n)
        for m in range(1, 2 ** self.depth + 1):
            out += blade_laps("C", m)
        return out

    def has_arc(self, arc):
        return parse_lap(arc) is not None

    @staticmethod
    def level_of(arc) -> int:
        kind, n, _ = parse_lap(arc)
        return {"A": 2 ** n if kind == "A" else 0, "B": 0, "C": n}[kind]

    def endpoints(self, arc):
        p = parse_lap(arc)
        if p is None:
            raise KeyError(arc)
        kind, n, k = p
        if kind == "B":
            return "O", "tB"
        if kind == "A":
            stops = ["O", f"pA{n}.1", f"pA{n}.2", f"tA{n}"]
            return stops[k - 1], stops[k]
        if n == 1:
            return "O", "tC1"
        stops = ["O", f"qC{n}", f"tC{n}"]
        return stops[k - 1], stops[k]

    def image_path(self, arc):
        p = parse_lap(arc)
        if p is None:
            raise KeyError(arc)
        kind, n, k = p
        if kind == "B":
            return [(a, FWD) for a in blade_laps("A", 0)]
        if kind == "A":
            if k == 3:
                return [(a, FWD) for a in blade_laps("A", n + 1)]
            target = blade_laps("C", 2 ** n)
        else:
            if n == 1:
                return [("B", FWD)]
            target = blade_laps("C", n - 1)
        if k == 1:
            return [(a, FWD) for a in target]
        return [(a, REV) for a in reversed(target)]

    def _predecessors(self, arc):
        kind, n, _ = parse_lap(arc)
        if kind == "B":
            return ["C1"]
        if kind == "A":
            return ["B"] if n == 0 else [f"A{n - 1}.3"]
        out = []
        if _is_pow2(n):
            e = n.bit_length() - 1
            out += [f"A{e}.1", f"A{e}.2"]
        out += blade_laps("C", n + 1)
        return out

    def matrix(self):
        return self._matrix

    def boundary_vertices(self):
        # every blade hangs off the branchpoint
        return ["O"]

    # -- closed-form data ---------------------------------------------------

    def eigenvector(self) -> "LapVector":
        """The 2-eigenvector at lap level (blade sums ``2**n + 1``, ``1``, ``1/2``)."""
        return LapVector(self)

    @staticmethod
    def lap_value(arc) -> Fraction:
        kind, n, k = parse_lap(arc)
        if kind == "B":
            return Fraction(1)
        if kind == "A":
            return Fraction(2 ** (n + 1) + 1, 2) if k == 3 else Fraction(1, 4)
        return Fraction(1, 2) if n == 1 else Fraction(1, 4)

    def blade_sums(self, v) -> dict:
        out = {}
        for n in range(self.depth + 1):
            out[f"A{n}"] = sum((v[a] for a in blade_laps("A", n)), Fraction(0))
        out["B"] = v["B"]
        for m in range(1, 2 ** self.depth + 1):
            out[f"C{m}"] = sum((v[a] for a in blade_laps("C", m)), Fraction(0))
        return out

    @staticmethod
    def third_lap_word(n: int) -> tuple:
        """``A0.3 A1.3 ... An.3``: the itinerary that never leaves the A-blades' tips."""
        return tuple(f"A{k}.3" for k in range(n + 1))


class LapVector(Mapping):
    """Rule-defined vector on Example-1 laps; iterates over the materialized laps."""

    def __init__(self, family: ExampleOne):
        self.family = family

    def __getitem__(self, arc):
        if parse_lap(arc) is None:
            raise KeyError(arc)
        return ExampleOne.lap_value(arc)

    def __iter__(self):
        return iter(self.family.arc_ids)

    def __len__(self):
        return len(self.family.arc_ids)


BUILTINS = {
    "tent": tent,
    "golden_mean": golden_mean,
    "interval": interval_map,
    "example1": ExampleOne,
}


def build(family: str, **params) -> MarkovMap:
    try:
        ctor = BUILTINS[family]
    except KeyError:
        raise ValueError(f"unknown builtin family {family!r}; known: {sorted(BUILTINS)}") from None
    return ctor(**params)
