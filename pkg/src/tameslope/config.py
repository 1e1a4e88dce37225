"""Job configuration: one YAML document per job, command-line flags on top.

Map source, exactly one of::

    builtin: {family: tent | golden_mean | interval | example1, depth: 12, params: {n: 3}}

    vertices: [x0, x1, x2]
    arcs: [{id: a, from: x0, to: x1}, {id: b, from: x1, to: x2}]
    map: {a: [{arc: a, dir: fwd}, {arc: b, dir: fwd}], b: [{arc: a, dir: rev}]}

Other keys: numeric (exact | float), tol, depth, horizon, schedule
(linear | geometric), lambda, base_arc, terms, epsilon, vector
({arc: value}), format (csv | tree), out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import families
from .exact import parse_number
from .graph import FWD, REV, ExplicitMarkovMap, GraphModel, MarkovMap

_KNOWN = {
    "builtin", "vertices", "arcs", "map", "numeric", "tol", "depth", "horizon", "schedule",
    "lambda", "base_arc", "terms", "epsilon", "vector", "format", "out",
}


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    fmap: MarkovMap
    numeric: str = "float"
    tol: float = 1e-9
    depth: int = 8
    horizon: int = 8
    schedule: str | None = None
    lam: object | None = None
    base_arc: object | None = None
    terms: int = 200
    epsilon: float | None = None
    vector: dict | None = None
    format: str = "csv"
    out: str | None = None
    source: dict = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        return self.numeric == "exact"

    @property
    def base(self):
        if self.base_arc is not None:
            if not self.fmap.has_arc(self.base_arc):
                raise ConfigError(f"base_arc {self.base_arc!r} is not an arc of the map")
            return self.base_arc
        return self.fmap.arc_ids[0]


def _label(x):
    return str(x)


def build_map(tree: dict) -> MarkovMap:
    has_builtin = "builtin" in tree
    has_explicit = any(k in tree for k in ("vertices", "arcs", "map"))
    if has_builtin == has_explicit:
        raise ConfigError("give exactly one map source: 'builtin' or 'vertices'/'arcs'/'map'")
    if has_builtin:
        b = tree["builtin"]
        if isinstance(b, str):
            b = {"family": b}
        params = dict(b.get("params") or {})
        if "depth" in b:
            params["depth"] = int(b["depth"])
        try:
            return families.build(b["family"], **params)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad builtin block: {exc}") from None
    for key in ("vertices", "arcs", "map"):
        if key not in tree:
            raise ConfigError(f"explicit map needs '{key}'")
    try:
        triples = [(_label(a["id"]), _label(a["from"]), _label(a["to"])) for a in tree["arcs"]]
        paths = {}
        for arc, steps in tree["map"].items():
            path = []
            for st in steps:
                d = str(st.get("dir", FWD)).lower()
                d = {"forward": FWD, "reverse": REV, "+": FWD, "-": REV}.get(d, d)
                path.append((_label(st["arc"]), d))
            paths[_label(arc)] = path
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed explicit map: {exc}") from None
    graph = GraphModel.from_triples([_label(v) for v in tree["vertices"]], triples)
    missing = [a for a in graph.arcs if a not in paths]
    if missing:
        raise ConfigError(f"no image path for arcs {missing}")
    return ExplicitMarkovMap(graph, paths, name="config")


def load_config(path: str | Path | None = None, text: str | None = None, **overrides) -> JobConfig:
    """Read a job from ``path`` (or ``text``) and apply non-``None`` overrides."""
    if text is None:
        if path is None:
            raise ConfigError("no config given")
        text = Path(path).read_text()
    tree = yaml.safe_load(text) or {}
    if not isinstance(tree, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(tree) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    tree.update({k: v for k, v in overrides.items() if v is not None})
    fmap = build_map(tree)
    numeric = str(tree.get("numeric", "float"))
    if numeric not in ("exact", "float"):
        raise ConfigError("numeric must be 'exact' or 'float'")
    tol = float(tree.get("tol", 1e-9))
    if not tol > 0:
        raise ConfigError("tol must be positive")
    exact = numeric == "exact"
    default_depth = getattr(fmap, "depth", 8)
    cfg = JobConfig(
        fmap=fmap,
        numeric=numeric,
        tol=tol,
        depth=int(tree.get("depth", default_depth)),
        horizon=int(tree.get("horizon", 8)),
        schedule=tree.get("schedule"),
        lam=parse_number(tree["lambda"], exact) if tree.get("lambda") is not None else None,
        base_arc=_label(tree["base_arc"]) if tree.get("base_arc") is not None else None,
        terms=int(tree.get("terms", 200)),
        epsilon=float(tree["epsilon"]) if tree.get("epsilon") is not None else None,
        vector={_label(k): parse_number(v, exact) for k, v in tree["vector"].items()}
        if tree.get("vector") else None,
        format=str(tree.get("format", "csv")),
        out=tree.get("out"),
        source=tree,
    )
    if cfg.format not in ("csv", "tree"):
        raise ConfigError("format must be 'csv' or 'tree'")
    if cfg.schedule not in (None, "linear", "geometric"):
        raise ConfigError("schedule must be 'linear' or 'geometric'")
    if cfg.depth < 0 or cfg.horizon < 1:
        raise ConfigError("depth must be >= 0 and horizon >= 1")
    return cfg
