"""Command-line front end.

    tameslope analyze     --config job.yaml
    tameslope entropy     --config job.yaml --depth 14
    tameslope eigen       --config job.yaml --exact
    tameslope slope-model --config job.yaml --lambda 3 --base-arc 0
    tameslope horseshoe   --config job.yaml --horizon 40

CSV output is the command's table; ``--format tree`` emits YAML with the
summary and the same table.  Exit status: 0 on success, 1 when validation
fails or a required result is inconclusive or violated, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from fractions import Fraction

import yaml

from .config import ConfigError, JobConfig, load_config
from .exact import fmt
from .graph import mixing_check, validate
from .horseshoe import horseshoe_sequence
from .slope import (
    NotSummableError,
    PreconditionError,
    ReducibleMatrixError,
    SubEigenvector,
    build_constant_slope_model,
    check_subeigenvector,
    lipschitz_report,
    perron_vector,
    vj_subeigenvector,
)
from .transition import gurevich_entropy


class Result:
    def __init__(self, columns, rows=(), summary=None, code=0):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.summary = dict(summary or {})
        self.code = code

    def render(self, style: str) -> str:
        if style == "tree":
            tree = {"summary": {k: _plain(v) for k, v in self.summary.items()},
                    "rows": [dict(zip(self.columns, map(_plain, r))) for r in self.rows]}
            return yaml.safe_dump(tree, sort_keys=False, default_flow_style=False)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(x) if x is not None else "" for x in r])
        return buf.getvalue()


def _plain(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, (list, tuple)):
        return [_plain(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return fmt(x)


def _schedule(cfg: JobConfig) -> list[int]:
    kind = cfg.schedule or ("linear" if cfg.fmap.is_finite() else "geometric")
    if kind == "linear":
        return list(range(1, max(cfg.depth, 1) + 1))
    return [2 ** k for k in range(cfg.depth + 1)]


# --------------------------------------------------------------------------
# commands


def cmd_analyze(cfg: JobConfig) -> Result:
    fmap = cfg.fmap
    diag = validate(fmap)
    if not diag.ok:
        rows = [(v.kind, v.arc, v.detail) for v in diag.violations]
        return Result(["violation", "arc", "detail"], rows,
                      {"status": "invalid", "violations": len(rows)}, code=1)
    cert = mixing_check(fmap, cfg.horizon)
    finite = fmap.is_finite()
    label = cert.summary.replace("-on-truncation", "") if finite else cert.summary
    M = fmap.matrix()
    entries = sum(len(M.successors(a)) for a in fmap.arc_ids)
    summary = {
        "status": f"valid, {label}",
        "arcs": diag.checked,
        "finite": finite,
        "entries": entries,
        "core_size": cert.size,
        "pruned": cert.pruned,
        "irreducible": cert.irreducible,
        "period": cert.period if cert.period is not None else "none",
        "leo_witness": cert.leo_witness if cert.leo_witness is not None else "inconclusive",
    }
    if cert.note:
        summary["note"] = cert.note
    return Result(["check", "value"], list(summary.items()), summary)


def cmd_entropy(cfg: JobConfig) -> Result:
    M = cfg.fmap.matrix()
    depths = _schedule(cfg)
    est = gurevich_entropy(M, cfg.base, max(depths), tol=cfg.tol, schedule=depths)
    rows = []
    for k, b in enumerate(est.lower_bounds):
        last = k == len(est.lower_bounds) - 1
        rows.append((b.depth, b.size, b.log_radius, b.log_upper, b.irreducible,
                     est.status if last else "running"))
    summary = {"base": cfg.base, "value": est.value, "status": est.status, "tol": cfg.tol}
    return Result(["depth", "size", "log_lower", "log_upper", "irreducible", "status"], rows, summary)


def _family_vector(cfg: JobConfig):
    fmap = cfg.fmap
    lam = fmap.eigenvalue
    v = fmap.eigenvector()
    if cfg.exact:
        return Fraction(lam), v
    arcs = fmap.arc_ids
    M = fmap.matrix()
    keys = dict.fromkeys(arcs)
    for a in arcs:
        keys.update(dict.fromkeys(M.successors(a)))
    return float(lam), {a: float(v[a]) for a in keys}


def _vector(cfg: JobConfig) -> tuple[SubEigenvector, str]:
    """Pick the vector a command works on, with a word saying where it came from."""
    fmap, M = cfg.fmap, cfg.fmap.matrix()
    if cfg.vector is not None:
        if cfg.lam is None:
            raise ConfigError("a candidate vector needs 'lambda'")
        return SubEigenvector(cfg.lam, cfg.vector, M), "candidate"
    if cfg.lam is not None:
        v = vj_subeigenvector(M, cfg.lam, cfg.base, N=cfg.terms, tol=cfg.tol, exact=cfg.exact)
        return v, "first-passage"
    if hasattr(fmap, "eigenvector"):
        lam, v = _family_vector(cfg)
        return SubEigenvector(lam, v, M), "family"
    return perron_vector(fmap, tol=min(cfg.tol, 1e-12), exact=cfg.exact), "perron"


def cmd_eigen(cfg: JobConfig) -> Result:
    fmap, M = cfg.fmap, cfg.fmap.matrix()
    v, origin = _vector(cfg)
    rows_in = fmap.arc_ids if origin in ("family", "perron") else list(v.entries)
    report = check_subeigenvector(M, v.lam, v.entries, rows=rows_in, tol=cfg.tol)
    rows = [(r.arc, v[r.arc], r.image, r.scaled, r.slack, r.kind) for r in report.rows]
    if hasattr(fmap, "blade_sums") and origin == "family":
        for blade, s in fmap.blade_sums(v.entries).items():
            rows.append((blade, s, None, None, None, "blade-sum"))
    summary = {
        "source": origin,
        "lambda": v.lam,
        "rows": len(report.rows),
        "equal_rows": sum(r.kind == "eigen" for r in report.rows),
        "deficient": report.deficient,
        "violations": [r.arc for r in report.violations],
        "skipped": report.skipped,
        "partial_sum": report.partial_sum,
    }
    code = 0
    if origin == "first-passage":
        summary["status"] = v.status
        summary["defect"] = v.defect
        code = 1 if v.status != "ok" else 0
    if report.violations or report.skipped:
        code = 1
    return Result(["arc", "value", "image", "scaled", "slack", "kind"], rows, summary, code)


def cmd_slope_model(cfg: JobConfig) -> Result:
    fmap = cfg.fmap
    v, origin = _vector(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            model = build_constant_slope_model(fmap, v, numeric=cfg.numeric)
            error = None
        except (NotSummableError, PreconditionError, ValueError) as exc:
            model, error = None, exc
    notes = [str(w.message) for w in caught]
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)
    if model is None:
        print(f"error: {error}", file=sys.stderr)
        summary = {"source": origin, "error": str(error), "warnings": notes}
        return Result(["arc", "length", "slope", "image_length", "identity"], [], summary, code=1)
    rows = [(a, model.lengths[a], model.slopes[a], lhs, eq)
            for a, lhs, _, eq in model.image_length_identity()]
    summary = {"source": origin, "lambda": model.lam, "mode": model.mode,
               "deficiency": sorted(model.deficiency, key=str), "warnings": notes}
    code = 0 if all(r[4] for r in rows) else 1
    if cfg.epsilon is not None:
        est = gurevich_entropy(fmap.matrix(), cfg.base, max(_schedule(cfg)), tol=cfg.tol,
                               schedule=_schedule(cfg))
        try:
            rep = lipschitz_report(model, est, cfg.epsilon)
        except PreconditionError as exc:
            summary["lipschitz_error"] = str(exc)
            return Result(["arc", "length", "slope", "image_length", "identity"], rows, summary, 1)
        summary["lipschitz"] = dict(rep.rows())
        if not rep.holds:
            code = 1
    return Result(["arc", "length", "slope", "image_length", "identity"], rows, summary, code)


def cmd_horseshoe(cfg: JobConfig) -> Result:
    seq = horseshoe_sequence(cfg.fmap.matrix(), cfg.base, cfg.horizon)
    best = seq.best()
    summary = {"base": cfg.base, "N": cfg.horizon, "best_bound": best if math.isfinite(best) else "no loop"}
    return Result(["n", "s_n", "bound"], seq.rows(), summary)


COMMANDS = {
    "analyze": cmd_analyze,
    "entropy": cmd_entropy,
    "eigen": cmd_eigen,
    "slope-model": cmd_slope_model,
    "horseshoe": cmd_horseshoe,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH")
    common.add_argument("--exact", action="store_true", help="rational/algebraic arithmetic")
    common.add_argument("--tol", type=float, metavar="R")
    common.add_argument("--depth", type=int, metavar="N")
    common.add_argument("--horizon", type=int, metavar="N")
    common.add_argument("--lambda", dest="lam", metavar="R")
    common.add_argument("--base-arc", metavar="ID")
    common.add_argument("--format", choices=["csv", "tree"])
    common.add_argument("--out", metavar="PATH")
    p = argparse.ArgumentParser(prog="tameslope", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "numeric": "exact" if args.exact else None,
        "tol": args.tol,
        "depth": args.depth,
        "horizon": args.horizon,
        "lambda": args.lam,
        "base_arc": args.base_arc,
        "format": args.format,
        "out": args.out,
    }
    try:
        cfg = load_config(args.config, **overrides)
        result = COMMANDS[args.command](cfg)
    except (ConfigError, ReducibleMatrixError, PreconditionError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = result.render(cfg.format)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
