"""Command line driver: ``treelimit run | check | tree``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import checks
from . import degeneration as dg
from . import harmonic as hm
from .group_rep import (
    Presentation,
    RepresentationFamily,
    constant_family,
    diagonal_stretch,
    octagon_twist,
    word_list,
)

EXIT_OK, EXIT_MISSING, EXIT_NOT_TREE, EXIT_SCHEMA = 0, 1, 2, 3

_MATRIX = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {
        "type": "array",
        "minItems": 2,
        "maxItems": 2,
        "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["family", "schedule"],
    "additionalProperties": False,
    "properties": {
        "presentation": {
            "type": "object",
            "required": ["generators"],
            "additionalProperties": False,
            "properties": {
                "generators": {"type": "array", "minItems": 1, "items": {"type": "string", "minLength": 1}},
                "relators": {"type": "array", "items": {"type": "string"}},
            },
        },
        "family": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {
                "name": {"enum": ["diagonal-stretch", "octagon-twist", "custom"]},
                "angle": {"type": "number"},
                "matrices": {"type": "array", "items": _MATRIX},
            },
        },
        "graph": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "vertices": {"type": "integer", "minimum": 1},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["tail", "head", "holonomy"],
                        "additionalProperties": False,
                        "properties": {
                            "tail": {"type": "integer", "minimum": 0},
                            "head": {"type": "integer", "minimum": 0},
                            "weight": {"type": "number", "exclusiveMinimum": 0},
                            "holonomy": {"type": "string"},
                        },
                    },
                },
            },
        },
        "word_length": {"type": "integer", "minimum": 1, "maximum": 4},
        "words": {"type": "array", "minItems": 1, "items": {"type": "string", "minLength": 1}},
        "sample_length": {"type": "integer", "minimum": 1, "maximum": 4},
        "schedule": {"type": "array", "minItems": 1, "items": {"type": "number"}},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
            },
        },
        "threshold": {"type": "number", "exclusiveMinimum": 0},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "string"}, "tree": {"type": "string"}},
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else format(x, ".17g")


def load_config(path: Path) -> dict:
    cfg = json.loads(path.read_text())
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}") from None
    sched = cfg["schedule"]
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("schedule: must be strictly increasing")
    return cfg


def build_family(cfg: dict) -> RepresentationFamily:
    fam = cfg["family"]
    if fam["name"] == "diagonal-stretch":
        return diagonal_stretch(fam.get("angle", math.pi / 4))
    if fam["name"] == "octagon-twist":
        return octagon_twist()
    pres_cfg = cfg.get("presentation")
    if pres_cfg is None:
        raise ConfigError("presentation: required for a custom family")
    pres = Presentation(tuple(pres_cfg["generators"]))
    pres = Presentation(pres.generators, tuple(pres.word(r) for r in pres_cfg.get("relators", [])))
    mats = fam.get("matrices")
    if mats is None or len(mats) != pres.rank:
        raise ConfigError("family/matrices: one matrix per generator required")
    arrays = [np.array([[complex(*z) for z in row] for row in m]) for m in mats]
    try:
        return constant_family(pres, arrays)
    except ValueError as err:
        raise ConfigError(f"family/matrices: {err}") from None


def build_graph(cfg: dict, pres: Presentation) -> hm.TwistedGraph:
    g = cfg.get("graph")
    if not g or "edges" not in g:
        return hm.rose(pres.rank)
    edges = tuple(
        hm.Edge(e["tail"], e["head"], e.get("weight", 1.0), pres.word(e["holonomy"])) for e in g["edges"]
    )
    try:
        return hm.TwistedGraph(g.get("vertices", 1), edges)
    except ValueError as err:
        raise ConfigError(f"graph: {err}") from None


def run_words(cfg: dict, pres: Presentation):
    if "words" in cfg:
        out = []
        for text in cfg["words"]:
            try:
                out.append(pres.word(text).canonical())
            except ValueError as err:
                raise ConfigError(f"words: {err}") from None
        return out
    return word_list(pres, cfg.get("word_length", 2))


def results_csv(run: dg.DegenerationRun, pres: Presentation) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "energy", "delta", "diameter"] + [f"len_{pres.name(x)}" for x in run.words])
    for r in run.records:
        lengths = r.tree_lengths if r.tree_lengths is not None else [math.nan] * len(run.words)
        w.writerow([_fmt(r.t), _fmt(r.energy), _fmt(r.delta), _fmt(r.diameter)] + [_fmt(x) for x in lengths])
    return buf.getvalue()


def tree_json(run: dg.DegenerationRun, pres: Presentation) -> str:
    """Last fitted tree with each generator's (partial) vertex map."""
    rec = next((r for r in reversed(run.records) if r.fitted is not None), None)
    if rec is None:
        return json.dumps({"vertices": [], "edges": [], "actions": {}}) + "\n"
    data = rec.fitted.tree.to_dict()
    carriers = rec.fitted.sample_vertex
    actions = {}
    for name in pres.generators:
        vm = {}
        for i, j in sorted(rec.action.maps[name].items()):
            vm.setdefault(str(carriers[i]), carriers[j])
        actions[name] = {"vertex_map": dict(sorted(vm.items(), key=lambda kv: int(kv[0]))), "edge_map": {}}
    data["actions"] = actions
    data["samples"] = {f"{v}:{pres.name(w) or 'e'}": carriers[i] for i, (v, w) in enumerate(run.labels)}
    data["t"] = rec.t
    return json.dumps(data) + "\n"


def cmd_run(args) -> int:
    path = Path(args.config)
    if not path.is_file():
        print(f"error: config file not found: {path}", file=sys.stderr)
        return EXIT_MISSING
    try:
        cfg = load_config(path)
        fam = build_family(cfg)
        pres = fam.presentation()
        graph = build_graph(cfg, pres)
        words = run_words(cfg, pres)
    except json.JSONDecodeError as err:
        print(f"schema error: not valid JSON: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except ConfigError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    solver = cfg.get("solver", {})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = cfg.get("output", {})
    csv_path = out_dir / names.get("csv", "results.csv")
    tree_path = out_dir / names.get("tree", "tree.json")
    status = EXIT_OK
    try:
        run = dg.run_degeneration(
            fam,
            graph,
            words,
            cfg["schedule"],
            tol=solver.get("tol", 1e-8),
            max_iter=solver.get("max_iter", 10_000),
            max_len=cfg.get("sample_length", 3),
            threshold=cfg.get("threshold", dg.TREE_THRESHOLD),
            seed=seed,
        )
    except dg.NotTreeLikeError as err:
        run = err.run
        status = EXIT_NOT_TREE
        message = str(err)
    for r in run.records:
        print(
            f"t={r.t:g} energy={r.energy:.6g} status={r.status} delta/diam={r.delta_ratio:.4g}"
            f" tree={'yes' if r.tree_lengths is not None else 'no'}"
        )
    csv_path.write_text(results_csv(run, pres))
    tree_path.write_text(tree_json(run, pres))
    if status == EXIT_NOT_TREE:
        print(f"not tree-like: {message}", file=sys.stderr)
        return status
    print(f"{run.case}; wrote {csv_path} and {tree_path}")
    if run.abelian() is not None:
        print("note: final lengths are realized by a homomorphism to R (abelian-looking)")
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite not in (*checks.SUITES, "all"):
        print(f"unknown suite {args.suite!r}; choose from {', '.join([*checks.SUITES, 'all'])}", file=sys.stderr)
        return EXIT_SCHEMA
    results = checks.run_suite(args.suite, seed=args.seed, inject_fault=args.inject_fault)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return 0 if failed == 0 else 1


def cmd_tree(args) -> int:
    path = Path(args.metric)
    if not path.is_file():
        print(f"error: metric file not found: {path}", file=sys.stderr)
        return EXIT_MISSING
    try:
        data = json.loads(path.read_text())
        d = np.array(data["distances"] if isinstance(data, dict) else data, dtype=float)
        labels = data.get("labels") if isinstance(data, dict) else None
        metric = dg.RescaledMetric(tuple(labels or range(len(d))), d, 1.0)
        metric.check()
    except (ValueError, KeyError, TypeError) as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        fitted = dg.tree_from_metric(metric, args.tol)
    except dg.NotTreeLikeError as err:
        quad = None if err.quadruple is None else [metric.labels[i] for i in err.quadruple]
        print(f"not tree-like: {err}; labels {quad}", file=sys.stderr)
        return EXIT_NOT_TREE
    out = fitted.tree.to_dict()
    out["labels"] = {str(lab): v for lab, v in zip(metric.labels, fitted.sample_vertex)}
    out["error"] = fitted.error
    text = json.dumps(out) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treelimit", description="Degenerating representations and their limit trees.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a degeneration experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("check", help="run property suites: tree-ops, hyperbolic, lengths, all")
    c.add_argument("suite")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_check)
    t = sub.add_parser("tree", help="fit a metric tree to a distance matrix")
    t.add_argument("metric")
    t.add_argument("--tol", type=float, default=0.05)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_tree)
    return p


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
