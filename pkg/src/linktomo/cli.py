"""Command-line interface: identify | paths | verify | eval | gen.

Exit codes: 0 success, 1 usage or input error, 2 identifiability gate
failure, 3 counting-identity violation.  Results go to stdout as JSON (CSV
for eval), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import evaluation, harness, viz
from .errors import IdentityViolation, LinktomoError, NotIdentifiable
from .ears import validate_ears, validate_st
from .graph import GraphError, build_extended_graph, graph_to_dict, link_key, load_graph_json
from .paths import build_pipeline
from .solver import identify_all
from .trees import TREE_NAMES, verify_independence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GATE = 2
EXIT_IDENTITY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _seed_default(value: int | None) -> int:
    if value is not None:
        return value
    return int(os.environ.get("TOMO_SEED", "0"))


def _load_extended(path: str):
    g, monitors, metrics = load_graph_json(path)
    if len(monitors) < 2:
        raise GraphError("graph JSON must declare at least 2 monitors")
    return build_extended_graph(g, monitors), metrics


def _cmd_identify(args) -> int:
    gex, metrics = _load_extended(args.graph)
    if metrics is None or set(metrics) != set(gex.base.links):
        raise GraphError("identify requires a metric for every link")
    result = identify_all(gex, truth=metrics)
    out = {
        "recovered": {link_key(l): v for l, v in sorted(result.recovered.items())},
        "max_rel_err": result.max_rel_err,
        "paths_used": result.paths_used,
        "t_structured_ms": result.t_structured_ms,
        "t_dense_ms": result.t_dense_ms,
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _path_json(p) -> dict:
    return {
        "nodes": list(p.nodes),
        "kind": p.kind,
        "link": link_key(p.nontree_link) if p.nontree_link else None,
    }


def _cmd_paths(args) -> int:
    gex, _metrics = _load_extended(args.graph)
    pipe = build_pipeline(gex)
    paths = [_path_json(p) for p in pipe.paths]
    if args.dot:
        _write_dot(args.dot, pipe)
        print(f"wrote {args.dot}", file=sys.stderr)
    if args.emit_trees:
        out = {
            "paths": paths,
            "trees": {
                TREE_NAMES[i]: dict(sorted(pipe.trees.parent[i].items()))
                for i in (1, 2, 3)
            },
        }
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
    else:
        json.dump(paths, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _write_dot(path: str, pipe) -> None:
    colors = {1: "blue", 2: "green", 3: "red"}
    lines = ["graph trees {"]
    for tree in (1, 2, 3):
        for v, p in sorted(pipe.trees.parent[tree].items()):
            lines.append(f'  "{v}" -- "{p}" [color={colors[tree]}];')
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_verify(args) -> int:
    gex, _metrics = _load_extended(args.graph)
    pipe = build_pipeline(gex)
    violations = [
        *validate_ears(gex, pipe.ears),
        *validate_st(gex, pipe.st),
        *(f"independence: {v} trees {i},{j} share {shared}" for v, i, j, shared in verify_independence(pipe.trees)),
    ]
    report = harness.run_harness(pipe)
    violations.extend(report.violations)
    counting = report.counting
    out = {
        "ears": [list(e) for e in pipe.ears.ears],
        "f": dict(sorted(pipe.st.f.items())),
        "violations": violations,
        "lemma1": report.lemma1,
        "counting": {
            "b1": counting.b1,
            "b2": counting.b2,
            "delta": list(counting.delta),
            "eps": list(counting.eps),
            "eps_prime": list(counting.eps_prime),
            "q": list(counting.q),
            "attributed": list(counting.attributed),
            "n_e": counting.n_e,
            "gm_links": counting.gm_links,
            "gm_nodes": counting.gm_nodes,
            "distinct_cycles": counting.distinct_cycles,
            "v_count": counting.v_count,
            "y_prime_size": counting.y_prime_size,
            "trivial_residues": counting.trivial_residues,
        },
        "paths": len(pipe.paths),
        "links": gex.base.n,
    }
    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_IDENTITY if violations else EXIT_OK


def _instance_metrics(g, seed: int) -> dict:
    rng = random.Random(evaluation.derive_seed("metrics", seed))
    return {link: rng.uniform(1.0, 10.0) for link in g.links}


def _cmd_gen(args) -> int:
    seed = _seed_default(args.seed)
    spec = evaluation.GeneratorSpec(args.family, args.nodes, args.param, seed)
    g = evaluation.generate(spec)
    if args.placement == "random":
        monitors, gate = evaluation.place_monitors_random(g, args.kappa or 3, seed)
    else:
        monitors, gate = evaluation.place_monitors(g)
    metrics = _instance_metrics(g, seed)
    doc = graph_to_dict(g, monitors, metrics)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out} (gate={'pass' if gate else 'fail'})", file=sys.stderr)
    else:
        print(text)
    return EXIT_OK


def _cmd_eval(args) -> int:
    seed = _seed_default(args.seed)
    specs = [evaluation.GeneratorSpec(args.family, args.nodes, args.param, seed)]
    records, instances = evaluation.run_campaign(
        specs,
        args.instances,
        seed,
        repeats=args.repeats,
        jobs=args.jobs,
        placement=args.placement,
        kappa=args.kappa,
    )
    csv_text = evaluation.records_to_csv(records)
    fig_base = None
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}", file=sys.stderr)
        fig_base = os.path.splitext(args.out)[0]
    else:
        sys.stdout.write(csv_text)
    if args.figdir:
        os.makedirs(args.figdir, exist_ok=True)
        fig_base = os.path.join(args.figdir, f"{args.family}_{args.nodes}")
    if fig_base and not args.no_figures:
        for path in viz.save_campaign_figures(records, instances, fig_base):
            print(f"wrote {path}", file=sys.stderr)
    failures = [r for r in instances if r.error]
    for r in failures:
        print(f"instance {r.family}/{r.index} (seed {r.seed}): {r.error}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="linktomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_id = sub.add_parser("identify", help="recover all link metrics of a graph JSON")
    p_id.add_argument("--graph", required=True, help="graph JSON with metrics")
    p_id.set_defaults(fn=_cmd_identify)

    p_paths = sub.add_parser("paths", help="construct the measurement path set")
    p_paths.add_argument("--graph", required=True)
    p_paths.add_argument("--emit-trees", action="store_true", help="include the three parent maps")
    p_paths.add_argument("--dot", help="write the colored tree union as DOT")
    p_paths.set_defaults(fn=_cmd_paths)

    p_verify = sub.add_parser("verify", help="run decomposition validators and counting identities")
    p_verify.add_argument("--graph", required=True)
    p_verify.set_defaults(fn=_cmd_verify)

    p_gen = sub.add_parser("gen", help="generate a random instance as graph JSON")
    p_gen.add_argument("--family", choices=evaluation.FAMILIES, required=True)
    p_gen.add_argument("--nodes", type=int, required=True)
    p_gen.add_argument("--param", type=float, required=True)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--placement", choices=("greedy", "random"), default="greedy")
    p_gen.add_argument("--kappa", type=int, default=None, help="monitor count for random placement")
    p_gen.add_argument("--out", help="output path (default stdout)")
    p_gen.set_defaults(fn=_cmd_gen)

    p_eval = sub.add_parser("eval", help="random-graph campaign with CSV + figures")
    p_eval.add_argument("--family", choices=evaluation.FAMILIES, required=True)
    p_eval.add_argument("--nodes", type=int, required=True)
    p_eval.add_argument("--param", type=float, required=True)
    p_eval.add_argument("--instances", type=int, required=True)
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.add_argument("--jobs", type=int, default=1)
    p_eval.add_argument("--repeats", type=int, default=3, help="timing repeats per operation")
    p_eval.add_argument("--placement", choices=("greedy", "random"), default="greedy")
    p_eval.add_argument("--kappa", type=int, default=None)
    p_eval.add_argument("--out", help="CSV path, or - for stdout")
    p_eval.add_argument("--figdir", help="directory for figures")
    p_eval.add_argument("--no-figures", action="store_true")
    p_eval.set_defaults(fn=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except NotIdentifiable as exc:
        print(f"{args.command}: gate failure: {exc}", file=sys.stderr)
        return EXIT_GATE
    except IdentityViolation as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except (LinktomoError, OSError, json.JSONDecodeError) as exc:
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
