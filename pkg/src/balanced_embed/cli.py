"""Command-line front end.

Commands: generate, greedy, balance, embed, oracle, boundary. Every command
emits a single structured JSON document (human-readable, fixed key order)
plus optional CSV coordinate files. Exit codes: 0 success, 1 usage error,
2 input/graph error, 3 guarantee violation (an embedding audit failing,
which indicates an implementation bug, not bad input).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .embedding import (
    distortion_report,
    drop_small_coordinates,
    drop_to_top,
    center_project,
    embed,
    hyperplane_check,
    lipschitz_audit,
    pca_reduce,
    separation_check,
)
from .generators import (
    NAMED_GRAPHS,
    gen_complete,
    gen_cycle,
    gen_erdos_renyi,
    gen_gaussian_clouds,
    gen_glued_paths,
    gen_grid,
    gen_path,
    gen_star,
    gen_swiss_roll,
    knn_graph,
    load_named,
)
from .graph import (
    GraphError,
    all_pairs_distances,
    boundary as compute_boundary,
    default_threads,
    isoperimetric_report,
)
from .greedy import RunConfig, TIE_BREAKS
from .io import (
    format_rational,
    read_edge_list,
    read_measure_file,
    read_point_file,
    write_coords_csv,
    write_edge_list,
    write_measure_file,
    write_point_file,
    write_points_csv,
)
from .measures import (
    MeasureError,
    UnbalancedMeasureError,
    brute_force_balanced,
    energy_quadratic,
    is_balanced,
)
from .pipeline import balanced_measure_pipeline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_GUARANTEE = 3


class GuaranteeViolation(RuntimeError):
    """A theorem-backed audit failed; the build is buggy, not the input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _measure_entry(mu, v: int) -> dict:
    rational = None
    if mu.exact is not None:
        rational = format_rational(mu.exact[v])
    return {"vertex": int(v), "rational": rational, "value": float(mu.weights[v])}


def _measure_block(mu) -> dict:
    support = [int(v) for v in mu.support()]
    return {
        "support": support,
        "support_size": len(support),
        "weights": [_measure_entry(mu, v) for v in support],
        "exact": mu.exact is not None,
    }


def _balance_block(report) -> dict:
    return {
        "balanced": bool(report.balanced),
        "max_transport": report.max_transport,
        "support_spread": report.support_spread,
        "argmax_count": int(len(report.argmax_set)),
        "tol": report.tol,
        "exact": report.exact,
    }


def _load_graph(args, parser):
    if getattr(args, "named", None):
        if args.input:
            parser.error("give either an input file or --named, not both")
        return load_named(args.named)
    if not args.input:
        parser.error("an input file or --named NAME is required")
    if getattr(args, "knn", None):
        cloud = read_point_file(args.input)
        return knn_graph(cloud, args.knn), cloud
    return read_edge_list(args.input, n=getattr(args, "n", None))


def _graph_block(g, dist, boundary_size) -> dict:
    return {
        "n": g.n,
        "edge_count": g.edge_count,
        "diam": dist.diam,
        "boundary_size": boundary_size,
    }


def _greedy_config(args) -> RunConfig:
    return RunConfig(
        max_steps=args.max_steps,
        stop_gap=args.stop_gap,
        sample_every=args.trace_every,
    )


def _config_block(args, seed_field: bool = True) -> dict:
    block = {
        "initial": [int(x) for x in args.initial.split(",")],
        "tie_break": args.tie_break,
        "max_steps": args.max_steps,
        "stop_gap": args.stop_gap,
        "eps_supp": args.eps_supp,
        "refine": not args.no_refine,
        "threads": args.threads if args.threads else default_threads(),
    }
    if seed_field:
        block["seed"] = args.seed
    return block


def _run_block(report) -> dict:
    return {
        "steps": report.steps,
        "converged": report.converged,
        "alpha_estimate": report.alpha_estimate,
        "energy": report.energy,
        "max_transport": report.max_transport,
        "gap": report.gap,
        "support_gap": report.support_gap,
        "heavy_eps": report.heavy_eps,
        "energy_trace": [[m, e] for m, e in report.energy_trace],
    }


def _run_pipeline(dist, args):
    return balanced_measure_pipeline(
        dist,
        initial=[int(x) for x in args.initial.split(",")],
        config=_greedy_config(args),
        tie_break=args.tie_break,
        seed=args.seed,
        eps_supp=args.eps_supp,
        refine=not args.no_refine,
    )


def cmd_generate(args, parser) -> int:
    kind = args.kind
    if kind in ("gaussian-clouds", "swiss-roll"):
        if kind == "swiss-roll":
            cloud = gen_swiss_roll(args.n, args.seed)
        else:
            centers = [
                [float(x) for x in point.split(",")]
                for point in args.centers.split(";")
            ]
            cloud = gen_gaussian_clouds(args.n_per_cluster, centers, args.stddev, args.seed)
        write_point_file(cloud, args.out)
        print(f"wrote {cloud.n} points to {args.out}")
        return EXIT_OK

    meta = None
    if kind == "path":
        g = gen_path(args.n)
    elif kind == "cycle":
        g = gen_cycle(args.n)
    elif kind == "complete":
        g = gen_complete(args.n)
    elif kind == "star":
        g = gen_star(args.leaves)
    elif kind == "grid":
        g = gen_grid(args.rows, args.cols)
    elif kind == "glued-paths":
        built = gen_glued_paths(args.m, args.ell)
        g = built.graph
        meta = {
            "hubs": [built.hub_a, built.hub_b],
            "midpoints": list(built.midpoints),
            "central_pairs": [list(p) for p in built.central_pairs],
        }
    elif kind == "er":
        g = gen_erdos_renyi(args.n, args.p, args.seed)
    elif kind == "named":
        g = load_named(args.name)
    else:  # pragma: no cover
        parser.error(f"unknown generator {kind!r}")
    write_edge_list(g, args.out)
    if meta is not None:
        Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {g.n} vertices / {g.edge_count} edges to {args.out}")
    return EXIT_OK


def cmd_greedy(args, parser) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args, parser)
    t1 = time.perf_counter()
    dist = all_pairs_distances(g, threads=args.threads)
    t2 = time.perf_counter()
    if args.no_boundary:
        bsize = None
    else:
        bsize = len(compute_boundary(g, dist))
    t3 = time.perf_counter()
    result = _run_pipeline(dist, args)
    t4 = time.perf_counter()

    warnings = []
    if not result.report.converged:
        warnings.append("greedy did not converge within max_steps")
    doc = {
        "schema": "balanced-embed/greedy-v1",
        "version": __version__,
        "graph": _graph_block(g, dist, bsize),
        "config": _config_block(args),
        "run": _run_block(result.report),
        "measure": {
            **_measure_block(result.measure),
            "refined": result.refined,
            "refine_failure": None if result.refinement is None or result.refinement.ok
            else result.refinement.reason,
            "energy": energy_quadratic(result.measure, dist),
        },
        "balance": _balance_block(result.balance),
        "warnings": warnings,
        "timings": {
            "load_s": t1 - t0,
            "apsp_s": t2 - t1,
            "boundary_s": t3 - t2,
            "greedy_refine_s": t4 - t3,
        },
    }
    if args.measure_out:
        write_measure_file(result.measure, args.measure_out)
    _emit(doc, args.out)
    return EXIT_OK


def cmd_balance(args, parser) -> int:
    g = _load_graph(args, parser)
    dist = all_pairs_distances(g, threads=args.threads)
    mu = read_measure_file(args.measure, n=g.n)
    report = is_balanced(mu, dist, tol=args.tol)
    doc = {
        "schema": "balanced-embed/balance-v1",
        "version": __version__,
        "graph": _graph_block(g, dist, None),
        "measure": _measure_block(mu),
        "balance": {
            **_balance_block(report),
            "argmax_set": [int(v) for v in report.argmax_set],
        },
    }
    _emit(doc, args.out)
    return EXIT_OK


def _audit_embedding(emb, dist, sample_seed: int) -> dict:
    lip = lipschitz_audit(emb, dist, seed=sample_seed)
    hyp = hyperplane_check(emb)
    sep = separation_check(emb, dist.diam)
    return {
        "lipschitz": {
            "max_ratio": lip.max_ratio,
            "violations": lip.violation_count,
            "worst_pair": list(lip.worst_pair),
            "pairs_checked": lip.pairs_checked,
            "sampled": lip.sampled,
        },
        "hyperplane": {
            "max_support_deviation": hyp.max_support_deviation,
            "exact": hyp.exact,
            "degenerate": hyp.degenerate,
        },
        "separation": {
            "min_average": sep.min_average,
            "bound": sep.bound,
            "satisfied": sep.satisfied,
        },
    }


def cmd_embed(args, parser) -> int:
    t0 = time.perf_counter()
    loaded = _load_graph(args, parser)
    g = loaded[0] if isinstance(loaded, tuple) else loaded
    dist = all_pairs_distances(g, threads=args.threads)
    t1 = time.perf_counter()

    refined = None
    if args.auto:
        result = _run_pipeline(dist, args)
        mu = result.measure
        refined = result.refined
    elif args.measure:
        mu = read_measure_file(args.measure, n=g.n)
    else:
        parser.error("embed needs --measure FILE or --auto")

    tol = float("inf") if args.force else None
    try:
        emb = embed(dist, mu, tol=tol)
    except UnbalancedMeasureError as exc:
        sys.stderr.write(f"error: {exc} (use --force to embed anyway)\n")
        return EXIT_INPUT
    t2 = time.perf_counter()

    audits = _audit_embedding(emb, dist, args.seed or 0)
    ok = (
        audits["lipschitz"]["violations"] == 0
        and audits["hyperplane"]["max_support_deviation"] <= 1e-9
        and audits["separation"]["satisfied"]
    )

    post: dict = {"dropped_to": None, "centered": bool(args.center), "pca": None}
    final = emb
    if args.drop_top is not None:
        final = drop_to_top(final, args.drop_top)
        post["dropped_to"] = final.dimension
    elif args.drop_below is not None:
        final = drop_small_coordinates(final, args.drop_below)
        post["dropped_to"] = final.dimension
    if final is not emb:
        lip2 = lipschitz_audit(final, dist, seed=args.seed or 0)
        audits["lipschitz_after_drop"] = {
            "max_ratio": lip2.max_ratio,
            "violations": lip2.violation_count,
        }
        ok = ok and lip2.violation_count == 0

    points = final.coords
    if args.center:
        points = center_project(points)
    if args.pca_dim is not None:
        pca = pca_reduce(points, args.pca_dim)
        points = pca.points
        post["pca"] = {
            "dim": args.pca_dim,
            "explained_variance_ratio": [float(x) for x in pca.explained_variance_ratio],
        }

    if args.audit:
        dr = distortion_report(emb, dist, seed=args.seed or 0)
        audits["distortion"] = {
            "c_estimate": dr.c_estimate,
            "in_band_fraction": dr.in_band_fraction,
            "collapsed_pairs": dr.collapsed_pairs,
            "pairs_checked": dr.pairs_checked,
        }

    outputs = {}
    if args.csv:
        if points is final.coords:
            write_coords_csv(final, args.csv)
        else:
            write_points_csv(points, args.csv)
        outputs["csv"] = args.csv
    t3 = time.perf_counter()

    doc = {
        "schema": "balanced-embed/embed-v1",
        "version": __version__,
        "graph": _graph_block(g, dist, None),
        "measure": {**_measure_block(mu), "refined": refined, "source": "auto" if args.auto else "file"},
        "embedding": {
            "dimension": emb.dimension,
            "alpha": emb.alpha,
            "support": [int(v) for v in emb.support],
        },
        "audits": audits,
        "post": post,
        "outputs": outputs,
        "guarantees_ok": ok,
        "timings": {"apsp_s": t1 - t0, "embed_s": t2 - t1, "post_s": t3 - t2},
    }
    _emit(doc, args.out)
    if not ok:
        raise GuaranteeViolation("an embedding audit failed; see the audits block")
    return EXIT_OK


def cmd_oracle(args, parser) -> int:
    g = _load_graph(args, parser)
    dist = all_pairs_distances(g, threads=args.threads)
    if args.mode == "grid":
        resolution = Fraction(args.resolution) if args.resolution else Fraction(1, 20)
        found = brute_force_balanced(dist, "grid", resolution=resolution)
    else:
        found = brute_force_balanced(dist, "supports", max_size=args.max_size)
    found = sorted(found, key=lambda t: (-t[1], tuple(int(v) for v in t[0].support())))
    doc = {
        "schema": "balanced-embed/oracle-v1",
        "version": __version__,
        "graph": _graph_block(g, dist, None),
        "mode": args.mode,
        "max_size": args.max_size if args.mode == "supports" else None,
        "resolution": str(args.resolution or "1/20") if args.mode == "grid" else None,
        "count": len(found),
        "measures": [
            {**_measure_block(mu), "energy": j} for mu, j in found
        ],
    }
    _emit(doc, args.out)
    return EXIT_OK


def cmd_boundary(args, parser) -> int:
    g = _load_graph(args, parser)
    dist = all_pairs_distances(g, threads=args.threads)
    b = compute_boundary(g, dist)
    iso = isoperimetric_report(g, dist, b)
    doc = {
        "schema": "balanced-embed/boundary-v1",
        "version": __version__,
        "graph": _graph_block(g, dist, len(b)),
        "boundary": {
            "members": [int(v) for v in b.members],
            "witness": {str(u): int(v) for u, v in sorted(b.witness.items())},
        },
        "isoperimetric": {
            "boundary_size": iso.boundary_size,
            "lower_bound": iso.lower_bound,
            "satisfied": iso.satisfied,
        },
    }
    _emit(doc, args.out)
    return EXIT_OK


def _add_graph_input(p: _Parser, with_knn: bool = False):
    p.add_argument("input", nargs="?", help="edge-list file (or point file with --knn)")
    p.add_argument("--named", choices=NAMED_GRAPHS, help="use a bundled catalog graph")
    p.add_argument("--n", type=int, default=None, help="vertex count override for edge lists")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="write the JSON document here instead of stdout")
    if with_knn:
        p.add_argument("--knn", type=int, default=None,
                       help="treat input as a point file and build its k-NN graph")


def _add_greedy_flags(p: _Parser):
    p.add_argument("--initial", default="0", help="comma-separated initial vertices")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--stop-gap", type=float, default=None)
    p.add_argument("--tie-break", choices=TIE_BREAKS, default="min_index")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--eps-supp", type=float, default=None)
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--trace-every", type=int, default=100)


def build_parser() -> _Parser:
    parser = _Parser(prog="balanced-embed", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write generated graphs / point clouds")
    gensub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind, options in {
        "path": [("--n", int, True)],
        "cycle": [("--n", int, True)],
        "complete": [("--n", int, True)],
        "star": [("--leaves", int, True)],
        "grid": [("--rows", int, True), ("--cols", int, True)],
        "glued-paths": [("--m", int, True), ("--ell", int, True)],
        "er": [("--n", int, True), ("--p", float, True), ("--seed", int, True)],
        "named": [("--name", str, True)],
        "swiss-roll": [("--n", int, True), ("--seed", int, True)],
        "gaussian-clouds": [
            ("--n-per-cluster", int, True),
            ("--centers", str, True),
            ("--stddev", float, True),
            ("--seed", int, True),
        ],
    }.items():
        kp = gensub.add_parser(kind)
        for flag, typ, required in options:
            kp.add_argument(flag, type=typ, required=required)
        kp.add_argument("--out", required=True)
        kp.set_defaults(func=cmd_generate)

    gr = sub.add_parser("greedy", help="run the greedy procedure and refine a measure")
    _add_graph_input(gr)
    _add_greedy_flags(gr)
    gr.add_argument("--no-boundary", action="store_true", help="skip the boundary scan")
    gr.add_argument("--measure-out", default=None, help="also write the measure file")
    gr.set_defaults(func=cmd_greedy)

    ba = sub.add_parser("balance", help="check whether a measure file is balanced")
    _add_graph_input(ba)
    ba.add_argument("measure", help="measure file: 'vertex weight' lines")
    ba.add_argument("--tol", type=float, default=None)
    ba.set_defaults(func=cmd_balance)

    em = sub.add_parser("embed", help="build and audit the 1-Lipschitz embedding")
    _add_graph_input(em, with_knn=True)
    _add_greedy_flags(em)
    em.add_argument("--measure", default=None, help="measure file to embed")
    em.add_argument("--auto", action="store_true", help="derive the measure by greedy + refine")
    em.add_argument("--force", action="store_true", help="embed even if the measure is unbalanced")
    em.add_argument("--drop-below", type=float, default=None)
    em.add_argument("--drop-top", type=int, default=None)
    em.add_argument("--center", action="store_true")
    em.add_argument("--pca-dim", type=int, default=None)
    em.add_argument("--audit", action="store_true", help="add the distortion report")
    em.add_argument("--csv", default=None, help="write final coordinates as CSV")
    em.set_defaults(func=cmd_embed)

    orc = sub.add_parser("oracle", help="brute-force balanced measures at desk scale")
    _add_graph_input(orc)
    orc.add_argument("--mode", choices=("grid", "supports"), required=True)
    orc.add_argument("--max-size", type=int, default=4)
    orc.add_argument("--resolution", default=None, help="grid step, e.g. 1/20")
    orc.set_defaults(func=cmd_oracle)

    bd = sub.add_parser("boundary", help="list boundary vertices and the size bound")
    _add_graph_input(bd)
    bd.set_defaults(func=cmd_boundary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except GuaranteeViolation as exc:
        sys.stderr.write(f"guarantee violation: {exc}\n")
        return EXIT_GUARANTEE
    except (GraphError, MeasureError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
