"""Command-line interface: one executable, one subcommand per pipeline.

Subcommands: ingest, count, fit, estimate, generate, sweep, recommend.
Reports go to stdout; data files land in --out-dir, each run accompanied by
a JSON manifest (command, argument vector, seed, input digest, tool version,
duration).  Rerunning a command with the same arguments and seed produces
byte-identical data files.

Exit codes: 0 success, 2 usage error, 3 unusable input, 4 infeasible
parameters.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time

from . import __version__
from .degrees import degree_distribution, fit_power_law
from .errors import InfeasibleError, InputError, SampleTooSparseError
from .estimators import EdgeSampleConfig, ForkSampleConfig, edge_sample, \
    estimate_from_sample, mc_fork_icc, mc_triangle_cc
from .exact import count_k22, count_report, local_icc_distribution, \
    report_entries, undirected_structure_counts
from .generator import ModelParams, feasible_p_interval, generate, \
    icc_vs_p_sweep, solve_delta, theoretical_exponents
from .graph import DirectedGraph, is_cache_file, load_cache, load_edge_list, \
    mutual_graph, save_cache, save_edge_list, strip_bidirectional, \
    undirected_projection
from .recommend import cohort_eval, k22_recommendations, tt_recommendations


class UsageError(Exception):
    """Bad flag values detected after argparse."""


def _positive_int(text: str) -> int:
    value = int(float(text))
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonneg_int(text: str) -> int:
    value = int(float(text))
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _probability(text: str) -> float:
    """Accept a decimal ("0.001") or a fraction string ("1/1000")."""
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            value = float(num) / float(den)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"bad fraction {text!r}")
    else:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad probability {text!r}")
    return value


def _load_graph(path: str) -> DirectedGraph:
    if not os.path.exists(path):
        raise InputError(f"no such input: {path}")
    try:
        if is_cache_file(path):
            return load_cache(path)
        return load_edge_list(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _check_threads(threads: int | None):
    if threads is not None and threads < 1:
        raise UsageError("--threads must be >= 1")


def _digest(path: str | None) -> str | None:
    if path is None or not os.path.exists(path):
        return None
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Run:
    """Collects output paths and writes the run manifest."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.argv = sys.argv[1:]
        self.t0 = time.time()
        self.input_path = getattr(args, "input", None)
        self.seed = getattr(args, "seed", None)
        self.outputs: list[str] = []
        self.out_dir = getattr(args, "out_dir", ".") or "."

    def path(self, name: str) -> str:
        os.makedirs(self.out_dir, exist_ok=True)
        full = os.path.join(self.out_dir, name)
        self.outputs.append(full)
        return full

    def finish(self):
        if not self.outputs:
            return
        manifest = {
            "command": self.command,
            "argv": self.argv,
            "seed": self.seed,
            "input_digest": _digest(self.input_path),
            "version": __version__,
            "outputs": [os.path.basename(p) for p in self.outputs],
            "duration_seconds": round(time.time() - self.t0, 3),
        }
        path = os.path.join(self.out_dir, f"{self.command}-manifest.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


# -- subcommands ----------------------------------------------------------------


def cmd_ingest(args) -> int:
    g = _load_graph(args.input)
    run = _Run("ingest", args)
    name = args.name or os.path.splitext(os.path.basename(args.input))[0]
    if args.to == "cache":
        out = run.path(f"{name}.k22g")
        save_cache(g, out)
    else:
        out = run.path(f"{name}.edges")
        save_edge_list(g, out)
    print(f"n = {g.n}")
    print(f"m = {g.m}")
    print(f"written = {out}")
    run.finish()
    return 0


def cmd_count(args) -> int:
    _check_threads(args.threads)
    g = _load_graph(args.input)
    run = _Run("count", args)
    variant = args.variant
    if variant == "no-bidir":
        g = strip_bidirectional(g)
    if variant in ("full", "no-bidir"):
        full, mutual, coeffs, meta = count_report(g, threads=args.threads)
        entries = report_entries(full, mutual, coeffs, meta)
    else:
        ug = mutual_graph(g) if variant == "mutual" \
            else undirected_projection(g)
        counts = undirected_structure_counts(ug, threads=args.threads)
        cc_name = "mcc" if variant == "mutual" else "ucc"
        meta = {"n": g.n, "m": g.m, "mutual_edges": ug.e} \
            if variant == "mutual" else {"n": g.n, "m": g.m}
        entries = report_entries(counts, None, None, meta)
        from .exact import Coefficient
        cc = Coefficient(3 * counts.und_triangles, counts.connected_triplets)
        entries.append((cc_name, cc.decimal()))
        if cc.defined:
            entries.append((f"{cc_name}_exact",
                            f"{cc.numerator}/{cc.denominator}"))
    for key, value in entries:
        print(f"{key} = {value}")
    if args.json:
        out = run.path(args.json)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(dict(entries), fh, indent=2)
            fh.write("\n")
    if args.per_node:
        res = count_k22(g, want_per_node=True, threads=args.threads)
        stats = res.per_node
        dist = local_icc_distribution(stats, bins=args.bins)
        vals, defined = stats.local_icc()
        per_path = run.path("per_node.csv")
        ext = g.ext_ids
        _write_csv(per_path, ["node", "k22_top", "open_k22_top", "local_icc"],
                   ((int(ext[i]), int(stats.k22_top[i]),
                     int(stats.open_k22_top[i]),
                     repr(float(vals[i])) if defined[i] else None)
                    for i in range(g.n)))
        hist_path = run.path("local_icc_hist.csv")
        _write_csv(hist_path, ["bin_lo", "bin_hi", "nodes"],
                   ((repr(float(dist.bin_edges[i])),
                     repr(float(dist.bin_edges[i + 1])),
                     int(dist.histogram[i]))
                    for i in range(len(dist.histogram))))
        print(f"local_icc_mean = "
              f"{'none' if dist.mean is None else repr(dist.mean)}")
        print(f"local_icc_defined_nodes = {dist.defined_nodes}")
        print(f"local_icc_excluded_nodes = {dist.undefined_nodes}")
    run.finish()
    return 0


def cmd_fit(args) -> int:
    g = _load_graph(args.input)
    if args.direction == "undirected":
        hist = degree_distribution(undirected_projection(g), "undirected")
    else:
        hist = degree_distribution(g, args.direction)
    fit = fit_power_law(hist, bins_per_decade=args.bins_per_decade,
                        tail_start=args.tail_start)
    print(f"direction = {args.direction}")
    print(f"slope = {fit.slope!r}")
    print(f"intercept = {fit.intercept!r}")
    print(f"r_squared = {fit.r_squared!r}")
    print(f"bins_used = {len(fit.bin_centers)}")
    return 0


def cmd_estimate(args) -> int:
    _check_threads(args.threads)
    if args.method == "edge-sample":
        if args.p is None:
            raise UsageError("edge-sample needs --p")
        if not 0.0 < args.p <= 1.0:
            raise UsageError("--p must be in (0, 1]")
    if args.method in ("mc-fork", "mc-triangle") and args.iterations is None:
        raise UsageError(f"{args.method} needs --iterations")
    if args.method == "mc-triangle" and args.variant is None:
        raise UsageError("mc-triangle needs --variant ucc|tcc|ccc")
    g = _load_graph(args.input)
    run = _Run("estimate", args)

    if args.method == "edge-sample":
        cfg = EdgeSampleConfig(probability=args.p, seed=args.seed,
                               replicates=args.replicates)
        rows = []
        zs = []
        failures = 0
        for rep in range(cfg.replicates):
            sample = edge_sample(g, cfg, replicate=rep)
            try:
                tr = estimate_from_sample(sample, cfg.probability)
                rows.append((rep, _fmt(cfg.probability), tr.raw_x,
                             tr.raw_x_o, _fmt(tr.y), _fmt(tr.y_o),
                             _fmt(tr.estimate)))
                zs.append(tr.estimate)
            except SampleTooSparseError as exc:
                failures += 1
                rows.append((rep, _fmt(cfg.probability), None, 0,
                             _fmt(exc.y), _fmt(0.0), None))
        out = run.path("edge_sample.csv")
        _write_csv(out, ["replicate", "p_s", "x", "x_o", "y", "y_o", "z"],
                   rows)
        if not zs:
            raise InputError("sample too sparse: no replicate produced a "
                             "defined estimate")
        zs.sort()
        median = zs[len(zs) // 2] if len(zs) % 2 else \
            0.5 * (zs[len(zs) // 2 - 1] + zs[len(zs) // 2])
        print(f"replicates = {cfg.replicates}")
        print(f"failed_replicates = {failures}")
        print(f"median_z = {median!r}")
        print(f"trace = {out}")
    elif args.method == "mc-fork":
        cfg = ForkSampleConfig(iterations=args.iterations, seed=args.seed)
        tr = mc_fork_icc(g, cfg)
        out = run.path("mc_fork.csv")
        _write_csv(out, ["iteration", "z", "running_std"],
                   ((it, _fmt(z), _fmt(s))
                    for it, z, s in zip(tr.checkpoints,
                                        tr.checkpoint_estimates,
                                        tr.running_std)))
        print(f"iterations = {tr.iterations_done}")
        print(f"z = {tr.estimate!r}")
        print(f"y = {tr.y!r}")
        print(f"y_o = {tr.y_o!r}")
        print(f"trace = {out}")
    else:
        graph = undirected_projection(g) if args.variant == "ucc" else g
        tr = mc_triangle_cc(graph, args.variant, args.iterations, args.seed)
        out = run.path(f"mc_triangle_{args.variant}.csv")
        _write_csv(out, ["iteration", "estimate", "running_std"],
                   ((it, _fmt(z), _fmt(s))
                    for it, z, s in zip(tr.checkpoints,
                                        tr.checkpoint_estimates,
                                        tr.running_std)))
        print(f"iterations = {tr.iterations_done}")
        print(f"estimate = {tr.estimate!r}")
        print(f"trace = {out}")
    run.finish()
    return 0


def cmd_generate(args) -> int:
    if args.solve_delta:
        if args.target_slope is None:
            raise UsageError("--solve-delta needs --target-slope")
        lo, hi = feasible_p_interval(args.target_slope, args.direction,
                                     args.alpha, args.beta)
        print(f"feasible_p = [{lo!r}, {hi!r}]")
        if args.p is not None:
            delta = solve_delta(args.target_slope, args.direction, args.p,
                                args.alpha, args.beta)
            print(f"delta_{args.direction} = {delta!r}")
        return 0
    if args.seed is None:
        raise UsageError("generate needs --seed")
    seed_graph = _load_graph(args.g0) if args.g0 else None
    params = ModelParams(p_k22=args.p if args.p is not None else 0.0,
                         alpha=args.alpha, beta=args.beta,
                         delta_in=args.delta_in, delta_out=args.delta_out,
                         steps=args.steps, seed=args.seed,
                         seed_graph=seed_graph)
    res = generate(params)
    run = _Run("generate", args)
    name = args.name or "generated"
    if args.format in ("edgelist", "both"):
        out = run.path(f"{name}.edges")
        save_edge_list(res.graph, out)
    if args.format in ("cache", "both"):
        out = run.path(f"{name}.k22g")
        save_cache(res.graph, out)
    print(f"nodes = {res.graph.n}")
    print(f"arcs = {res.graph.m}")
    print(f"nodes_added = {res.nodes_added}")
    print(f"arcs_before_dedup = {res.arcs_before_dedup}")
    print(f"multi_arcs_removed = {res.multi_arcs_removed}")
    print(f"self_loops_removed = {res.self_loops_removed}")
    try:
        theo = theoretical_exponents(params)
        print(f"theoretical_slope_in = {theo.slope_in!r}")
        print(f"theoretical_slope_out = {theo.slope_out!r}")
        print(f"theoretical_mean_degree = {theo.mean_degree!r}")
    except InfeasibleError:
        pass
    run.finish()
    return 0


def cmd_sweep(args) -> int:
    if args.seed is None:
        raise UsageError("sweep needs --seed")
    try:
        p_values = [float(tok) for tok in args.p_list.split(",") if tok]
    except ValueError:
        raise UsageError(f"bad --p-list {args.p_list!r}")
    if not p_values:
        raise UsageError("empty --p-list")
    base = ModelParams(p_k22=p_values[0], alpha=args.alpha, beta=args.beta,
                       delta_in=args.delta_in, delta_out=args.delta_out,
                       steps=args.steps, seed=args.seed)
    result = icc_vs_p_sweep(base, p_values, args.replicates,
                            include_baseline=not args.no_baseline)
    run = _Run("sweep", args)
    out = run.path("sweep.csv")
    _write_csv(out, ["model", "p", "replicate", "seed", "delta_in", "icc",
                     "nodes", "arcs", "stripped"],
               ((r.model, _fmt(r.p), r.replicate, r.seed, _fmt(r.delta_in),
                 _fmt(r.icc), r.nodes, r.arcs, r.stripped)
                for r in result.rows))
    for (model, p), (mean, spread, count) in sorted(
            result.summary().items()):
        spread_s = "none" if spread is None else repr(spread)
        print(f"{model} p={p!r} mean_icc={mean!r} spread={spread_s} "
              f"replicates={count}")
    print(f"table = {out}")
    run.finish()
    return 0


def cmd_recommend(args) -> int:
    if (args.user is None) == (args.cohort is None):
        raise UsageError("need exactly one of --user or --cohort")
    if args.cohort is not None and args.seed is None:
        raise UsageError("--cohort needs --seed")
    g = _load_graph(args.input)
    run = _Run("recommend", args)
    methods = ("k22", "tt") if args.method == "both" else (args.method,)
    if args.user is not None:
        x = g.to_dense(args.user)
        rows = []
        for method in methods:
            recs = k22_recommendations(g, x, args.k) if method == "k22" \
                else tt_recommendations(g, x, args.k)
            for r in recs:
                rows.append((g.to_external(r.user), r.rank,
                             g.to_external(r.candidate), r.strength, method))
        out = run.path("recommendations.csv")
        _write_csv(out, ["user", "rank", "candidate", "strength", "method"],
                   rows)
        print(f"user = {args.user}")
        print(f"rows = {len(rows)}")
        print(f"table = {out}")
    else:
        report = cohort_eval(g, count=args.cohort, seed=args.seed, k=args.k)
        users_out = run.path("cohort_users.csv")
        _write_csv(users_out,
                   ["user", "k22_max", "k22_kth", "tt_max", "tt_kth"],
                   ((g.to_external(e.user), e.k22_max, e.k22_kth, e.tt_max,
                     e.tt_kth) for e in report.entries))
        cdf_rows = []
        for method in methods:
            for which in ("max", "kth"):
                levels, fracs = report.cumulative(method, which)
                for level, frac in zip(levels, fracs):
                    cdf_rows.append((method, which, level, _fmt(frac)))
        cdf_out = run.path("cohort_cdf.csv")
        _write_csv(cdf_out, ["method", "which", "strength",
                             "fraction_at_least"], cdf_rows)
        print(f"cohort = {len(report.users)}")
        print(f"k = {report.k}")
        print(f"users_table = {users_out}")
        print(f"cdf_table = {cdf_out}")
    run.finish()
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="k22kit",
        description="Directed-graph clustering analytics around K22 "
                    "structures")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert an edge list or cache")
    p.add_argument("input")
    p.add_argument("--to", choices=("cache", "edgelist"), default="cache")
    p.add_argument("--name")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("count", help="exact structure counts and "
                                     "clustering coefficients")
    p.add_argument("input")
    p.add_argument("--variant", choices=("full", "mutual", "undirected",
                                         "no-bidir"), default="full")
    p.add_argument("--per-node", action="store_true",
                   help="write per-node K22 stats and the local "
                        "coefficient histogram")
    p.add_argument("--bins", type=_positive_int, default=100)
    p.add_argument("--threads", type=int)
    p.add_argument("--json", help="also write the report as JSON")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("fit", help="power-law tail fit of a degree "
                                   "distribution")
    p.add_argument("input")
    p.add_argument("--direction", choices=("in", "out", "undirected"),
                   default="in")
    p.add_argument("--bins-per-decade", type=_positive_int, default=10)
    p.add_argument("--tail-start", type=_positive_int, default=1)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("estimate", help="approximate coefficients by "
                                        "sampling")
    p.add_argument("input")
    p.add_argument("--method", choices=("edge-sample", "mc-fork",
                                        "mc-triangle"), required=True)
    p.add_argument("--p", type=_probability,
                   help="keep probability; decimal or fraction like 1/1000")
    p.add_argument("--replicates", type=_positive_int, default=1)
    p.add_argument("--iterations", type=_positive_int)
    p.add_argument("--variant", choices=("ucc", "tcc", "ccc"))
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("generate", help="random digraph with tunable K22 "
                                        "density")
    p.add_argument("--p", type=float, help="closure event probability")
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--delta-in", type=float, default=2.0)
    p.add_argument("--delta-out", type=float, default=2.0)
    p.add_argument("--steps", type=_nonneg_int, default=0)
    p.add_argument("--seed", type=_nonneg_int)
    p.add_argument("--g0", help="seed graph file (default: closed K22)")
    p.add_argument("--format", choices=("edgelist", "cache", "both"),
                   default="edgelist")
    p.add_argument("--name")
    p.add_argument("--solve-delta", action="store_true",
                   help="print the offset for --target-slope and the "
                        "feasible p interval instead of generating")
    p.add_argument("--target-slope", type=float)
    p.add_argument("--direction", choices=("in", "out"), default="in")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="exact icc across closure "
                                     "probabilities, matched baseline")
    p.add_argument("--p-list", required=True,
                   help="comma-separated closure probabilities")
    p.add_argument("--replicates", type=_positive_int, default=1)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--delta-in", type=float, default=2.0)
    p.add_argument("--delta-out", type=float, default=2.0)
    p.add_argument("--steps", type=_nonneg_int, required=True)
    p.add_argument("--seed", type=_nonneg_int)
    p.add_argument("--no-baseline", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("recommend", help="K22 / transitive-triangle link "
                                         "recommendations")
    p.add_argument("input")
    p.add_argument("--user", type=int, help="external node id")
    p.add_argument("--cohort", type=_positive_int,
                   help="sample this many users with out-degree > 0")
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--method", choices=("k22", "tt", "both"),
                   default="both")
    p.add_argument("--seed", type=_nonneg_int)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_recommend)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, SampleTooSparseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
