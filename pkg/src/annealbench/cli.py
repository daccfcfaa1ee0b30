"""Command line interface: gen | run | alpha | experiment | report.

Exit code 0 means every acceptance verdict passed (or none were asked for).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dynamics as dy
from . import graph_core as gc
from . import harness as hz
from . import instance_gen as ig
from . import oracles as oc
from .errors import AnnealBenchError
from .schedules import parse_schedule


def _parse_params(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs or []:
        key, _, value = pair.partition("=")
        if not value:
            raise SystemExit(f"--param expects key=value, got {pair!r}")
        out[key] = value
    return out


def _cmd_gen(args) -> int:
    params = _parse_params(args.param)
    fam = args.family
    seed = args.seed
    alpha = None
    if fam == "star-tree":
        g = ig.gen_star_tree(int(params["k"]))
        alpha = ig.formula_alpha(fam, k=int(params["k"]))
    elif fam == "hard-tree":
        k, copies = int(params["k"]), int(params["copies"])
        apex = params.get("apex", "true").lower() in ("1", "true", "yes")
        g = ig.gen_hard_tree(k, copies, apex=apex)
        alpha = ig.formula_alpha(fam, k=k, copies=copies)
    elif fam == "anchor":
        n = int(params["n"])
        g = ig.gen_appendix_anchor(n)
        alpha = ig.formula_alpha(fam, n=n)
    elif fam == "multicopy":
        n, eps = int(params["n"]), float(params["eps"])
        g = ig.gen_appendix_multicopy(n, eps)
        alpha = ig.formula_alpha(fam, n=n, eps=eps)
    elif fam == "base-bipartite":
        g = ig.gen_base_bipartite(
            int(params["n"]), int(params["k"]), float(params["p"]), seed=seed
        )
    elif fam == "balanced-bipartite":
        g = ig.gen_random_balanced_bipartite(
            int(params["n"]), float(params["d"]), seed=seed
        )
        for note in ig.balanced_bipartite_flags(int(params["n"]), float(params["d"])):
            print(f"note: {note}", file=sys.stderr)
    elif fam == "clique-blowup":
        bp = ig.BlowupParams(
            n=int(params["n"]),
            k=int(params["k"]),
            ell=int(params["ell"]),
            p=float(params["p"]),
            seed=seed,
        )
        for note in ig.validate_relations(bp).messages:
            print(f"note: {note}", file=sys.stderr)
        g = ig.gen_clique_blowup(bp)
    elif fam == "bipartite-blowup":
        base = ig.gen_base_bipartite(
            int(params["base_n"]), int(params["base_k"]), float(params["base_p"]),
            seed=seed,
        )
        g, _ = ig.gen_bipartite_blowup(
            base, int(params["cloud_size"]), int(params["copies"])
        )
        alpha = ig.formula_alpha(
            "bipartite-blowup",
            alpha_base=gc.alpha_bipartite(base).alpha,
            cloud_size=int(params["cloud_size"]),
            copies=int(params["copies"]),
        )
    else:
        raise SystemExit(f"unknown family {fam!r}")
    gc.write_graph_file(g, args.out)
    meta = ig.sidecar_text(fam, params, seed, alpha)
    Path(args.out + ".meta").write_text(meta)
    print(f"wrote {args.out} ({g.n} vertices, {g.num_edges} edges)")
    return 0


def _cmd_alpha(args) -> int:
    g = gc.read_graph_file(args.graph)
    method = args.method
    if method == "auto":
        try:
            cert = gc.alpha_tree(g)
        except AnnealBenchError:
            try:
                cert = gc.alpha_bipartite(g)
            except AnnealBenchError:
                cert = gc.alpha_bruteforce(g)
    elif method == "tree":
        cert = gc.alpha_tree(g)
    elif method == "bipartite":
        cert = gc.alpha_bipartite(g)
    else:
        cert = gc.alpha_bruteforce(g)
    print(f"alpha = {cert.alpha} ({cert.method})")
    if args.witness and cert.witness is not None:
        print("witness =", " ".join(str(v) for v in sorted(cert.witness)))
    return 0


def _cmd_run(args) -> int:
    g = gc.read_graph_file(args.graph)
    alpha = args.alpha
    rows = []
    thresholds = tuple(int(x) for x in (args.thresholds or "").split(",") if x)
    for i in range(args.trials):
        seed = hz.trial_seed(args.seed, i)
        if args.algorithm == "greedy":
            chosen, rec = dy.run_randomized_greedy(g, seed)
        elif args.algorithm == "degree-greedy":
            chosen = dy.run_degree_greedy(g)
            rec = dy.TrialRecord(
                seed=seed,
                steps=g.n,
                max_size=len(chosen),
                step_of_max=len(chosen),
                final_size=len(chosen),
            )
        else:
            sched = parse_schedule(args.schedule)
            rec = dy.run_ump(
                g,
                sched,
                args.steps,
                seed,
                recorder=dy.RecorderConfig(
                    thresholds=thresholds,
                    early_stop_size=args.early_stop,
                    watch=tuple(int(v) for v in (args.watch or "").split(",") if v),
                ),
            )
        row = {"trial_id": i, "seed": seed, "schedule": args.schedule}
        row.update(hz._record_fields(rec))
        row["alpha"] = alpha if alpha is not None else ""
        row["ratio"] = f"{rec.max_size / alpha:.6f}" if alpha else ""
        rows.append(row)
    hz._write_csv(Path(args.out), hz.RUN_CSV_COLUMNS, rows)
    print(f"wrote {args.out} ({len(rows)} trials)")
    return 0


def _cmd_experiment(args) -> int:
    cfg = hz.load_config(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    manifest = hz.run_experiment(cfg, workers=args.workers)
    print(f"ran {len(manifest.rows)} trials in {manifest.wall_clock:.1f}s")
    print(f"config hash {manifest.config_hash}")
    if not cfg.acceptance:
        return 0
    report = hz.verdict(cfg, manifest.rows)
    out = Path(cfg.out_dir)
    (out / "verdict.csv").write_text(report.to_csv_text())
    (out / "verdict.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    return 0 if report.all_passed else 1


def _cmd_report(args) -> int:
    run_rows = hz.read_run_csv(args.run)
    rows = run_rows
    if args.stats:
        rows = hz.merge_run_and_stats(run_rows, hz.read_stats_csv(args.stats))
    records = [
        dy.TrialRecord(
            seed=int(r["seed"]),
            steps=int(r["steps"]),
            max_size=int(r["max_size"]),
            step_of_max=int(r["step_of_max"]),
            final_size=int(r.get("final_size") or r["max_size"]),
        )
        for r in rows
    ]
    alpha = args.alpha
    if alpha is None and rows and rows[0].get("alpha"):
        alpha = int(rows[0]["alpha"])
    thresholds = tuple(float(x) for x in (args.thresholds or "").split(",") if x)
    stats = oc.summarize(records, alpha=alpha, thresholds=thresholds)
    lines = [
        f"trials = {stats.count}",
        f"max_size mean = {stats.mean:.4f} (95% CI {stats.mean_ci[0]:.4f}..{stats.mean_ci[1]:.4f})",
        f"max_size std = {stats.std:.4f}",
    ]
    for q, v in stats.quantiles.items():
        lines.append(f"quantile {q:g} = {v:g}")
    if stats.ratio_mean is not None:
        lines.append(f"ratio mean = {stats.ratio_mean:.6f}")
    for x, freq in stats.failure_frequency.items():
        lo, hi = stats.failure_ci[x]
        lines.append(f"frac(max_size > {x:g}) = {freq:.4f} (95% CI {lo:.4f}..{hi:.4f})")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    exit_code = 0
    if args.config:
        cfg = hz.load_config(args.config)
        if cfg.acceptance:
            report = hz.verdict(cfg, rows)
            print(report.to_text(), end="")
            exit_code = 0 if report.all_passed else 1
    return exit_code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="annealbench",
        description="Stochastic local-search laboratory for maximum independent set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate an instance file")
    p_gen.add_argument("--family", required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--param", action="append", metavar="KEY=VALUE")
    p_gen.set_defaults(func=_cmd_gen)

    p_alpha = sub.add_parser("alpha", help="exact independence number")
    p_alpha.add_argument("--graph", required=True)
    p_alpha.add_argument(
        "--method", choices=("auto", "brute", "bipartite", "tree"), default="auto"
    )
    p_alpha.add_argument("--witness", action="store_true")
    p_alpha.set_defaults(func=_cmd_alpha)

    p_run = sub.add_parser("run", help="run trials on a graph file")
    p_run.add_argument("--graph", required=True)
    p_run.add_argument("--schedule", default="fixed:1")
    p_run.add_argument(
        "--algorithm", choices=("ump", "greedy", "degree-greedy"), default="ump"
    )
    p_run.add_argument("--steps", type=int, default=1000)
    p_run.add_argument("--trials", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--alpha", type=int)
    p_run.add_argument("--thresholds")
    p_run.add_argument("--early-stop", type=int, dest="early_stop")
    p_run.add_argument("--watch")
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(func=_cmd_run)

    p_exp = sub.add_parser("experiment", help="run a configured experiment")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--workers", type=int)
    p_exp.add_argument("--out-dir")
    p_exp.set_defaults(func=_cmd_experiment)

    p_rep = sub.add_parser("report", help="summarize run CSVs")
    p_rep.add_argument("--run", required=True)
    p_rep.add_argument("--stats")
    p_rep.add_argument("--config")
    p_rep.add_argument("--alpha", type=int)
    p_rep.add_argument("--thresholds")
    p_rep.add_argument("--out")
    p_rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AnnealBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
