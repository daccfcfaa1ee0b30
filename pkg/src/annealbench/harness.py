"""Configuration-driven batch experiments.

An experiment is described by one INI-style text file (diff-able and
hashable); running it generates the instance, fans trials out over a
worker pool, and writes:

* ``run.csv``      the per-trial table with the fixed column order
                   trial_id, seed, steps, max_size, step_of_max, alpha,
                   ratio, root_added, deload_final;
* ``stats.csv``    per-trial extras (schedule, side counts, probes,
                   hitting steps, chain discrepancies);
* ``manifest.txt`` config hash, tool version, per-trial seeds, wall clock,
                   output files.

Determinism contract: everything flows from the master seed through
counter-based per-trial streams, so the CSV bytes are identical for any
worker count.  Workers share the parent's instance memory via fork.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import dynamics as dy
from . import graph_core as gc
from . import instance_gen as ig
from . import oracles as oc
from . import rng as rngmod
from .errors import ConfigError, IncompleteRun, IoError
from .schedules import parse_schedule

RUN_CSV_COLUMNS = (
    "trial_id",
    "seed",
    "steps",
    "max_size",
    "step_of_max",
    "alpha",
    "ratio",
    "root_added",
    "deload_final",
)

STATS_CSV_COLUMNS = (
    "trial_id",
    "schedule",
    "final_size",
    "final_left",
    "final_right",
    "right_touched",
    "probe_count",
    "hits",
    "discrepancy",
    "residual",
)

_ALGORITHMS = ("ump", "ct", "greedy", "degree-greedy", "chain")


@dataclass
class ExperimentConfig:
    name: str
    family: str
    instance: dict[str, str]
    schedules: list[str]
    algorithm: str = "ump"
    steps: int | None = None
    events: int | None = None
    horizon: str | None = None  # float literal or "burn"
    trials: int = 1
    seed: int = 0
    out_dir: str = "out"
    thresholds: tuple[int, ...] = ()
    early_stop_size: int | None = None
    snapshot_every: int | None = None
    watch_root: bool = False
    probe_step: int | None = None
    track_touched: bool = False
    alpha_override: int | None = None
    acceptance: list[tuple[str, str]] = field(default_factory=list)

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "ump" and not self.steps:
            raise ConfigError("ump runs need steps")
        if self.algorithm == "ct" and not (self.events or self.horizon):
            raise ConfigError("ct runs need events or horizon")
        if self.algorithm in ("ump", "ct") and not self.schedules:
            raise ConfigError("no schedules configured")
        for spec in self.schedules:
            parse_schedule(spec)

    @property
    def schedule_count(self) -> int:
        if self.algorithm in ("greedy", "degree-greedy", "chain"):
            return 1
        return len(self.schedules)

    @property
    def total_trials(self) -> int:
        return self.trials * self.schedule_count


def load_config(path: str | Path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return _config_from_parser(parser)


def loads_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(text)
    return _config_from_parser(parser)


def _config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    try:
        exp = parser["experiment"]
        inst = dict(parser["instance"])
        run = parser["run"] if parser.has_section("run") else {}
    except KeyError as exc:
        raise ConfigError(f"missing config section: {exc}") from exc
    family = inst.pop("family", None)
    if family is None:
        raise ConfigError("[instance] must set family")
    schedules: list[str] = []
    if parser.has_section("schedules"):
        raw = parser["schedules"].get("specs", "")
        schedules = [s.strip() for s in raw.split(",") if s.strip()]
    acceptance: list[tuple[str, str]] = []
    if parser.has_section("acceptance"):
        acceptance = sorted(parser["acceptance"].items())

    def _opt_int(section, key):
        val = section.get(key)
        return int(float(val)) if val not in (None, "") else None

    cfg = ExperimentConfig(
        name=exp.get("name", "experiment"),
        family=family,
        instance=inst,
        schedules=schedules,
        algorithm=run.get("algorithm", "ump"),
        steps=_opt_int(run, "steps"),
        events=_opt_int(run, "events"),
        horizon=run.get("horizon") or None,
        trials=_opt_int(run, "trials") or 1,
        seed=_opt_int(run, "seed") or 0,
        out_dir=exp.get("out_dir", "out"),
        thresholds=tuple(
            int(float(x)) for x in run.get("thresholds", "").split(",") if x.strip()
        ),
        early_stop_size=_opt_int(run, "early_stop_size"),
        snapshot_every=_opt_int(run, "snapshot_every"),
        watch_root=str(run.get("watch_root", "false")).lower() in ("1", "true", "yes"),
        probe_step=_opt_int(run, "probe_step"),
        track_touched=str(run.get("track_touched", "false")).lower()
        in ("1", "true", "yes"),
        alpha_override=_opt_int(run, "alpha"),
        acceptance=acceptance,
    )
    cfg.validate()
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of the semantic fields only: formatting and comments drop out."""
    h = hashlib.sha256()
    parts = [
        ("experiment.name", cfg.name),
        ("instance.family", cfg.family),
        *[(f"instance.{k}", str(v)) for k, v in sorted(cfg.instance.items())],
        *[(f"schedules.{i}", s) for i, s in enumerate(cfg.schedules)],
        ("run.algorithm", cfg.algorithm),
        ("run.steps", str(cfg.steps)),
        ("run.events", str(cfg.events)),
        ("run.horizon", str(cfg.horizon)),
        ("run.trials", str(cfg.trials)),
        ("run.seed", str(cfg.seed)),
        ("run.thresholds", str(cfg.thresholds)),
        ("run.early_stop_size", str(cfg.early_stop_size)),
        ("run.snapshot_every", str(cfg.snapshot_every)),
        ("run.watch_root", str(cfg.watch_root)),
        ("run.probe_step", str(cfg.probe_step)),
        ("run.track_touched", str(cfg.track_touched)),
        ("run.alpha", str(cfg.alpha_override)),
        *[(f"acceptance.{k}", v) for k, v in cfg.acceptance],
    ]
    for key, value in parts:
        h.update(key.encode())
        h.update(b"=")
        h.update(value.encode())
        h.update(b"\n")
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Instance preparation


@dataclass
class InstanceBundle:
    family: str
    graph: gc.Graph | None
    alpha: int | None
    watch: tuple[int, ...] = ()
    probe_vertices: tuple[int, ...] = ()
    ct_template: dict | None = None  # rates/multipliers/horizon-or-events
    chain_params: tuple[int, float] | None = None  # (n, p) for chain runs
    burn_params: ig.BlowupParams | None = None


def build_instance(cfg: ExperimentConfig) -> InstanceBundle:
    fam = cfg.family
    p = cfg.instance

    def need(*keys):
        missing = [k for k in keys if k not in p]
        if missing:
            raise ConfigError(f"family {fam} needs instance keys {missing}")

    if fam == "star-tree":
        need("k")
        k = int(p["k"])
        g = ig.gen_star_tree(k)
        _, mids, _ = ig.star_tree_regions(k)
        return InstanceBundle(
            family=fam,
            graph=g,
            alpha=cfg.alpha_override or ig.formula_alpha("star-tree", k=k),
            watch=(0,) if cfg.watch_root else (),
            probe_vertices=tuple(int(v) for v in mids),
        )
    if fam == "hard-tree":
        need("k", "copies")
        k, copies = int(p["k"]), int(p["copies"])
        g = ig.gen_hard_tree(k, copies)
        roots = tuple(c * (2 * k + 1) for c in range(copies))
        return InstanceBundle(
            family=fam,
            graph=g,
            alpha=cfg.alpha_override or ig.formula_alpha("hard-tree", k=k, copies=copies),
            watch=roots if cfg.watch_root else (),
        )
    if fam == "anchor":
        need("n")
        n = int(p["n"])
        return InstanceBundle(
            family=fam,
            graph=ig.gen_appendix_anchor(n),
            alpha=cfg.alpha_override or ig.formula_alpha("anchor", n=n),
        )
    if fam == "multicopy":
        need("n", "eps")
        n, eps = int(p["n"]), float(p["eps"])
        return InstanceBundle(
            family=fam,
            graph=ig.gen_appendix_multicopy(n, eps),
            alpha=cfg.alpha_override or ig.formula_alpha("multicopy", n=n, eps=eps),
        )
    if fam == "clique-blowup":
        need("n", "k", "p", "ell")
        params = ig.BlowupParams(
            n=int(p["n"]), k=int(p["k"]), ell=int(p["ell"]), p=float(p["p"]),
            seed=cfg.seed,
        )
        mode = p.get("mode", "implicit")
        base = ig.gen_base_bipartite(params.n, params.k, params.p, seed=cfg.seed)
        alpha = cfg.alpha_override or params.k * params.n  # certified lower bound
        if mode == "explicit":
            g = ig.gen_clique_blowup(params, base=base)
            return InstanceBundle(family=fam, graph=g, alpha=alpha)
        horizon = None
        if cfg.horizon == "burn":
            horizon = oc.burn_in_time(params)
        elif cfg.horizon:
            horizon = float(cfg.horizon)
        template = {
            "ell": params.ell,
            "events": cfg.events if horizon is None else None,
            "horizon": horizon,
        }
        return InstanceBundle(
            family=fam,
            graph=base,
            alpha=alpha,
            ct_template=template,
            burn_params=params,
        )
    if fam == "balanced-bipartite":
        need("n", "d")
        n, d = int(p["n"]), float(p["d"])
        if cfg.algorithm == "chain":
            return InstanceBundle(
                family=fam, graph=None, alpha=None, chain_params=(n, d / n)
            )
        g = ig.gen_random_balanced_bipartite(n, d, seed=cfg.seed)
        alpha = cfg.alpha_override or gc.alpha_bipartite(g).alpha
        return InstanceBundle(family=fam, graph=g, alpha=alpha)
    if fam == "bipartite-blowup":
        need("base_n", "base_k", "base_p", "cloud_size", "copies")
        base = ig.gen_base_bipartite(
            int(p["base_n"]), int(p["base_k"]), float(p["base_p"]), seed=cfg.seed
        )
        g, meta = ig.gen_bipartite_blowup(base, int(p["cloud_size"]), int(p["copies"]))
        alpha = cfg.alpha_override or ig.formula_alpha(
            "bipartite-blowup",
            alpha_base=gc.alpha_bipartite(base).alpha,
            cloud_size=meta.cloud_size,
            copies=meta.copies,
        )
        return InstanceBundle(family=fam, graph=g, alpha=alpha)
    raise ConfigError(f"unknown instance family {fam!r}")


# ---------------------------------------------------------------------------
# Trial execution


def trial_seed(master: int, trial_id: int) -> int:
    return rngmod.stream_id(master, rngmod.DOMAIN_TRIAL, trial_id)


def _recorder_for(cfg: ExperimentConfig, bundle: InstanceBundle) -> dy.RecorderConfig:
    return dy.RecorderConfig(
        thresholds=cfg.thresholds,
        snapshot_every=cfg.snapshot_every,
        watch=bundle.watch,
        probe_step=cfg.probe_step,
        probe_vertices=bundle.probe_vertices if cfg.probe_step else (),
        early_stop_size=cfg.early_stop_size,
        track_touched=cfg.track_touched,
        track_clouds=bundle.graph is not None and bundle.graph.group is not None
        and cfg.family == "bipartite-blowup",
    )


def run_one_trial(
    cfg: ExperimentConfig, bundle: InstanceBundle, trial_id: int
) -> dict:
    """Execute one trial and flatten it into a CSV row dict."""
    seed = trial_seed(cfg.seed, trial_id)
    sched_idx = trial_id // cfg.trials if cfg.schedule_count > 1 else 0
    row: dict[str, object] = {
        "trial_id": trial_id,
        "seed": seed,
        "schedule": "",
        "discrepancy": "",
        "residual": "",
    }
    if cfg.algorithm == "chain":
        n, prob = bundle.chain_params
        res = dy.run_greedy_chain(n, prob, seed)
        row.update(
            steps=2 * n,
            max_size=res.total,
            step_of_max=2 * n,
            final_size=res.total,
            final_left=res.left,
            final_right=res.right,
            right_touched="",
            probe_count="",
            hits="",
            root_added="",
            deload_final="",
            discrepancy=res.discrepancy,
            residual=f"{res.residual:.6f}",
        )
    elif cfg.algorithm == "greedy":
        chosen, rec = dy.run_randomized_greedy(bundle.graph, seed)
        row.update(_record_fields(rec))
    elif cfg.algorithm == "degree-greedy":
        chosen = dy.run_degree_greedy(bundle.graph)
        row.update(
            steps=bundle.graph.n,
            max_size=len(chosen),
            step_of_max=len(chosen),
            final_size=len(chosen),
            final_left="",
            final_right="",
            right_touched="",
            probe_count="",
            hits="",
            root_added="",
            deload_final="",
        )
    elif cfg.algorithm == "ct":
        sched = parse_schedule(cfg.schedules[sched_idx])
        row["schedule"] = cfg.schedules[sched_idx]
        tpl = bundle.ct_template
        ct_cfg = dy.WeightedCTConfig.blowup_implicit(
            bundle.graph, tpl["ell"], horizon=tpl["horizon"], events=tpl["events"]
        )
        rec = dy.run_ct_ump(
            bundle.graph, ct_cfg, sched, seed, recorder=_recorder_for(cfg, bundle)
        )
        row.update(_record_fields(rec))
    else:  # ump
        sched = parse_schedule(cfg.schedules[sched_idx])
        row["schedule"] = cfg.schedules[sched_idx]
        rec = dy.run_ump(
            bundle.graph,
            sched,
            cfg.steps,
            seed,
            recorder=_recorder_for(cfg, bundle),
        )
        row.update(_record_fields(rec))

    alpha = bundle.alpha
    row["alpha"] = alpha if alpha is not None else ""
    row["ratio"] = f"{row['max_size'] / alpha:.6f}" if alpha else ""
    return row


def _record_fields(rec: dy.TrialRecord) -> dict:
    hits = ";".join(f"{k}:{v}" for k, v in sorted(rec.hitting_steps.items()))
    return dict(
        steps=rec.steps,
        max_size=rec.max_size,
        step_of_max=rec.step_of_max,
        final_size=rec.final_size,
        final_left=rec.final_left if rec.final_left >= 0 else "",
        final_right=rec.final_right if rec.final_right >= 0 else "",
        right_touched=rec.right_touched if rec.right_touched is not None else "",
        probe_count=rec.probe_count if rec.probe_count is not None else "",
        hits=hits,
        root_added=int(rec.root_added),
        deload_final=rec.deload_final if rec.deload_final is not None else "",
    )


# Worker context shared through fork(); set just before the pool starts.
_WORKER_CTX: dict = {}


def _pool_trial(trial_id: int) -> dict:
    return run_one_trial(_WORKER_CTX["cfg"], _WORKER_CTX["bundle"], trial_id)


def worker_count(default: int | None = None) -> int:
    env = os.environ.get("ANNEALBENCH_WORKERS")
    if env:
        return max(1, int(env))
    if default:
        return default
    return max(1, os.cpu_count() or 1)


@dataclass
class ExperimentManifest:
    config_hash: str
    version: str
    master_seed: int
    trial_seeds: list[int]
    wall_clock: float
    files: list[str]
    rows: list[dict]


def run_experiment(
    cfg: ExperimentConfig, workers: int | None = None
) -> ExperimentManifest:
    """Generate the instance, run all trials, persist CSVs and manifest."""
    cfg.validate()
    started = time.time()
    bundle = build_instance(cfg)
    if bundle.graph is not None:
        bundle.graph.neighbor_lists  # build once, shared with forked workers

    ids = list(range(cfg.total_trials))
    nworkers = worker_count(workers)
    if nworkers > 1 and len(ids) > 1:
        import multiprocessing as mp

        _WORKER_CTX["cfg"] = cfg
        _WORKER_CTX["bundle"] = bundle
        try:
            with mp.Pool(min(nworkers, len(ids))) as pool:
                rows = pool.map(_pool_trial, ids, chunksize=1)
        finally:
            _WORKER_CTX.clear()
    else:
        rows = [run_one_trial(cfg, bundle, i) for i in ids]
    rows.sort(key=lambda r: r["trial_id"])

    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output dir {out}: {exc}") from exc

    run_path = out / "run.csv"
    stats_path = out / "stats.csv"
    _write_csv(run_path, RUN_CSV_COLUMNS, rows)
    _write_csv(stats_path, STATS_CSV_COLUMNS, rows)

    manifest = ExperimentManifest(
        config_hash=config_hash(cfg),
        version=__version__,
        master_seed=cfg.seed,
        trial_seeds=[trial_seed(cfg.seed, i) for i in ids],
        wall_clock=time.time() - started,
        files=[str(run_path), str(stats_path)],
        rows=rows,
    )
    _write_manifest(out / "manifest.txt", manifest)
    return manifest


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row.get(col, "") for col in columns])


def _write_manifest(path: Path, manifest: ExperimentManifest) -> None:
    lines = [
        f"config_hash = {manifest.config_hash}",
        f"version = {manifest.version}",
        f"master_seed = {manifest.master_seed}",
        f"wall_clock_s = {manifest.wall_clock:.3f}",
        f"files = {','.join(manifest.files)}",
        "trial_seeds:",
    ]
    lines += [f"  {i} {s}" for i, s in enumerate(manifest.trial_seeds)]
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Verdicts


@dataclass
class VerdictRow:
    check: str
    kind: str
    observed: float
    target: float
    passed: bool


@dataclass
class VerdictReport:
    rows: list[VerdictRow]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_text(self) -> str:
        out = []
        for r in self.rows:
            status = "PASS" if r.passed else "FAIL"
            out.append(
                f"[{status}] {r.check}: {r.kind} observed={r.observed:.6g} "
                f"target={r.target:.6g}"
            )
        return "\n".join(out) + "\n"

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(("check", "kind", "observed", "target", "passed"))
        for r in self.rows:
            writer.writerow(
                (r.check, r.kind, repr(r.observed), repr(r.target), int(r.passed))
            )
        return buf.getvalue()


def parse_verdict_csv(text: str) -> VerdictReport:
    reader = csv.DictReader(io.StringIO(text))
    rows = [
        VerdictRow(
            check=rec["check"],
            kind=rec["kind"],
            observed=float(rec["observed"]),
            target=float(rec["target"]),
            passed=bool(int(rec["passed"])),
        )
        for rec in reader
    ]
    return VerdictReport(rows)


def _fraction(rows: list[dict], predicate) -> float:
    return sum(1 for r in rows if predicate(r)) / len(rows)


def verdict(cfg: ExperimentConfig, rows: list[dict]) -> VerdictReport:
    """Evaluate the [acceptance] checks of a config against trial rows.

    Check grammar (one per line): ``NAME = KIND ARGS...`` with kinds
      frac_max_le X F    fraction of trials with max_size <= X is >= F
      frac_max_ge X F    fraction of trials with max_size >= X is >= F
      frac_root_added_le F
      frac_probe_ge X F  fraction with probe_count >= X is >= F
      frac_discrepancy_gt_le X F   fraction with |L-R| > X is <= F
      mean_ratio_le R
      mean_max_le X
    """
    if not rows:
        raise IncompleteRun("no trial rows to judge")
    out: list[VerdictRow] = []
    for name, spec in cfg.acceptance:
        parts = spec.split()
        kind = parts[0]
        args = [float(x) for x in parts[1:]]
        if kind == "frac_max_le":
            x, f = args
            obs = _fraction(rows, lambda r: float(r["max_size"]) <= x)
            out.append(VerdictRow(name, kind, obs, f, obs >= f))
        elif kind == "frac_max_ge":
            x, f = args
            obs = _fraction(rows, lambda r: float(r["max_size"]) >= x)
            out.append(VerdictRow(name, kind, obs, f, obs >= f))
        elif kind == "frac_root_added_le":
            (f,) = args
            obs = _fraction(rows, lambda r: str(r["root_added"]) in ("1", "True"))
            out.append(VerdictRow(name, kind, obs, f, obs <= f))
        elif kind == "frac_probe_ge":
            x, f = args
            obs = _fraction(rows, lambda r: r["probe_count"] != "" and float(r["probe_count"]) >= x)
            out.append(VerdictRow(name, kind, obs, f, obs >= f))
        elif kind == "frac_discrepancy_gt_le":
            x, f = args
            obs = _fraction(rows, lambda r: r["discrepancy"] != "" and float(r["discrepancy"]) > x)
            out.append(VerdictRow(name, kind, obs, f, obs <= f))
        elif kind == "mean_ratio_le":
            (r_target,) = args
            ratios = [float(r["ratio"]) for r in rows if r["ratio"] != ""]
            if not ratios:
                raise IncompleteRun(f"check {name}: no ratios recorded")
            obs = sum(ratios) / len(ratios)
            out.append(VerdictRow(name, kind, obs, r_target, obs <= r_target))
        elif kind == "mean_max_le":
            (x,) = args
            obs = sum(float(r["max_size"]) for r in rows) / len(rows)
            out.append(VerdictRow(name, kind, obs, x, obs <= x))
        else:
            raise ConfigError(f"unknown acceptance check kind {kind!r}")
    return VerdictReport(out)


def read_run_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_stats_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def merge_run_and_stats(run_rows: list[dict], stats_rows: list[dict]) -> list[dict]:
    by_id = {r["trial_id"]: dict(r) for r in run_rows}
    for s in stats_rows:
        by_id.setdefault(s["trial_id"], {}).update(s)
    return [by_id[k] for k in sorted(by_id, key=int)]
