"""Experiment orchestration: alpha sweep, perturbation runs, aggregation and
result files.

Every random draw comes from a sub-seed derived from ``master_seed`` (see
:mod:`netreservoir.seeding`), so a configuration fully determines its
outputs regardless of how repetitions are scheduled.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import tasks as tk
from .metrics import METRIC_NAMES, MetricReport, evaluate
from .netgraph import WeightedDigraph, erdos_renyi_digraph, read_graph, rewire_null_model
from .readout import predict, train_readout
from .reservoir import (
    DEGREE_INFORMED,
    STRATEGIES,
    Esn,
    EsnConfig,
    NodeSelection,
    build_esn,
    select_nodes,
    simulate,
    zero_out_nodes,
)
from .seeding import derive_seed

log = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = tuple(round(0.2 * k, 1) for k in range(1, 11))
DEFAULT_LAMBDA = 1e-6


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Resolved experiment settings.

    Either ``graph_path`` or ``synthetic`` (keys ``n_nodes``,
    ``mean_out_degree``, ``seed``) names the graph. ``alpha`` fixes the
    spectral radius and skips the sweep.
    """

    graph_path: Optional[str] = None
    nodes_path: Optional[str] = None
    synthetic: Optional[dict] = None
    task: str = tk.GONOGO
    task_params: Optional[tk.TaskParams] = None
    strategy: str = DEGREE_INFORMED
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    alpha: Optional[float] = None
    lam: float = DEFAULT_LAMBDA
    deletions_per_step: int = 3
    max_steps: int = 60
    repetitions: int = 10
    master_seed: int = 0
    rescale_after_perturbation: bool = False
    null_model: bool = False
    swap_factor: int = 10
    n_val_seeds: int = 3
    train_frac: float = 0.8
    washout_steps: int = 0

    def __post_init__(self):
        if self.task not in tk.TASK_NAMES:
            raise ConfigError(f"task must be one of {tk.TASK_NAMES}, got {self.task!r}")
        if self.task_params is None:
            self.task_params = tk.default_params(self.task)
        elif isinstance(self.task_params, dict):
            base = asdict(tk.default_params(self.task))
            base.update(self.task_params)
            if isinstance(self.task_params.get("timing"), dict):
                base["timing"] = {**asdict(tk.default_params(self.task).timing), **self.task_params["timing"]}
            self.task_params = tk.TaskParams(**base)
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        self.alpha_grid = tuple(float(a) for a in self.alpha_grid)
        if not self.alpha_grid or any(a <= 0 for a in self.alpha_grid):
            raise ConfigError("alpha_grid must be a nonempty list of positive values")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError("alpha must be > 0")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.deletions_per_step < 1:
            raise ConfigError("deletions_per_step must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.max_steps < 0 or self.n_val_seeds < 1 or self.swap_factor < 0:
            raise ConfigError("max_steps, swap_factor must be >= 0 and n_val_seeds >= 1")
        if (self.graph_path is None) == (self.synthetic is None):
            raise ConfigError("exactly one of graph_path and synthetic must be set")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d.pop("derived_seeds", None)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["lambda"] = d.pop("lam")
        d["task_params"] = self.task_params.to_dict()
        d["alpha_grid"] = list(self.alpha_grid)
        return d

    def load_graph(self) -> WeightedDigraph:
        if self.graph_path is not None:
            if not os.path.exists(self.graph_path):
                raise FileNotFoundError(f"graph file not found: {self.graph_path}")
            return read_graph(self.graph_path, self.nodes_path)
        s = self.synthetic
        return erdos_renyi_digraph(int(s["n_nodes"]), float(s["mean_out_degree"]), int(s.get("seed", 0)))


@dataclass(frozen=True)
class RepSeeds:
    selection: int
    task: int
    perturbation: int


def rep_seeds(master_seed: int, rep: int) -> RepSeeds:
    return RepSeeds(
        derive_seed(master_seed, "selection", rep),
        derive_seed(master_seed, "task", rep),
        derive_seed(master_seed, "perturbation", rep),
    )


def validation_seeds(master_seed: int, n: int) -> list[int]:
    return [derive_seed(master_seed, "validation", j) for j in range(n)]


def null_model_seed(master_seed: int) -> int:
    return derive_seed(master_seed, "null-model", 0)


@dataclass(frozen=True)
class AlphaSweepResult:
    alphas: tuple[float, ...]
    mean_balanced_accuracy: tuple[float, ...]
    best_alpha: float


@dataclass
class StepRecord:
    step: int
    deleted_ids: tuple[int, ...]
    report: MetricReport


@dataclass
class PerturbationTrace:
    rep: int
    graph: str
    alpha: float
    selection: NodeSelection
    seeds: RepSeeds
    steps: list[StepRecord] = field(default_factory=list)

    def metric(self, name: str) -> np.ndarray:
        return np.array([getattr(s.report, name) for s in self.steps])


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list[PerturbationTrace]
    null_traces: list[PerturbationTrace]
    sweeps: list[tuple[str, NodeSelection, AlphaSweepResult]]


def score_esn(
    esn: Esn, data: tk.TaskDataset, lam: float, train_frac: float = 0.8, washout: int = 0
) -> MetricReport:
    """Train the read-out on the first trials and score it on the rest.

    Train and test inputs are simulated separately, each from the zero state.
    """
    train, test = tk.split_by_trial(data, train_frac)
    x_train = simulate(esn, train.inputs).output_states
    x_test = simulate(esn, test.inputs).output_states
    model = train_readout(x_train, train.labels, lam, washout=washout)
    return evaluate(test.labels, predict(model, x_test), test.fixation)


def run_single(
    g: WeightedDigraph,
    sel: NodeSelection,
    alpha: float,
    task: str,
    task_params: tk.TaskParams,
    lam: float,
    seed: int,
    train_frac: float = 0.8,
    washout: int = 0,
) -> MetricReport:
    """Generate a dataset from ``seed``, build the reservoir, train and score."""
    esn = build_esn(g, sel, EsnConfig(alpha))
    data = tk.generate(task, task_params.with_seed(seed))
    return score_esn(esn, data, lam, train_frac, washout)


def alpha_sweep(
    g: WeightedDigraph,
    sel: NodeSelection,
    task: str,
    task_params: tk.TaskParams,
    alpha_grid: Sequence[float],
    lam: float,
    master_seed: int,
    n_val_seeds: int = 3,
    train_frac: float = 0.8,
    washout: int = 0,
) -> AlphaSweepResult:
    if not alpha_grid:
        raise ConfigError("alpha_grid must be nonempty")
    seeds = validation_seeds(master_seed, n_val_seeds)
    datasets = [tk.generate(task, task_params.with_seed(s)) for s in seeds]
    means = []
    for alpha in alpha_grid:
        esn = build_esn(g, sel, EsnConfig(alpha))
        scores = [score_esn(esn, d, lam, train_frac, washout).balanced_accuracy for d in datasets]
        means.append(float(np.mean(scores)))
    # first maximum wins; ties go to the smaller alpha
    best = min((a for a, m in zip(alpha_grid, means) if m == max(means)))
    return AlphaSweepResult(tuple(float(a) for a in alpha_grid), tuple(means), float(best))


def perturbation_run(
    g: WeightedDigraph,
    cfg: ExperimentConfig,
    rep: int,
    alpha: Optional[float] = None,
    graph_name: str = "real",
) -> PerturbationTrace:
    """Silence ``deletions_per_step`` random non-I/O nodes per step and rescore.

    Deletions accumulate over the run. Stops after ``max_steps`` steps or when
    too few eligible nodes remain. ``alpha`` defaults to ``cfg.alpha`` or, if
    that is unset, to the best value of a sweep.
    """
    k = cfg.deletions_per_step
    if g.n_nodes < 9 + k:
        raise ConfigError(f"graph has {g.n_nodes} nodes; need at least {9 + k}")
    seeds = rep_seeds(cfg.master_seed, rep)
    sel = select_nodes(g, cfg.strategy, seeds.selection)
    if alpha is None:
        alpha = cfg.alpha
    if alpha is None:
        alpha = alpha_sweep(
            g, sel, cfg.task, cfg.task_params, cfg.alpha_grid, cfg.lam,
            cfg.master_seed, cfg.n_val_seeds, cfg.train_frac, cfg.washout_steps,
        ).best_alpha

    data = tk.generate(cfg.task, cfg.task_params.with_seed(seeds.task))
    esn = build_esn(g, sel, EsnConfig(alpha))
    trace = PerturbationTrace(rep, graph_name, alpha, sel, seeds)

    def score(e):
        return score_esn(e, data, cfg.lam, cfg.train_frac, cfg.washout_steps)

    trace.steps.append(StepRecord(0, (), score(esn)))
    rng = np.random.default_rng(seeds.perturbation)
    eligible = sorted(set(range(g.n_nodes)) - set(sel.io_nodes))
    deleted: list[int] = []
    for step in range(1, cfg.max_steps + 1):
        if len(eligible) < k:
            break
        picked = sorted(int(i) for i in rng.choice(eligible, size=k, replace=False))
        eligible = [i for i in eligible if i not in picked]
        deleted.extend(picked)
        damaged = zero_out_nodes(esn, deleted, rescale=cfg.rescale_after_perturbation)
        trace.steps.append(StepRecord(step, tuple(picked), score(damaged)))
        log.debug("rep %d %s step %d: %s", rep, graph_name, step, trace.steps[-1].report)
    return trace


def _sweep_job(args):
    g, sel, cfg = args
    return alpha_sweep(
        g, sel, cfg.task, cfg.task_params, cfg.alpha_grid, cfg.lam,
        cfg.master_seed, cfg.n_val_seeds, cfg.train_frac, cfg.washout_steps,
    )


def _trace_job(args):
    g, cfg, rep, alpha, name = args
    return perturbation_run(g, cfg, rep, alpha, name)


def _map(fn, jobs, n_workers):
    if n_workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, jobs))


def run_experiment(
    cfg: ExperimentConfig, g: Optional[WeightedDigraph] = None, jobs: int = 1
) -> ExperimentResult:
    """Run all repetitions on the graph (and its null model if requested).

    Alpha sweeps are shared between repetitions that select the same nodes.
    Results are ordered by repetition index, never by completion order.
    """
    if g is None:
        g = cfg.load_graph()
    graphs = [("real", g)]
    if cfg.null_model:
        graphs.append(("null", rewire_null_model(g, null_model_seed(cfg.master_seed), cfg.swap_factor)))

    selections = {
        (name, rep): select_nodes(graph, cfg.strategy, rep_seeds(cfg.master_seed, rep).selection)
        for name, graph in graphs
        for rep in range(cfg.repetitions)
    }
    sweeps: list[tuple[str, NodeSelection, AlphaSweepResult]] = []
    best: dict[tuple[str, NodeSelection], float] = {}
    if cfg.alpha is None:
        keys = list(dict.fromkeys((name, sel) for (name, _), sel in selections.items()))
        graph_of = dict(graphs)
        results = _map(_sweep_job, [(graph_of[n], s, cfg) for n, s in keys], jobs)
        for key, res in zip(keys, results):
            sweeps.append((key[0], key[1], res))
            best[key] = res.best_alpha

    trace_jobs = []
    for name, graph in graphs:
        for rep in range(cfg.repetitions):
            alpha = cfg.alpha if cfg.alpha is not None else best[(name, selections[(name, rep)])]
            trace_jobs.append((graph, cfg, rep, alpha, name))
    traces = _map(_trace_job, trace_jobs, jobs)
    real = [t for t in traces if t.graph == "real"]
    null = [t for t in traces if t.graph == "null"]
    return ExperimentResult(cfg, real, null, sweeps)


def aggregate(traces: Sequence[PerturbationTrace]) -> list[dict]:
    """Per-step mean and population standard deviation of every metric."""
    rows = []
    n_steps = max((len(t.steps) for t in traces), default=0)
    for s in range(n_steps):
        reports = [t.steps[s].report for t in traces if len(t.steps) > s]
        row = {"step": s, "n": len(reports)}
        for name in METRIC_NAMES:
            vals = np.array([getattr(r, name) for r in reports])
            row[f"{name}_mean"] = float(vals.mean())
            row[f"{name}_std"] = float(vals.std())
        rows.append(row)
    return rows


TRACE_COLUMNS = ("step", "deleted_ids") + METRIC_NAMES
AGGREGATE_COLUMNS = ("step", "n") + tuple(f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "std"))
SWEEP_COLUMNS = ("graph", "input_nodes", "output_nodes", "alpha", "mean_balanced_accuracy", "best")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _ids(ids) -> str:
    return " ".join(str(i) for i in ids)


def trace_rows(trace: PerturbationTrace) -> list[dict]:
    return [
        {"step": s.step, "deleted_ids": _ids(s.deleted_ids), **{m: getattr(s.report, m) for m in METRIC_NAMES}}
        for s in trace.steps
    ]


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [
        {
            "step": int(r["step"]),
            "deleted_ids": tuple(int(i) for i in r["deleted_ids"].split()),
            **{m: float(r[m]) for m in METRIC_NAMES},
        }
        for r in rows
    ]


def sweep_rows(sweeps) -> list[dict]:
    rows = []
    for name, sel, res in sweeps:
        for alpha, mean in zip(res.alphas, res.mean_balanced_accuracy):
            rows.append({
                "graph": name,
                "input_nodes": _ids(sel.input_nodes),
                "output_nodes": _ids(sel.output_nodes),
                "alpha": alpha,
                "mean_balanced_accuracy": mean,
                "best": int(alpha == res.best_alpha),
            })
    return rows


def resolved_config(cfg: ExperimentConfig) -> dict:
    d = cfg.to_dict()
    d["derived_seeds"] = {
        "repetitions": [asdict(rep_seeds(cfg.master_seed, r)) for r in range(cfg.repetitions)],
        "validation": validation_seeds(cfg.master_seed, cfg.n_val_seeds),
        "null_model": null_model_seed(cfg.master_seed),
    }
    return d


def write_results(result: ExperimentResult, out_dir) -> list[Path]:
    """Write traces, aggregates, the sweep table, the resolved config and plots."""
    from .plots import plot_traces

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    written = []

    path = out / "config.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(resolved_config(result.config), f, indent=2)
        f.write("\n")
    written.append(path)

    for prefix, traces in (("trace", result.traces), ("trace_null", result.null_traces)):
        for t in traces:
            path = out / f"{prefix}_rep{t.rep}.csv"
            _write_csv(path, TRACE_COLUMNS, trace_rows(t))
            written.append(path)

    path = out / "aggregate.csv"
    _write_csv(path, AGGREGATE_COLUMNS, aggregate(result.traces))
    written.append(path)
    if result.null_traces:
        path = out / "aggregate_null.csv"
        _write_csv(path, AGGREGATE_COLUMNS, aggregate(result.null_traces))
        written.append(path)

    path = out / "alpha_sweep.csv"
    _write_csv(path, SWEEP_COLUMNS, sweep_rows(result.sweeps))
    written.append(path)

    if result.traces:
        for metric in METRIC_NAMES:
            path = out / f"perf_{metric}.svg"
            plot_traces(result.traces, metric, path)
            written.append(path)
    return written
