"""Command-line entry point.

    netreservoir run --config exp.json --out results/ [--jobs N] [--set key=value ...]
    netreservoir sweep-alpha --config exp.json --out results/
    netreservoir gen-tasks --task pdm --seed 7 --out data.csv
    netreservoir null-model --graph edges.csv --seed 3 --out null.csv
    netreservoir inspect --graph edges.csv
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import tasks as tk
from .experiment import (
    SWEEP_COLUMNS,
    ConfigError,
    ExperimentConfig,
    _write_csv,
    alpha_sweep,
    rep_seeds,
    run_experiment,
    sweep_rows,
    write_results,
)
from .netgraph import degrees, format_edge_list, read_graph, rewire_null_model
from .reservoir import estimate_spectral_radius, select_nodes

SUBCOMMANDS = ("run", "sweep-alpha", "gen-tasks", "null-model", "inspect")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netreservoir",
        description="Benchmark weighted digraphs as echo state network reservoirs.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")

    def experiment_args(p):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, dotted keys for nested values (repeatable)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    experiment_args(sub.add_parser("run", help="perturbation experiment"))
    experiment_args(sub.add_parser("sweep-alpha", help="alpha sweep only"))

    p = sub.add_parser("gen-tasks", help="write a task dataset as CSV")
    p.add_argument("--task", required=True, choices=tk.TASK_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-trials", type=int)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--out", required=True)

    p = sub.add_parser("null-model", help="degree-preserving rewiring of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--swap-factor", type=int, default=10)
    p.add_argument("--out", required=True)

    p = sub.add_parser("inspect", help="graph summary")
    p.add_argument("--graph", required=True)
    p.add_argument("--nodes")
    p.add_argument("--top-k", type=int, default=5)
    return parser


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(config: dict, overrides) -> dict:
    config = json.loads(json.dumps(config))
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        *parents, leaf = key.split(".")
        node = config
        for part in parents:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r}: {part!r} is not an object")
        node[leaf] = _parse_value(value)
    return config


def load_config(path, overrides=()) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from None
    raw = apply_overrides(raw, overrides)
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as e:
        raise ConfigError(f"invalid config: {e}") from e


def parse_cli(argv=None) -> argparse.Namespace:
    """Parse ``argv``; usage errors exit with status 2."""
    return _build_parser().parse_args(argv)


def _cmd_run(args) -> None:
    cfg = load_config(args.config, args.overrides)
    result = run_experiment(cfg, jobs=args.jobs)
    write_results(result, args.out)


def _cmd_sweep(args) -> None:
    cfg = load_config(args.config, args.overrides)
    g = cfg.load_graph()
    sel = select_nodes(g, cfg.strategy, rep_seeds(cfg.master_seed, 0).selection)
    res = alpha_sweep(
        g, sel, cfg.task, cfg.task_params, cfg.alpha_grid, cfg.lam,
        cfg.master_seed, cfg.n_val_seeds, cfg.train_frac, cfg.washout_steps,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "alpha_sweep.csv", SWEEP_COLUMNS, sweep_rows([("real", sel, res)]))
    print("alpha\tmean_balanced_accuracy")
    for alpha, mean in zip(res.alphas, res.mean_balanced_accuracy):
        print(f"{alpha:g}\t{mean:.6f}")
    print(f"best_alpha\t{res.best_alpha:g}")


def _cmd_gen_tasks(args) -> None:
    params = tk.default_params(args.task)
    if args.n_trials is not None:
        params = tk.TaskParams(args.n_trials, params.timing, params.noise_sigma, params.coherence_set)
    if args.noise_sigma is not None:
        params = tk.TaskParams(params.n_trials, params.timing, args.noise_sigma, params.coherence_set)
    data = tk.generate(args.task, params.with_seed(args.seed))
    Path(args.out).write_text(tk.format_dataset_csv(data), encoding="utf-8")


def _cmd_null_model(args) -> None:
    g = read_graph(args.graph)
    Path(args.out).write_text(format_edge_list(rewire_null_model(g, args.seed, args.swap_factor)), encoding="utf-8")


def _cmd_inspect(args) -> None:
    g = read_graph(args.graph, args.nodes)
    deg = degrees(g)
    rho = estimate_spectral_radius(g.adjacency())
    print(f"nodes\t{g.n_nodes}")
    print(f"edges\t{g.n_edges}")
    print(f"self_loops\t{sum(1 for e in g.edges if e.src == e.dst)}")
    print(f"total_weight\t{sum(e.weight for e in g.edges)!r}")
    print(f"rho_raw\t{rho.value!r}" + ("" if rho.converged else "\t(upper bound, not converged)"))
    k = min(args.top_k, g.n_nodes)
    for name, arr in (("out_degree", deg.out_degree), ("in_degree", deg.in_degree)):
        order = sorted(range(g.n_nodes), key=lambda i: (-arr[i], i))[:k]
        print(f"top_{name}\t" + " ".join(f"{g.labels[i]}:{int(arr[i])}" for i in order))


COMMANDS = {
    "run": _cmd_run,
    "sweep-alpha": _cmd_sweep,
    "gen-tasks": _cmd_gen_tasks,
    "null-model": _cmd_null_model,
    "inspect": _cmd_inspect,
}


def dispatch(args: argparse.Namespace) -> int:
    try:
        COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"netreservoir {args.command}: config error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"netreservoir {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return dispatch(parse_cli(argv))


if __name__ == "__main__":
    sys.exit(main())
