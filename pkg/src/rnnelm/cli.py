"""Command-line experiment runner.

Subcommands:
    run                  one experiment (any dataset/activation/pipeline)
    compare-activations  six runs, one per activation kind, shared seeds
    sweep                grid over principal components x hidden sizes
    reproduce            named presets: table1, fig1, table3

Dataset files are looked up under --data-dir (or $RNNELM_DATA_DIR),
expecting data-dir/mnist/<idx files> and data-dir/norb/<matrix files>.
Every invocation writes results.json (versioned, self-describing) and
results.csv (flat table) into --out.
"""

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .elm import AdaptConfig
from .errors import InvalidInputError
from .experiments import (
    MNIST_FILES,
    NORB_FILES,
    PRESETS,
    DatasetSpec,
    ExperimentConfig,
    compare_activations,
    preset_config,
    results_csv,
    results_document,
    results_json_bytes,
    run_experiment,
    sweep,
)
from .rnn import ClusterParams

DATA_DIR_ENV = "RNNELM_DATA_DIR"


def parse_seeds(text):
    """Parse '1-5', '1..5' or '1,4,9' into a tuple of ints."""
    text = text.strip()
    for sep in ("..", "-"):
        if sep in text and "," not in text:
            lo, hi = text.split(sep, 1)
            return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(","))


def parse_grid(text):
    return tuple(int(part) for part in text.split(","))


def _add_common(parser):
    parser.add_argument("--data-dir", default=os.environ.get(DATA_DIR_ENV, "data"))
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seeds", type=parse_seeds, default=None, help="e.g. 1-5 or 1,2,7")
    parser.add_argument("--no-timing", action="store_true", help="omit wall-clock fields from result files")


def _add_model_args(parser):
    parser.add_argument("--n-hidden", type=int, default=1000)
    parser.add_argument("--step", type=float, default=5.0, help="adaptation step size")
    parser.add_argument("--iters", type=int, default=30, help="adaptation iteration budget")
    parser.add_argument("--cap", type=float, default=0.985, help="training-accuracy cap")
    parser.add_argument("--pca-m", type=int, default=None, help="principal components (omit for no PCA)")
    parser.add_argument("--no-center", action="store_true", help="skip mean-centering in PCA")
    parser.add_argument("--shift", choices=("min", "minmax", "none"), default="min",
                        help="post-PCA non-negativity shift mode")
    parser.add_argument("--bias", action="store_true", help="add a random hidden bias (ablation)")
    parser.add_argument("--cluster-n", type=int, default=10)
    parser.add_argument("--cluster-p", type=float, default=0.05)
    parser.add_argument("--cluster-r", type=float, default=1.0)
    parser.add_argument("--lambda-plus", type=float, default=0.05)
    parser.add_argument("--lambda-minus", type=float, default=0.01)


def _add_dataset_args(parser):
    parser.add_argument("--dataset", choices=("mnist", "norb", "blobs"), default="mnist")
    parser.add_argument("--scale", choices=("scaled", "raw"), default="scaled")
    parser.add_argument("--train-data", default=None)
    parser.add_argument("--train-labels", default=None)
    parser.add_argument("--test-data", default=None)
    parser.add_argument("--test-labels", default=None)
    parser.add_argument("--downsample", type=int, default=3, help="NORB pooling factor")
    parser.add_argument("--pool-method", choices=("pool", "stride"), default="pool")
    parser.add_argument("--blobs-seed", type=int, default=0)
    parser.add_argument("--blobs-train", type=int, default=600)
    parser.add_argument("--blobs-test", type=int, default=200)
    parser.add_argument("--blobs-classes", type=int, default=3)
    parser.add_argument("--blobs-dim", type=int, default=8)
    parser.add_argument("--blobs-spread", type=float, default=0.25)


def _dataset_spec(args):
    if args.dataset == "blobs":
        return DatasetSpec(
            kind="blobs", scale=args.scale, blobs_seed=args.blobs_seed,
            blobs_train=args.blobs_train, blobs_test=args.blobs_test,
            blobs_classes=args.blobs_classes, blobs_dim=args.blobs_dim,
            blobs_spread=args.blobs_spread,
        )
    names = MNIST_FILES if args.dataset == "mnist" else NORB_FILES
    base = Path(args.data_dir) / args.dataset
    paths = {}
    for key, default_name in names.items():
        override = getattr(args, key)
        if override is not None:
            paths[key] = override
        else:
            candidate = base / default_name
            paths[key] = str(candidate if candidate.exists() else Path(str(candidate) + ".gz"))
    extra = {"downsample": args.downsample, "pool_method": args.pool_method} if args.dataset == "norb" else {}
    return DatasetSpec(kind=args.dataset, scale=args.scale, **paths, **extra)


def _config(args, activation="rnn"):
    return ExperimentConfig(
        dataset=_dataset_spec(args),
        activation=activation,
        cluster=ClusterParams(
            n=args.cluster_n, p=args.cluster_p, r=args.cluster_r,
            lambda_plus=args.lambda_plus, lambda_minus=args.lambda_minus,
        ),
        n_hidden=args.n_hidden,
        seeds=args.seeds or (1, 2, 3, 4, 5),
        adapt=AdaptConfig(step=args.step, max_iters=args.iters, train_acc_cap=args.cap),
        pca_m=args.pca_m,
        pca_center=not args.no_center,
        shift_mode=args.shift,
        use_bias=args.bias,
        timing=not args.no_timing,
    )


def _write_outputs(out_dir, document):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.json").write_bytes(results_json_bytes(document))
    (out / "results.csv").write_text(results_csv(document))
    return out


def _print_rows(document):
    for row in document["rows"]:
        label = row.get("activation") or row["config"]["activation"]
        cell = ""
        if "pca_m" in row and row.get("pca_m") is not None:
            cell = f" m={row['pca_m']:>4} nh={row['n_hidden']:>5}"
        times = ""
        if "train_seconds" in row:
            times = f"  train {np.mean(row['train_seconds']):8.2f}s test {np.mean(row['test_seconds']):6.2f}s"
        print(
            f"{label:>8}{cell}  train acc {100 * row['mean_train_accuracy']:6.2f}%"
            f"  test acc {100 * row['mean_test_accuracy']:6.2f}%"
            f" (std {100 * row['std_test_accuracy']:.2f}){times}"
        )


def cmd_run(args):
    cfg = _config(args, activation=args.activation)
    result = run_experiment(cfg)
    document = results_document("run", [result], include_timings=cfg.timing)
    _print_rows(document)
    out = _write_outputs(args.out, document)
    print(f"wrote {out / 'results.json'}")


def cmd_compare(args):
    cfg = _config(args)
    rows = compare_activations(cfg)
    document = results_document("compare", rows, include_timings=cfg.timing)
    _print_rows(document)
    out = _write_outputs(args.out, document)
    print(f"wrote {out / 'results.json'}")


def cmd_sweep(args):
    cfg = _config(args, activation=args.activation)
    cells = sweep(cfg, args.pca_grid, args.hidden_grid)
    document = results_document("sweep", cells, include_timings=cfg.timing)
    _print_rows(document)
    out = _write_outputs(args.out, document)
    print(f"wrote {out / 'results.json'}")


def cmd_reproduce(args):
    cfg, grid = preset_config(args.preset, args.data_dir, seeds=args.seeds)
    if args.n_hidden is not None:
        cfg = replace(cfg, n_hidden=args.n_hidden)
    cfg = replace(cfg, timing=not args.no_timing)
    if args.preset == "table1":
        rows = compare_activations(cfg)
        document = results_document("compare", rows, include_timings=cfg.timing)
    else:
        hidden_grid = (args.n_hidden,) if args.n_hidden is not None else grid[1]
        cells = sweep(cfg, grid[0], hidden_grid)
        document = results_document("sweep", cells, include_timings=cfg.timing)
    _print_rows(document)
    out = _write_outputs(args.out, document)
    print(f"wrote {out / 'results.json'}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rnnelm",
        description="Spiking-cluster activation ELM benchmarks (MNIST / small NORB / synthetic)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_common(p_run)
    _add_dataset_args(p_run)
    _add_model_args(p_run)
    p_run.add_argument("--activation", choices=("sigmoid", "sine", "hardlim", "tribas", "radbas", "rnn"), default="rnn")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare-activations", help="all six activations under one config")
    _add_common(p_cmp)
    _add_dataset_args(p_cmp)
    _add_model_args(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="grid over PCs and hidden sizes")
    _add_common(p_sweep)
    _add_dataset_args(p_sweep)
    _add_model_args(p_sweep)
    p_sweep.add_argument("--activation", choices=("sigmoid", "sine", "hardlim", "tribas", "radbas", "rnn"), default="rnn")
    p_sweep.add_argument("--pca-grid", type=parse_grid, required=True, help="e.g. 2,5,10,20")
    p_sweep.add_argument("--hidden-grid", type=parse_grid, required=True, help="e.g. 100,500,1000")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="named benchmark presets")
    p_rep.add_argument("preset", choices=PRESETS)
    _add_common(p_rep)
    p_rep.add_argument("--n-hidden", type=int, default=None, help="override the preset's hidden size")
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidInputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
