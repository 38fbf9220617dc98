"""Command line driver.

Subcommands: generate, fit, transform, evaluate, mmd, m3d, cluster,
experiment, sweep-n, sweep-ab, ablate. Global flags --config, --seed, --out
and --threads apply before the subcommand name; experiment-family commands
read an ExperimentConfig file (key = value lines) and the flags override the
corresponding fields.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .data import (
    Dataset,
    SynthConfig,
    format_value,
    generate_synthetic,
    read_labels,
    read_matrix,
    write_labels,
    write_matrix,
)
from .discrepancy import DomainSplit, empirical_m3d, empirical_mmd
from .errors import TmdaError
from .evaluation import eval_report, nn_classify
from .experiments import (
    ExperimentConfig,
    exit_code,
    parse_config,
    run_ablation,
    run_experiment,
    sweep_manifold_count,
    sweep_sensitivity,
)
from .kernels import KernelSpec, kernel_matrix, resolve_bandwidth
from .manifolds import AdmmConfig, admm_affinity, ncut_cluster
from .solver import TmdaConfig, fit, load_model, save_model, transform


def _kernel_from_args(args, X) -> KernelSpec:
    if args.kernel == "linear":
        return KernelSpec("linear")
    return resolve_bandwidth(KernelSpec("rbf", args.bandwidth), X)


def _experiment_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    return cfg


def cmd_generate(args) -> int:
    cfg = SynthConfig(seed=args.seed if args.seed is not None else 0)
    if args.config:
        cfg = parse_config(args.config).synth
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    task = generate_synthetic(cfg)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    write_matrix(os.path.join(out, "source_x.txt"), task.source)
    write_labels(os.path.join(out, "source_y.txt"), task.source.labels)
    write_matrix(os.path.join(out, "target_x.txt"), task.target)
    write_labels(os.path.join(out, "target_y.txt"), task.target_labels)
    print(f"wrote task ({task.source.dim}x{task.source.n} source, "
          f"{task.target.dim}x{task.target.n} target) to {out}")
    return 0


def cmd_fit(args) -> int:
    source = Dataset(read_matrix(args.source).X, read_labels(args.source_labels))
    target = read_matrix(args.target)
    tmda_cfg = parse_config(args.config).tmda if args.config else TmdaConfig()
    if args.seed is not None:
        tmda_cfg = replace(tmda_cfg, seed=args.seed)
    model = fit(source, target, tmda_cfg)
    out = args.out or "model.txt"
    save_model(out, model)
    print(f"fitted in {model.outer_iterations} outer pass(es) "
          f"(converged={model.converged}); model written to {out}")
    return 0


def cmd_transform(args) -> int:
    model = load_model(args.model)
    data = read_matrix(args.input)
    embedded = transform(model, data)
    out = args.out or "embedded.txt"
    write_matrix(out, embedded)
    print(f"embedded {embedded.n} point(s) into {embedded.dim} dimension(s): {out}")
    return 0


def cmd_evaluate(args) -> int:
    train = Dataset(read_matrix(args.train).X, read_labels(args.train_labels))
    test = read_matrix(args.test)
    truth = read_labels(args.truth)
    pred = nn_classify(train, test)
    report = eval_report(pred, truth)
    lines = [
        f"rmse={format_value(report.rmse)}",
        f"accuracy={format_value(report.accuracy)}",
        f"n_evaluated={report.n_evaluated}",
    ]
    for label in sorted(report.per_class_accuracy):
        lines.append(f"per_class.{label}={format_value(report.per_class_accuracy[label])}")
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _discrepancy_inputs(args):
    source = read_matrix(args.source)
    target = read_matrix(args.target)
    X = np.hstack([source.X, target.X])
    spec = _kernel_from_args(args, X)
    K = kernel_matrix(X, spec)
    return K, DomainSplit(source.n, target.n)


def cmd_mmd(args) -> int:
    K, split = _discrepancy_inputs(args)
    print(format_value(empirical_mmd(K, split)))
    return 0


def cmd_m3d(args) -> int:
    K, split = _discrepancy_inputs(args)
    labels = read_labels(args.assignment)
    print(format_value(empirical_m3d(K, split, labels)))
    return 0


def cmd_cluster(args) -> int:
    data = read_matrix(args.input)
    admm_cfg = AdmmConfig(
        mu=args.mu, rho=args.rho, alpha=0.0, max_iter=args.max_iter, epsilon=args.epsilon
    )
    affinity, state = admm_affinity(data.X, cfg=admm_cfg)
    labels = ncut_cluster(affinity, args.n_clusters, args.seed if args.seed is not None else 0)
    out = args.out or "assignment.txt"
    write_labels(out, labels)
    print(f"clustered {data.n} points into {args.n_clusters} manifolds "
          f"(affinity converged={state.converged}); labels written to {out}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    records, summaries = run_experiment(cfg)
    _print_summary(summaries)
    return exit_code(records)


def cmd_sweep_n(args) -> int:
    cfg = _experiment_config(args)
    n_values = [int(tok) for tok in args.n_values.split(",") if tok.strip()]
    records, summaries = sweep_manifold_count(cfg, n_values)
    _print_summary(summaries)
    return exit_code(records)


def cmd_sweep_ab(args) -> int:
    cfg = _experiment_config(args)
    alphas = [float(tok) for tok in args.alpha_values.split(",") if tok.strip()]
    betas = [float(tok) for tok in args.beta_values.split(",") if tok.strip()]
    records, summaries = sweep_sensitivity(cfg, alphas, betas)
    _print_summary(summaries)
    return exit_code(records)


def cmd_ablate(args) -> int:
    cfg = _experiment_config(args)
    records, summaries = run_ablation(cfg)
    _print_summary(summaries)
    return exit_code(records)


def _print_summary(summaries) -> None:
    for row in summaries:
        print(
            f"{row['cell']}: mean_rmse={row['mean_rmse']:.4f} "
            f"mean_accuracy={row['mean_accuracy']:.4f} "
            f"({row['runs'] - row['failures']}/{row['runs']} ok)"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmda", description="manifold discrepancy alignment experiments"
    )
    parser.add_argument("--config", help="experiment config file (key = value lines)")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="override the configured output path")
    parser.add_argument("--threads", type=int, help="parallel workers for experiment cells")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic transfer task")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a model from matrix files")
    p.add_argument("--source", required=True)
    p.add_argument("--source-labels", dest="source_labels", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="embed a matrix with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("evaluate", help="1-NN classify and report rmse/accuracy")
    p.add_argument("--train", required=True)
    p.add_argument("--train-labels", dest="train_labels", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_evaluate)

    for name, func in (("mmd", cmd_mmd), ("m3d", cmd_m3d)):
        p = sub.add_parser(name, help=f"print the empirical {name} of two samples")
        p.add_argument("--source", required=True)
        p.add_argument("--target", required=True)
        p.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
        p.add_argument("--bandwidth", type=float, default=None)
        if name == "m3d":
            p.add_argument("--assignment", required=True,
                           help="manifold labels, one integer per joint column")
        p.set_defaults(func=func)

    p = sub.add_parser("cluster", help="sparse-affinity spectral clustering")
    p.add_argument("--input", required=True)
    p.add_argument("--n-clusters", dest="n_clusters", type=int, required=True)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("experiment", help="run the configured comparison cells")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep-n", help="sweep the manifold count")
    p.add_argument("--n-values", dest="n_values", required=True,
                   help="comma-separated manifold counts")
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("sweep-ab", help="sweep alpha x beta")
    p.add_argument("--alpha-values", dest="alpha_values", required=True)
    p.add_argument("--beta-values", dest="beta_values", required=True)
    p.set_defaults(func=cmd_sweep_ab)

    p = sub.add_parser("ablate", help="compare nt, v1, v2 and full modes")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TmdaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
