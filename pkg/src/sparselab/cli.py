"""Command-line harness for the synthetic experiments.

Subcommands: gen-data, train-eval, sweep, bucket-stats, plot.
Exit codes: 0 success, 1 usage/runtime error, 2 sweep finished with failed runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .charts import X_COLUMNS, Y_COLUMNS, build_series, render_line_chart_png, render_line_chart_svg
from .lsh import bucket_stats, new_euclidean_lsh
from .metrics import append_record, read_records, write_records
from .rng import derive_seed
from .sweep import (
    GridEntry,
    fit_lsh_entry,
    train_network_entry,
    validate_entry,
    load_config,
    run_sweep,
)
from .targets import (
    random_orthonormal_rows,
    read_dataset,
    sample_dataset,
    sample_subspace_slice,
    spec_dim,
    spec_from_json,
    spec_from_params,
    write_dataset,
)
from .training import OptimizerConfig

_FAMILIES = ("poly", "hypercube", "subspace-poly", "cone", "fourier")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we own the exit codes
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sparselab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="sample a target function to CSV + JSON sidecar")
    gen.add_argument("--fn", required=True, choices=_FAMILIES)
    gen.add_argument("--d", type=int, help="ambient dimension (poly/hypercube/subspace-poly)")
    gen.add_argument("--k", type=int, help="intrinsic dimension (subspace-poly/cone/fourier)")
    gen.add_argument("--degree", type=int, help="polynomial degree")
    gen.add_argument("--num-terms", type=int, default=16)
    gen.add_argument("--coeff-sum", choices=("inv-degree", "unit"), default="inv-degree")
    gen.add_argument("--eps", type=float, help="cone bump height")
    gen.add_argument("--inv-eps1", type=int, help="inverse first frequency weight (fourier)")
    gen.add_argument("--alpha", type=float, help="fourier decay exponent (default k/2+1)")
    gen.add_argument("--scale-c", type=float, default=4.0)
    gen.add_argument("--lipschitz", type=float, default=1.0)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--distribution", choices=("uniform-cube", "uniform-on-subspace-slice"),
                     help="default: uniform-on-subspace-slice for subspace-poly, else uniform-cube")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_data)

    tr = sub.add_parser("train-eval", help="train one model, print its metrics row as JSON")
    tr.add_argument("--model", required=True, choices=("dense", "dsm", "lsh", "randhash"))
    tr.add_argument("--width", type=int)
    tr.add_argument("--sparsity", type=float)
    tr.add_argument("--routing", choices=("topk", "lsh"))
    tr.add_argument("--activation", choices=("relu", "identity"), default="relu")
    tr.add_argument("--planes", type=int, default=16)
    tr.add_argument("--tables", type=int, default=1)
    tr.add_argument("--degree", type=int, default=0, help="bucket payload degree (lsh)")
    tr.add_argument("--lsh-width", type=float)
    tr.add_argument("--auto-calibrate", action="store_true")
    tr.add_argument("--eps", type=float, help="target sup-error for --auto-calibrate")
    tr.add_argument("--train", required=True, help="training dataset CSV")
    tr.add_argument("--test", required=True, help="test dataset CSV")
    tr.add_argument("--opt", choices=("gd", "sgd", "rmsprop"), default="rmsprop")
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--batch-size", type=int, default=256)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", help="metrics CSV to append to")
    tr.set_defaults(func=cmd_train_eval)

    sw = sub.add_parser("sweep", help="run a config's full grid x seeds to a metrics CSV")
    sw.add_argument("config", help="SweepConfig JSON path")
    sw.add_argument("--out", required=True)
    sw.add_argument("--workers", type=int, default=4)
    sw.set_defaults(func=cmd_sweep)

    bs = sub.add_parser("bucket-stats", help="bucket geometry on a random subspace slice")
    bs.add_argument("--d", type=int, required=True)
    bs.add_argument("--k", type=int, required=True)
    bs.add_argument("--planes", type=int, required=True)
    bs.add_argument("--lsh-width", type=float, required=True)
    bs.add_argument("--samples", type=int, default=2000)
    bs.add_argument("--trials", type=int, default=10)
    bs.add_argument("--seed", type=int, default=0)
    bs.set_defaults(func=cmd_bucket_stats)

    pl = sub.add_parser("plot", help="render a sweep CSV to an SVG (+ PNG sibling)")
    pl.add_argument("--in", dest="in_path", required=True)
    pl.add_argument("--x", required=True, choices=X_COLUMNS)
    pl.add_argument("--y", required=True, choices=Y_COLUMNS)
    pl.add_argument("--out", required=True, help="SVG output path")
    pl.set_defaults(func=cmd_plot)

    return parser


def _require(args, names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise _UsageError(f"--fn {args.fn} requires {', '.join(missing)}")


def _function_params(args) -> dict:
    if args.fn == "poly":
        _require(args, ("d", "degree"))
        return {"family": "poly", "d": args.d, "degree": args.degree,
                "num_terms": args.num_terms, "coeff_sum": args.coeff_sum, "seed": args.seed}
    if args.fn == "hypercube":
        _require(args, ("d",))
        return {"family": "hypercube", "d": args.d, "seed": args.seed}
    if args.fn == "subspace-poly":
        _require(args, ("d", "k", "degree"))
        return {"family": "subspace-poly", "d": args.d, "k": args.k, "degree": args.degree,
                "num_terms": args.num_terms, "coeff_sum": args.coeff_sum, "seed": args.seed}
    if args.fn == "cone":
        _require(args, ("k", "eps"))
        return {"family": "cone", "k": args.k, "eps": args.eps,
                "lipschitz": args.lipschitz, "seed": args.seed}
    _require(args, ("k", "inv_eps1"))
    return {"family": "fourier", "k": args.k, "inv_eps1": args.inv_eps1, "alpha": args.alpha,
            "scale_c": args.scale_c, "lipschitz": args.lipschitz, "seed": args.seed}


def cmd_gen_data(args) -> int:
    spec = spec_from_params(_function_params(args))
    d = spec_dim(spec)
    distribution = args.distribution
    if distribution is None:
        distribution = "uniform-on-subspace-slice" if args.fn == "subspace-poly" else "uniform-cube"
    dataset = sample_dataset(spec, d, args.n, args.seed, distribution)
    write_dataset(dataset, args.out)
    lo, hi = float(dataset.targets.min()), float(dataset.targets.max())
    print(f"wrote {args.out}: n={args.n} d={d} target range [{lo:.6g}, {hi:.6g}]")
    return 0


def _entry_from_flags(args) -> GridEntry:
    if args.model == "dense":
        for flag, name in ((args.sparsity, "--sparsity"), (args.routing, "--routing")):
            if flag is not None:
                raise _UsageError(f"{name} is incompatible with --model dense")
    if args.model == "lsh":
        if args.width is not None:
            raise _UsageError("--width is incompatible with --model lsh")
        if args.auto_calibrate and args.eps is None:
            raise _UsageError("--auto-calibrate requires --eps")
        if args.auto_calibrate == (args.lsh_width is not None):
            raise _UsageError("--model lsh needs exactly one of --lsh-width / --auto-calibrate")
    entry = GridEntry(
        model=args.model,
        width=args.width,
        sparsity=args.sparsity,
        routing=args.routing or "topk",
        activation=args.activation,
        planes=args.planes,
        tables=args.tables,
        degree=args.degree,
        lsh_width=args.lsh_width,
        auto_eps=args.eps if args.auto_calibrate else None,
    )
    try:
        validate_entry(entry)
    except ValueError as err:
        raise _UsageError(str(err)) from err
    return entry


def cmd_train_eval(args) -> int:
    entry = _entry_from_flags(args)
    train_ds = read_dataset(args.train)
    test_ds = read_dataset(args.test)
    d = train_ds.inputs.shape[1]
    started = time.perf_counter()
    if entry.model == "lsh":
        spec = None
        if entry.auto_eps is not None:
            if "function" not in train_ds.meta:
                raise _UsageError("--auto-calibrate needs the training set's JSON sidecar")
            spec = spec_from_json(train_ds.meta["function"])
        distribution = train_ds.meta.get("distribution", "uniform-cube")
        record = fit_lsh_entry(
            entry, spec, d, train_ds, test_ds, args.seed, args.seed, distribution
        )
    else:
        optimizer = OptimizerConfig(
            kind=args.opt,
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
        )
        record = train_network_entry(entry, d, train_ds, test_ds, args.seed, optimizer)
    record.seed = args.seed
    record.wall_ms = (time.perf_counter() - started) * 1000.0
    print(json.dumps(asdict(record)))
    if args.out:
        append_record(args.out, record)
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    records, errors = run_sweep(config, workers=args.workers)
    extra = ("error",) if errors else ()
    write_records(args.out, records, extra_columns=extra)
    print(f"wrote {args.out}: {len(records)} rows ({len(config.grid)} grid entries "
          f"x {len(config.trial_seeds)} seeds), {len(errors)} failed")
    return 2 if errors else 0


def cmd_bucket_stats(args) -> int:
    if args.samples < 2 or args.trials < 1:
        raise _UsageError("need --samples >= 2 and --trials >= 1")
    trials = []
    passes = 0
    for i in range(args.trials):
        trial_seed = derive_seed(args.seed, i)
        rows = random_orthonormal_rows(args.d, args.k, trial_seed)
        points = sample_subspace_slice(rows, args.samples, derive_seed(trial_seed, 1))
        family = new_euclidean_lsh(args.d, args.planes, args.lsh_width, derive_seed(trial_seed, 2))
        stats = bucket_stats(family, points)
        ok = stats.max_diameter <= args.lsh_width
        passes += ok
        trials.append({
            "trial": i,
            "non_empty": stats.non_empty_count,
            "max_diameter": stats.max_diameter,
            "within_width": bool(ok),
        })
    report = {
        "d": args.d,
        "k": args.k,
        "planes": args.planes,
        "lsh_width": args.lsh_width,
        "samples": args.samples,
        "trials": trials,
        "diameter_pass_fraction": passes / args.trials,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_plot(args) -> int:
    rows = read_records(args.in_path)
    series = build_series(rows, args.x, args.y)
    svg = render_line_chart_svg(series, args.x, args.y)
    out = Path(args.out)
    out.write_text(svg, encoding="utf-8")
    png = out.with_suffix(".png")
    render_line_chart_png(series, args.x, args.y, png)
    print(f"wrote {out} and {png}: {len(series)} series")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
