"""Experiment sweeps: one target function, a model grid, a list of trial
seeds -> one metrics row per (grid entry, trial seed).

Rows are deterministic given the config (wall-times aside) and come out in
grid order x seed order no matter how the worker pool schedules them.  Each
trial seed owns one dataset draw shared by every grid entry, so per-seed
comparisons across models are paired.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .metrics import (
    MetricsRecord,
    actual_flops,
    ideal_flops,
    lsh_routing_flops,
    random_hash_routing_flops,
)
from .models import (
    RandomHashRouting,
    TopKRouting,
    calibrate_width,
    dense_forward_batch,
    dsm_forward_batch,
    lsh_ensemble_predict,
    lsh_fit,
    new_dense_model,
    new_dsm_model,
    new_lsh_learner,
    new_lsh_routing,
)
from .lsh import new_euclidean_lsh
from .targets import (
    SubspaceEmbedding,
    estimate_lipschitz,
    evaluate,
    sample_dataset,
    sample_subspace_slice,
    spec_dim,
    spec_from_params,
)
from .training import OptimizerConfig, mse, sup_error, train
from .rng import Stream, derive_seed

_DATA_TAG = 0x5E01
_TEST_TAG = 0x5E02
_LIP_TAG = 0x5E03

_MODELS = ("dense", "dsm", "randhash", "lsh")
_LIP_PAIRS = 1024


@dataclass(frozen=True)
class GridEntry:
    model: str
    width: int | None = None
    sparsity: float | None = None
    routing: str = "topk"  # dsm only: topk | lsh
    activation: str = "relu"
    planes: int = 16
    tables: int = 1
    degree: int = 0
    mask_dim: int | None = None
    lsh_width: float | None = None
    auto_eps: float | None = None


@dataclass(frozen=True)
class SweepConfig:
    function: dict
    train_n: int
    test_n: int
    seed: int
    trial_seeds: tuple[int, ...]
    optimizer: OptimizerConfig
    grid: tuple[GridEntry, ...]
    distribution: str = "uniform-cube"


def expand_grid(templates) -> tuple[GridEntry, ...]:
    """Each template fans out over its widths x sparsities lists, in order."""
    entries = []
    for template in templates:
        t = dict(template)
        model = t.pop("model")
        if model not in _MODELS:
            raise ValueError(f"unknown model in grid: {model!r}")
        widths = t.pop("widths", None)
        if widths is None:
            widths = [t.pop("width", None)]
        sparsities = t.pop("sparsities", None)
        if sparsities is None:
            sparsities = [t.pop("sparsity", None)]
        try:
            base = GridEntry(model=model, **t)
        except TypeError as err:
            raise ValueError(f"bad grid entry: {err}") from err
        for width, sparsity in itertools.product(widths, sparsities):
            entry = replace(base, width=width, sparsity=sparsity)
            validate_entry(entry)
            entries.append(entry)
    return tuple(entries)


def validate_entry(entry: GridEntry) -> None:
    if entry.model != "lsh" and (entry.width is None or entry.width < 1):
        raise ValueError(f"{entry.model} entries need a positive width")
    if entry.model == "dense" and entry.sparsity not in (None, 1.0):
        raise ValueError("dense entries take no sparsity")
    if entry.model == "dsm" and entry.routing not in ("topk", "lsh"):
        raise ValueError(f"unknown dsm routing: {entry.routing!r}")
    needs_sparsity = entry.model == "randhash" or (entry.model == "dsm" and entry.routing == "topk")
    if needs_sparsity and (entry.sparsity is None or not 0 < entry.sparsity <= 1):
        raise ValueError("sparse entries need sparsity in (0, 1]")
    if entry.model == "lsh":
        if (entry.lsh_width is None) == (entry.auto_eps is None):
            raise ValueError("lsh entries need exactly one of lsh_width / auto_eps")
    if entry.tables < 1 or entry.planes < 1 or entry.degree < 0:
        raise ValueError("need tables >= 1, planes >= 1, degree >= 0")


def load_config(path) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return config_from_json(raw)


def config_from_json(raw: dict) -> SweepConfig:
    seeds = tuple(raw["trial_seeds"])
    if len(set(seeds)) != len(seeds):
        raise ValueError("trial seeds must be distinct")
    if not seeds:
        raise ValueError("need at least one trial seed")
    opt = raw.get("optimizer", {})
    optimizer = OptimizerConfig(
        kind=opt.get("kind", "rmsprop"),
        learning_rate=opt.get("learning_rate", 1e-3),
        epochs=opt.get("epochs", 50),
        batch_size=opt.get("batch_size", 256),
        rho=opt.get("rho", 0.9),
        delta=opt.get("delta", 1e-8),
        seed=opt.get("seed", 0),
    )
    config = SweepConfig(
        function=dict(raw["function"]),
        train_n=int(raw["train_n"]),
        test_n=int(raw["test_n"]),
        seed=int(raw.get("seed", 0)),
        trial_seeds=seeds,
        optimizer=optimizer,
        grid=expand_grid(raw["grid"]),
        distribution=raw.get("distribution", "uniform-cube"),
    )
    if config.train_n < 1 or config.test_n < 1:
        raise ValueError("train_n and test_n must be >= 1")
    spec_from_params(config.function)  # fail fast on bad function params
    return config


def _make_sampler(spec, d, distribution, seed):
    """Stateful sampler for Lipschitz estimation: fresh draw per call."""
    if distribution == "uniform-on-subspace-slice":
        counter = itertools.count()
        return lambda n: sample_subspace_slice(spec.rows, n, derive_seed(seed, next(counter)))
    stream = Stream(seed)
    return lambda n: stream.uniforms(n * d).reshape(n, d) * 2.0 - 1.0


def fit_lsh_entry(entry, spec, d, train_ds, test_ds, run_seed, data_seed, distribution):
    if entry.lsh_width is not None:
        width = entry.lsh_width
    else:
        sampler = _make_sampler(spec, d, distribution, derive_seed(data_seed, _LIP_TAG))
        lip = estimate_lipschitz(lambda X: evaluate(spec, X), sampler, _LIP_PAIRS, seed=data_seed)
        lip = max(lip, 1e-12)
        width = calibrate_width(d, entry.planes, run_seed, train_ds.inputs, delta=entry.auto_eps / lip)
    learners = []
    for j in range(entry.tables):
        family = new_euclidean_lsh(d, entry.planes, width, derive_seed(run_seed, j))
        learners.append(lsh_fit(new_lsh_learner(family, entry.degree), train_ds))
    train_pred = lsh_ensemble_predict(learners, None, train_ds.inputs)
    for learner in learners:
        learner.fallback_count = 0  # report test-time fallbacks only
    test_pred = lsh_ensemble_predict(learners, None, test_ds.inputs)
    buckets = sum(len(l.table.entries) for l in learners)
    r = lsh_routing_flops(entry.tables, entry.planes, d)
    return MetricsRecord(
        model_kind="lsh",
        width=buckets,
        sparsity=entry.tables / buckets,
        activated_units=entry.tables,
        ideal_flops=ideal_flops(entry.tables, d),
        actual_flops=actual_flops("lsh", buckets, entry.tables, d, r),
        routing_flops=r,
        train_mse=mse(train_pred, train_ds.targets),
        eval_mse=mse(test_pred, test_ds.targets),
        sup_error=sup_error(test_pred, test_ds.targets),
        fallback_count=sum(l.fallback_count for l in learners),
        seed=0,  # caller fills in the trial seed
        epochs=0,
        lr=0.0,
        wall_ms=0.0,
    )


def train_network_entry(entry, d, train_ds, test_ds, run_seed, optimizer):
    if entry.model == "dense":
        model = new_dense_model(d, entry.width, entry.activation, seed=run_seed)
        kind, s, r = "dense", entry.width, 0
    elif entry.model == "randhash":
        s = max(1, round(entry.width * entry.sparsity))
        mask_dim = entry.mask_dim if entry.mask_dim is not None else min(d, entry.width)
        routing = RandomHashRouting(s, hash_seed=run_seed, mask_dim=mask_dim)
        model = new_dsm_model(d, entry.width, routing, entry.activation, seed=run_seed)
        kind, r = "random-hash", random_hash_routing_flops(mask_dim, d, entry.width)
    elif entry.routing == "topk":
        s = max(1, round(entry.width * entry.sparsity))
        model = new_dsm_model(d, entry.width, TopKRouting(s), entry.activation, seed=run_seed)
        kind, r = "topk", 0
    else:
        routing = new_lsh_routing(d, entry.width, entry.tables, entry.planes, run_seed)
        model = new_dsm_model(d, entry.width, routing, entry.activation, seed=run_seed)
        kind, s = "lsh-routing", entry.tables
        r = lsh_routing_flops(entry.tables, entry.planes, d)

    history = train(model, train_ds, test_ds, optimizer)
    forward = dense_forward_batch if entry.model == "dense" else dsm_forward_batch
    test_pred = forward(model, test_ds.inputs)
    return MetricsRecord(
        model_kind=kind,
        width=entry.width,
        sparsity=s / entry.width,
        activated_units=s,
        ideal_flops=ideal_flops(s, d),
        actual_flops=actual_flops(kind, entry.width, s, d, r),
        routing_flops=r,
        train_mse=history.train_mse[-1] if history.train_mse else None,
        eval_mse=mse(test_pred, test_ds.targets),
        sup_error=sup_error(test_pred, test_ds.targets),
        fallback_count=0,
        seed=0,
        epochs=optimizer.epochs,
        lr=optimizer.learning_rate,
        wall_ms=0.0,
    )


def trial_datasets(config: SweepConfig, spec, d: int, trial_seed: int):
    """(train, test) for one trial; independent of the grid entry, so every
    model in the grid sees the same draw and per-seed comparisons are paired."""
    data_seed = derive_seed(config.seed, trial_seed, _DATA_TAG)
    test_seed = derive_seed(data_seed, _TEST_TAG)
    train_ds = sample_dataset(spec, d, config.train_n, data_seed, config.distribution)
    test_ds = sample_dataset(spec, d, config.test_n, test_seed, config.distribution)
    return train_ds, test_ds, data_seed


def run_one(config: SweepConfig, spec, d: int, grid_index: int, trial_seed: int) -> MetricsRecord:
    entry = config.grid[grid_index]
    train_ds, test_ds, data_seed = trial_datasets(config, spec, d, trial_seed)
    run_seed = derive_seed(config.seed, grid_index, trial_seed)
    started = time.perf_counter()
    if entry.model == "lsh":
        record = fit_lsh_entry(
            entry, spec, d, train_ds, test_ds, run_seed, data_seed, config.distribution
        )
    else:
        record = train_network_entry(entry, d, train_ds, test_ds, run_seed, config.optimizer)
    record.seed = trial_seed
    record.wall_ms = (time.perf_counter() - started) * 1000.0
    return record


def _failure_record(entry: GridEntry, trial_seed: int, optimizer, wall_ms: float, err: Exception):
    record = MetricsRecord(
        model_kind=entry.model,
        width=entry.width or 0,
        sparsity=entry.sparsity if entry.sparsity is not None else 0.0,
        activated_units=0,
        ideal_flops=0,
        actual_flops=0,
        routing_flops=0,
        train_mse=None,
        eval_mse=None,
        sup_error=None,
        fallback_count=0,
        seed=trial_seed,
        epochs=optimizer.epochs,
        lr=optimizer.learning_rate,
        wall_ms=wall_ms,
    )
    record.error = f"{type(err).__name__}: {err}"
    return record


def run_sweep(config: SweepConfig, workers: int = 4):
    """Returns (records, errors); records in grid order x seed order."""
    spec = spec_from_params(config.function)
    d = spec_dim(spec)
    if config.distribution == "uniform-on-subspace-slice" and not isinstance(spec, SubspaceEmbedding):
        raise ValueError("subspace-slice sampling needs a subspace-embedded target")

    def job(args):
        grid_index, trial_seed = args
        started = time.perf_counter()
        try:
            return run_one(config, spec, d, grid_index, trial_seed), None
        except Exception as err:  # noqa: BLE001 - failed runs become error rows
            wall = (time.perf_counter() - started) * 1000.0
            entry = config.grid[grid_index]
            return _failure_record(entry, trial_seed, config.optimizer, wall, err), err

    jobs = [
        (grid_index, trial_seed)
        for grid_index in range(len(config.grid))
        for trial_seed in config.trial_seeds
    ]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(job, jobs))

    records = [record for record, _ in outcomes]
    errors = [err for _, err in outcomes if err is not None]
    return records, errors
