"""Cost accounting and the experiment metrics table.

FLOPs use a fixed per-unit convention: 2d multiply-adds for a bottom row
plus 2 for the top-layer multiply-add.  The ideal count charges only the
activated units; the actual count adds what the routing physically costs
(Top-K pays the full bottom layer, hash routers pay their projections),
reported separately so the routing overhead stays visible.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .lsh import EuclideanLsh, SignLsh
from .models import (
    DenseModel,
    DsmModel,
    LshLearner,
    LshRouting,
    NearestPointRouting,
    RandomHashRouting,
    TopKRouting,
    routing_masks,
)

# Column order is part of the output contract; downstream tooling keys on it.
CSV_COLUMNS = (
    "model_kind",
    "width",
    "sparsity",
    "activated_units",
    "ideal_flops",
    "actual_flops",
    "routing_flops",
    "train_mse",
    "eval_mse",
    "sup_error",
    "fallback_count",
    "seed",
    "epochs",
    "lr",
    "wall_ms",
)

_KINDS = ("dense", "topk", "random-hash", "lsh-routing", "block", "lsh")


@dataclass
class MetricsRecord:
    model_kind: str
    width: int
    sparsity: float
    activated_units: int
    ideal_flops: int
    actual_flops: int
    routing_flops: int
    train_mse: float
    eval_mse: float
    sup_error: float
    fallback_count: int
    seed: int
    epochs: int
    lr: float
    wall_ms: float


def ideal_flops(activated_units: int, input_dim: int) -> int:
    """Cost with only the activated units touched: u bottom rows + u top terms."""
    if activated_units < 1 or input_dim < 1:
        raise ValueError(f"need u >= 1 and d >= 1, got {activated_units}, {input_dim}")
    return activated_units * (2 * input_dim + 2)


def lsh_routing_flops(tables: int, num_planes: int, input_dim: int) -> int:
    """Hash cost: per plane, 2d for the projection plus 1 for shift/floor."""
    if tables < 1 or num_planes < 1 or input_dim < 1:
        raise ValueError("tables, num_planes, and input_dim must all be >= 1")
    return tables * num_planes * (2 * input_dim + 1)


def random_hash_routing_flops(mask_dim: int, input_dim: int, width: int) -> int:
    """Projection to mask_dim coordinates plus one mix per unit score."""
    if mask_dim < 1 or input_dim < 1 or width < 1:
        raise ValueError("mask_dim, input_dim, and width must all be >= 1")
    proj = 0 if mask_dim == input_dim else mask_dim * 2 * input_dim
    return proj + width


def actual_flops(model_kind: str, width: int, activated_units: int, input_dim: int, routing_flops: int) -> int:
    """Physical forward cost: what is actually computed, routing included."""
    if model_kind not in _KINDS:
        raise ValueError(f"unknown model kind: {model_kind!r}")
    if not 1 <= activated_units <= width:
        raise ValueError(f"activated units {activated_units} out of range [1, {width}]")
    if routing_flops < 0:
        raise ValueError(f"routing cost must be >= 0, got {routing_flops}")
    if model_kind == "dense":
        return width * (2 * input_dim + 2)
    if model_kind == "topk":
        # Top-K must score every unit, so the full bottom pass is paid
        return width * 2 * input_dim + activated_units * 2 + routing_flops
    # hash-routed variants touch only the activated rows
    return activated_units * (2 * input_dim + 2) + routing_flops


def count_activated(model, x) -> int:
    if isinstance(model, DenseModel):
        return model.width
    if isinstance(model, DsmModel):
        x = np.asarray(x, dtype=np.float64)
        return int(routing_masks(model, x[None, :])[0].sum())
    if isinstance(model, LshLearner):
        return 1  # one bucket hit per table
    if isinstance(model, (list, tuple)) and all(isinstance(m, LshLearner) for m in model):
        return len(model)
    raise TypeError(f"not a model: {type(model).__name__}")


def model_kind_label(model) -> str:
    if isinstance(model, DenseModel):
        return "dense"
    if isinstance(model, LshLearner):
        return "lsh"
    if isinstance(model, (list, tuple)):
        return "lsh"
    if isinstance(model, DsmModel):
        routing = model.routing
        if isinstance(routing, TopKRouting):
            return "topk"
        if isinstance(routing, RandomHashRouting):
            return "random-hash"
        if isinstance(routing, LshRouting):
            return "lsh-routing"
        if isinstance(routing, NearestPointRouting):
            return "block"
    raise TypeError(f"not a model: {type(model).__name__}")


def routing_cost(model) -> int:
    """The routing term r charged to actual_flops for this model."""
    if isinstance(model, DenseModel):
        return 0
    if isinstance(model, LshLearner):
        return lsh_routing_flops(1, model.family.num_planes, model.family.dim)
    if isinstance(model, (list, tuple)):
        return sum(lsh_routing_flops(1, m.family.num_planes, m.family.dim) for m in model)
    if isinstance(model, DsmModel):
        routing = model.routing
        if isinstance(routing, TopKRouting):
            return 0  # scoring already counted as the full bottom pass
        if isinstance(routing, RandomHashRouting):
            return random_hash_routing_flops(routing.mask_dim, model.input_dim, model.width)
        if isinstance(routing, LshRouting):
            fam = routing.families[0]
            planes = fam.num_planes if isinstance(fam, (EuclideanLsh, SignLsh)) else 0
            return lsh_routing_flops(len(routing.families), planes, model.input_dim)
        if isinstance(routing, NearestPointRouting):
            return model.width * (2 * model.input_dim + 1)  # distance scan
    raise TypeError(f"not a model: {type(model).__name__}")


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records, extra_columns=()) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS + tuple(extra_columns))
    for record in records:
        row = [_format_cell(getattr(record, name)) for name in CSV_COLUMNS]
        for name in extra_columns:
            row.append(_format_cell(getattr(record, name, None)))
        writer.writerow(row)
    return out.getvalue()


def write_records(path, records, extra_columns=()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records, extra_columns))


def append_record(path, record) -> None:
    """Appends one row, writing the header first when the file is new/empty."""
    need_header = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if need_header:
            writer.writerow(CSV_COLUMNS)
        writer.writerow([_format_cell(getattr(record, name)) for name in CSV_COLUMNS])


_INT_COLUMNS = {
    "width",
    "activated_units",
    "ideal_flops",
    "actual_flops",
    "routing_flops",
    "fallback_count",
    "seed",
    "epochs",
}


def read_records(path) -> list[dict]:
    """Rows as dicts with numeric columns parsed; blank cells become None."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for name, cell in raw.items():
                if cell is None or cell == "":
                    row[name] = None
                elif name in _INT_COLUMNS:
                    row[name] = int(cell)
                elif name == "model_kind" or name == "error":
                    row[name] = cell
                else:
                    try:
                        row[name] = float(cell)
                    except ValueError:
                        row[name] = cell
            rows.append(row)
        return rows
