"""Top-layer training: the bottom layer and routing are frozen, so the
loss is exactly quadratic in A and everything here operates on the
precomputed masked-feature matrix F (F[i, j] = mask_j(x_i) * phi_j(x_i)).

Optimizers: full-batch gradient descent, mini-batch SGD, and RMSProp.
A closed-form ridge least-squares oracle is provided for verification.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .models import masked_features
from .rng import Stream, derive_seed
from .targets import Dataset

_SHUFFLE_TAG = 0x7201

_DIVERGENCE_LIMIT = 1e6
_ORACLE_RIDGE = 1e-10


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str  # gd | sgd | rmsprop
    learning_rate: float
    epochs: int
    batch_size: int = 256
    rho: float = 0.9
    delta: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gd", "sgd", "rmsprop"):
            raise ValueError(f"unknown optimizer kind: {self.kind!r}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass
class TrainHistory:
    train_mse: list[float] = field(default_factory=list)
    eval_mse: list[float] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("epoch,train_mse,eval_mse,wall_ms\n")
        for i, (tr, ev, ms) in enumerate(zip(self.train_mse, self.eval_mse, self.wall_ms)):
            ev_cell = "" if ev is None else repr(ev)
            out.write(f"{i},{tr!r},{ev_cell},{ms!r}\n")
        return out.getvalue()


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1 or len(p) < 1:
        raise ValueError(f"need equal-length non-empty vectors, got {p.shape} and {t.shape}")
    return float(np.mean((p - t) ** 2))


def sup_error(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1 or len(p) < 1:
        raise ValueError(f"need equal-length non-empty vectors, got {p.shape} and {t.shape}")
    return float(np.max(np.abs(p - t)))


def _gradient_from_features(F: NDArray[np.float64], top, y) -> NDArray[np.float64]:
    # d/dA mean((F A - y)^2) = 2/m F^T (F A - y); never-activated units have
    # an all-zero column in F, so their entries stay exactly 0
    return (2.0 / len(F)) * (F.T @ (F @ top - y))


def top_layer_gradient(model, batch) -> NDArray[np.float64]:
    """Gradient of the batch-mean squared error with respect to the top row."""
    if isinstance(batch, Dataset):
        X, y = batch.inputs, batch.targets
    else:
        X, y = batch
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
    if len(X) < 1:
        raise ValueError("empty batch")
    if len(X) != len(y):
        raise ValueError(f"{len(X)} inputs for {len(y)} targets")
    return _gradient_from_features(masked_features(model, X), model.top, y)


def rmsprop_step(v, g, config: OptimizerConfig):
    """Returns (updated second-moment state, parameter delta)."""
    v = np.asarray(v, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if v.shape != g.shape:
        raise ValueError(f"state shape {v.shape} does not match gradient shape {g.shape}")
    v_new = config.rho * v + (1.0 - config.rho) * g * g
    delta = -config.learning_rate * g / (np.sqrt(v_new) + config.delta)
    return v_new, delta


def _epoch_mse(F, top, y) -> float:
    return float(np.mean((F @ top - y) ** 2))


def train(model, train_ds: Dataset, eval_ds: Dataset | None, config: OptimizerConfig) -> TrainHistory:
    """Runs the configured optimizer; the model's top row is updated in place.

    Raises RuntimeError if the train MSE exceeds 1e6 or stops being finite
    (the learning rate is too large for the instance's scale).
    """
    if len(train_ds.inputs) < 1:
        raise ValueError("empty training dataset")
    F = masked_features(model, train_ds.inputs)
    y = train_ds.targets
    F_eval = None
    if eval_ds is not None:
        if len(eval_ds.inputs) < 1:
            raise ValueError("empty eval dataset")
        F_eval = masked_features(model, eval_ds.inputs)

    top = model.top
    v = np.zeros_like(top)
    shuffler = Stream(derive_seed(config.seed, _SHUFFLE_TAG))
    history = TrainHistory()
    n = len(F)

    for _ in range(config.epochs):
        started = time.perf_counter()
        if config.kind == "gd":
            top -= config.learning_rate * _gradient_from_features(F, top, y)
        else:
            order = shuffler.permutation(n)
            for lo in range(0, n, config.batch_size):
                rows = order[lo : lo + config.batch_size]
                g = _gradient_from_features(F[rows], top, y[rows])
                if config.kind == "sgd":
                    top -= config.learning_rate * g
                else:
                    v, delta = rmsprop_step(v, g, config)
                    top += delta
        train_mse = _epoch_mse(F, top, y)
        if not np.isfinite(train_mse) or train_mse > _DIVERGENCE_LIMIT:
            raise RuntimeError(f"training diverged: train MSE {train_mse:.3e}")
        history.train_mse.append(train_mse)
        history.eval_mse.append(None if F_eval is None else _epoch_mse(F_eval, top, eval_ds.targets))
        history.wall_ms.append((time.perf_counter() - started) * 1000.0)
    return history


def least_squares_oracle(model, train_ds) -> NDArray[np.float64]:
    """Closed-form minimizer of the top-layer problem (ridge 1e-10)."""
    if isinstance(train_ds, Dataset):
        X, y = train_ds.inputs, train_ds.targets
    else:
        X, y = train_ds
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
    if len(X) < 1:
        raise ValueError("empty training dataset")
    F = masked_features(model, X)
    gram = F.T @ F + _ORACLE_RIDGE * np.eye(F.shape[1])
    try:
        return np.linalg.solve(gram, F.T @ y)
    except np.linalg.LinAlgError as err:
        raise RuntimeError(f"normal equations singular beyond ridge rescue: {err}") from err
