"""Masked-final-layer models, routing rules, and partition-based learners.

Every network here has the same shape: a frozen random bottom layer
``phi(x) = sigma(Bx)`` and a trainable top row ``A``, so a forward pass is
``A . (mask(x) * phi(x))``.  The variants differ only in the routing rule
that produces the sparse mask:

- ``TopKRouting``       keeps the K largest pre-activations (ties -> lowest index)
- ``RandomHashRouting`` keeps K units chosen by hashing the input's bits
- ``LshRouting``        one unit per block, chosen by a hash-bucket key
- ``NearestPointRouting`` one unit, owned by the nearest stored point

The LSH bucket learner replaces the network entirely with a per-bucket
table plus an exact nearest-neighbor fallback for queries landing in buckets
never seen during fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .lsh import (
    BucketTable,
    EuclideanLsh,
    SignLsh,
    bucket_stats,
    euclidean_hash_batch,
    eval_payload,
    family_from_json,
    family_to_json,
    finalize_table,
    new_bucket_table,
    new_euclidean_lsh,
    new_sign_lsh,
    sign_hash_batch,
    table_from_json,
    table_insert,
    table_to_json,
)
from .rng import GOLDEN, Stream, U64, derive_seed, float64_bits, mix64_array
from .targets import Dataset

_BOTTOM_TAG = 0x3D01
_PROJ_TAG = 0x3D02
_HASH_TAG = 0x3D03
_EXPERT_TAG = 0x3D04
_INTERP_TAG = 0x3D05
_CALIB_TAG = 0x3D06

_ACTIVATIONS = ("identity", "relu", "indicator")

# Row budget for (n, width) uint64 score blocks in the random-hash path.
_SCORE_BLOCK = 1 << 21


# ---------------------------------------------------------------------------
# Dense baseline
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DenseModel:
    """g(x) = A . sigma(Bx); B frozen after construction, A trainable."""

    input_dim: int
    width: int
    bottom: NDArray[np.float64]  # (width, input_dim)
    top: NDArray[np.float64]  # (width,)
    activation: str
    seed: int = 0


def new_dense_model(input_dim: int, width: int, activation: str = "relu", seed: int = 0) -> DenseModel:
    if input_dim < 1 or width < 1:
        raise ValueError(f"need input_dim >= 1 and width >= 1, got {input_dim}, {width}")
    if activation not in ("identity", "relu"):
        raise ValueError(f"unknown activation: {activation!r}")
    stream = Stream(derive_seed(seed, _BOTTOM_TAG))
    # 1/sqrt(d) scaling keeps pre-activations O(1) on [-1, 1]^d
    bottom = stream.normals(width * input_dim).reshape(width, input_dim) / math.sqrt(input_dim)
    return DenseModel(input_dim, width, bottom, np.zeros(width), activation, seed)


def _activate(z: NDArray[np.float64], activation: str) -> NDArray[np.float64]:
    if activation == "identity":
        return z
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "indicator":
        return np.ones_like(z)
    raise ValueError(f"unknown activation: {activation!r}")


def _check_point(model, x) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"expected a point of dimension {model.input_dim}, got shape {x.shape}")
    return x


def _check_points(model, X) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(f"expected shape (n, {model.input_dim}), got {X.shape}")
    return X


def dense_forward(model: DenseModel, x) -> float:
    x = _check_point(model, x)
    return float(model.top @ _activate(model.bottom @ x, model.activation))


def dense_forward_batch(model: DenseModel, X) -> NDArray[np.float64]:
    X = _check_points(model, X)
    return _activate(X @ model.bottom.T, model.activation) @ model.top


# ---------------------------------------------------------------------------
# Routing rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopKRouting:
    """Activate the K units with the largest pre-activations."""

    k: int


@dataclass(frozen=True)
class RandomHashRouting:
    """Activate K units chosen by hashing the input's float bit patterns.

    The input is first projected to ``mask_dim`` coordinates by a fixed
    Gaussian map (skipped when mask_dim equals the input dimension); each
    unit's score mixes the projected coordinates' bit patterns with the unit
    index, so masks are deterministic per input but spatially non-local.
    """

    k: int
    hash_seed: int
    mask_dim: int


@dataclass(frozen=True, eq=False)
class LshRouting:
    """One active unit per block of width/len(families) units.

    Block j's unit is picked by folding the input's bucket key under
    families[j] into a digest and reducing it modulo the block size -- a
    total map, so keys never seen at fit time still route somewhere.
    """

    families: tuple
    expert_seed: int


@dataclass(frozen=True, eq=False)
class NearestPointRouting:
    """Activate the single unit owned by the nearest stored point."""

    points: NDArray[np.float64]  # (width, input_dim)


def routing_sparsity(routing) -> int:
    if isinstance(routing, (TopKRouting, RandomHashRouting)):
        return routing.k
    if isinstance(routing, LshRouting):
        return len(routing.families)
    if isinstance(routing, NearestPointRouting):
        return 1
    raise TypeError(f"not a routing rule: {type(routing).__name__}")


def mask_topk(z, K: int) -> NDArray[np.bool_]:
    """Ones at the K largest entries of z; ties broken toward the lowest index."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError(f"expected a 1-d score vector, got shape {z.shape}")
    if not 1 <= K <= len(z):
        raise ValueError(f"K must be in [1, {len(z)}], got {K}")
    return mask_topk_batch(z[None, :], K)[0]


def mask_topk_batch(Z: NDArray[np.float64], K: int) -> NDArray[np.bool_]:
    if not 1 <= K <= Z.shape[1]:
        raise ValueError(f"K must be in [1, {Z.shape[1]}], got {K}")
    # stable argsort of -Z: equal scores keep index order, i.e. lowest wins
    order = np.argsort(-Z, axis=1, kind="stable")[:, :K]
    mask = np.zeros(Z.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=1)
    return mask


def _fold_bits(bits: NDArray[np.uint64], salt: int) -> NDArray[np.uint64]:
    """Fold each row of 64-bit words into one digest (same recurrence as derive_seed)."""
    acc = np.full(len(bits), salt, dtype=np.uint64)
    golden = np.uint64(GOLDEN)
    for j in range(bits.shape[1]):
        acc = mix64_array((acc ^ bits[:, j]) + golden)
    return acc


def mask_random_hash(x, width: int, K: int, hash_seed: int, mask_dim: int) -> NDArray[np.bool_]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {x.shape}")
    return mask_random_hash_batch(x[None, :], width, K, hash_seed, mask_dim)[0]


def mask_random_hash_batch(
    X: NDArray[np.float64], width: int, K: int, hash_seed: int, mask_dim: int
) -> NDArray[np.bool_]:
    X = np.asarray(X, dtype=np.float64)
    if not 1 <= K <= width:
        raise ValueError(f"K must be in [1, {width}], got {K}")
    if not 1 <= mask_dim <= width:
        raise ValueError(f"mask_dim must be in [1, {width}], got {mask_dim}")
    n, d = X.shape
    if mask_dim != d:
        proj_stream = Stream(derive_seed(hash_seed, _PROJ_TAG))
        proj = proj_stream.normals(mask_dim * d).reshape(mask_dim, d) / math.sqrt(d)
        # The digest consumes exact float bits, so the projection must be
        # bit-reproducible regardless of batch shape; BLAS matmul is not
        # (gemv vs gemm accumulate in different orders).  Sum coordinate by
        # coordinate instead -- same order for one row or a million.
        P = np.zeros((n, mask_dim))
        for j in range(d):
            P += X[:, j, None] * proj[None, :, j]
    else:
        P = X
    digests = _fold_bits(float64_bits(P), salt=derive_seed(hash_seed, _HASH_TAG))
    unit_keys = mix64_array((np.arange(1, width + 1, dtype=np.uint64)) * np.uint64(GOLDEN))
    mask = np.zeros((n, width), dtype=bool)
    block = max(1, _SCORE_BLOCK // width)
    top = np.uint64(U64)
    for lo in range(0, n, block):
        scores = mix64_array(digests[lo : lo + block, None] ^ unit_keys[None, :])
        # descending by score with lowest-index tie-break: stable sort on the complement
        order = np.argsort(top - scores, axis=1, kind="stable")[:, :K]
        np.put_along_axis(mask[lo : lo + block], order, True, axis=1)
    return mask


def block_routing_mask(block_choices, block_size: int) -> NDArray[np.bool_]:
    """One active unit per block; choices are 1-based offsets within each block."""
    choices = np.asarray(block_choices, dtype=np.int64)
    if choices.ndim != 1 or len(choices) < 1:
        raise ValueError("block_choices must be a non-empty 1-d sequence")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    if choices.min() < 1 or choices.max() > block_size:
        raise ValueError(f"block choices must lie in [1, {block_size}]")
    s = len(choices)
    mask = np.zeros(s * block_size, dtype=bool)
    mask[np.arange(s) * block_size + choices - 1] = True
    return mask


def new_lsh_routing(
    input_dim: int,
    width: int,
    tables: int,
    num_planes: int,
    seed: int,
    family_kind: str = "sign",
    lsh_width: float = 1.0,
) -> LshRouting:
    """Routing backed by one hash family per block of width/tables units."""
    if width % tables != 0:
        raise ValueError(f"width {width} not divisible into {tables} blocks")
    families = []
    for j in range(tables):
        fam_seed = derive_seed(seed, j)
        if family_kind == "sign":
            families.append(new_sign_lsh(input_dim, num_planes, fam_seed))
        elif family_kind == "euclidean":
            families.append(new_euclidean_lsh(input_dim, num_planes, lsh_width, fam_seed))
        else:
            raise ValueError(f"unknown family kind: {family_kind!r}")
    return LshRouting(tuple(families), expert_seed=derive_seed(seed, _EXPERT_TAG))


def _lsh_block_choices(routing: LshRouting, X: NDArray[np.float64], block_size: int) -> NDArray[np.int64]:
    """(n, tables) of 1-based within-block unit choices."""
    n = len(X)
    choices = np.empty((n, len(routing.families)), dtype=np.int64)
    for j, fam in enumerate(routing.families):
        if isinstance(fam, SignLsh):
            keys = sign_hash_batch(fam, X)
        else:
            keys = euclidean_hash_batch(fam, X)
        digests = _fold_bits(keys.astype(np.uint64), salt=derive_seed(routing.expert_seed, j))
        choices[:, j] = (digests % np.uint64(block_size)).astype(np.int64) + 1
    return choices


# ---------------------------------------------------------------------------
# DSM
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DsmModel:
    """Dense core plus a routing rule producing an s-sparse mask per input."""

    input_dim: int
    width: int
    bottom: NDArray[np.float64]
    top: NDArray[np.float64]
    activation: str
    routing: object
    sparsity: int
    seed: int = 0


def new_dsm_model(input_dim: int, width: int, routing, activation: str = "relu", seed: int = 0) -> DsmModel:
    if input_dim < 1 or width < 1:
        raise ValueError(f"need input_dim >= 1 and width >= 1, got {input_dim}, {width}")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation: {activation!r}")
    s = routing_sparsity(routing)
    if not 1 <= s <= width:
        raise ValueError(f"sparsity {s} out of range [1, {width}]")
    if isinstance(routing, LshRouting) and width % len(routing.families) != 0:
        raise ValueError("width must be divisible by the number of routing blocks")
    if isinstance(routing, NearestPointRouting) and len(routing.points) != width:
        raise ValueError("nearest-point routing needs one stored point per unit")
    stream = Stream(derive_seed(seed, _BOTTOM_TAG))
    bottom = stream.normals(width * input_dim).reshape(width, input_dim) / math.sqrt(input_dim)
    return DsmModel(input_dim, width, bottom, np.zeros(width), activation, routing, s, seed)


def routing_masks(model: DsmModel, X) -> NDArray[np.bool_]:
    """The (n, width) boolean activation masks the routing rule assigns."""
    X = _check_points(model, X)
    routing = model.routing
    if isinstance(routing, TopKRouting):
        return mask_topk_batch(X @ model.bottom.T, routing.k)
    if isinstance(routing, RandomHashRouting):
        return mask_random_hash_batch(X, model.width, routing.k, routing.hash_seed, routing.mask_dim)
    if isinstance(routing, LshRouting):
        block = model.width // len(routing.families)
        choices = _lsh_block_choices(routing, X, block)
        masks = np.zeros((len(X), model.width), dtype=bool)
        cols = np.arange(len(routing.families)) * block
        np.put_along_axis(masks, cols[None, :] + choices - 1, True, axis=1)
        return masks
    if isinstance(routing, NearestPointRouting):
        d2 = (
            np.einsum("ij,ij->i", X, X)[:, None]
            - 2.0 * X @ routing.points.T
            + np.einsum("ij,ij->i", routing.points, routing.points)[None, :]
        )
        owners = np.argmin(d2, axis=1)  # argmin takes the first (lowest-index) minimum
        masks = np.zeros((len(X), model.width), dtype=bool)
        masks[np.arange(len(X)), owners] = True
        return masks
    raise TypeError(f"not a routing rule: {type(routing).__name__}")


def dsm_forward(model: DsmModel, x) -> tuple[float, list[int]]:
    """Value and the (ascending) list of activated unit indices for one input."""
    x = _check_point(model, x)
    mask = routing_masks(model, x[None, :])[0]
    activated = np.flatnonzero(mask)
    if isinstance(model.routing, TopKRouting):
        # Top-K already paid for the full bottom pass; reuse it.
        z = model.bottom @ x
        phi = _activate(z[activated], model.activation)
    else:
        phi = _activate(model.bottom[activated] @ x, model.activation)
    value = float(model.top[activated] @ phi)
    return value, activated.tolist()


def masked_features(model, X) -> NDArray[np.float64]:
    """F[i, j] = mask_j(x_i) * phi_j(x_i); dense models have an all-ones mask.

    This is the design matrix of the (convex) top-layer problem; routing and
    the bottom layer are frozen, so training only ever sees F.
    """
    X = _check_points(model, X)
    if isinstance(model, DenseModel):
        return _activate(X @ model.bottom.T, model.activation)
    masks = routing_masks(model, X)
    if model.activation == "indicator":
        return masks.astype(np.float64)
    return _activate(X @ model.bottom.T, model.activation) * masks


def dsm_forward_batch(model: DsmModel, X) -> NDArray[np.float64]:
    return masked_features(model, X) @ model.top


# ---------------------------------------------------------------------------
# Exact simulations
# ---------------------------------------------------------------------------


def simulate_interpolation(points, f, seed: int = 0) -> DsmModel:
    """A width-t, 1-sparse model reproducing f at the t given points.

    Each point owns one unit via nearest-point routing; the unit's top weight
    is f(x_i) / <b_i, x_i>, with bottom rows resampled while the inner
    product is below 1e-6 in magnitude.
    """
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or len(P) < 1:
        raise ValueError("need a non-empty (t, d) array of construction points")
    t, d = P.shape
    values = np.asarray(f(P), dtype=np.float64)
    stream = Stream(derive_seed(seed, _INTERP_TAG))
    bottom = stream.normals(t * d).reshape(t, d) / math.sqrt(d)
    inner = np.einsum("ij,ij->i", bottom, P)
    for i in range(t):
        tries = 0
        while abs(inner[i]) < 1e-6:
            tries += 1
            if tries > 100:
                raise RuntimeError("persistent near-orthogonal bottom-row draw")
            bottom[i] = stream.normals(d) / math.sqrt(d)
            inner[i] = bottom[i] @ P[i]
    model = DsmModel(
        input_dim=d,
        width=t,
        bottom=bottom,
        top=values / inner,
        activation="identity",
        routing=NearestPointRouting(P.copy()),
        sparsity=1,
        seed=seed,
    )
    return model


def simulate_knn(anchors, f, k: int) -> DsmModel:
    """A model computing the mean of f over the k nearest anchors of a query.

    Bottom rows are the (unit-norm) anchors themselves; with the indicator
    activation and Top-K routing on inner products, the forward pass sums
    f(b_j) / k over the k largest <b_j, x>.
    """
    B = np.asarray(anchors, dtype=np.float64)
    if B.ndim != 2 or len(B) < 1:
        raise ValueError("need a non-empty (n, d) array of anchors")
    norms = np.linalg.norm(B, axis=1)
    if np.abs(norms - 1.0).max() > 1e-8:
        raise ValueError("non-unit anchor")
    n, d = B.shape
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    values = np.asarray(f(B), dtype=np.float64)
    return DsmModel(
        input_dim=d,
        width=n,
        bottom=B.copy(),
        top=values / k,
        activation="indicator",
        routing=TopKRouting(k),
        sparsity=k,
        seed=0,
    )


# ---------------------------------------------------------------------------
# LSH bucket learner
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class LshLearner:
    """Per-bucket regression over one Euclidean hash family.

    Prediction inside a trained bucket evaluates that bucket's payload; a
    query hashing to an empty bucket falls back to the bucket of its exact
    nearest training input (linear scan) and counts the event.
    """

    family: EuclideanLsh
    degree: int = 0
    table: BucketTable | None = None
    train_inputs: NDArray[np.float64] | None = None
    train_keys: NDArray[np.int64] | None = None
    fallback_count: int = 0


def new_lsh_learner(family: EuclideanLsh, degree: int = 0) -> LshLearner:
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    return LshLearner(family=family, degree=degree)


def _as_xy(data) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if isinstance(data, Dataset):
        return data.inputs, data.targets
    X, y = data
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64)


def lsh_fit(learner: LshLearner, train) -> LshLearner:
    """Hash every training point into the table; fit degree >= 1 payloads."""
    X, y = _as_xy(train)
    if len(X) == 0:
        raise ValueError("empty dataset")
    keys = euclidean_hash_batch(learner.family, X)
    table = new_bucket_table(learner.family, learner.degree)
    for i in range(len(X)):
        table_insert(table, tuple(keys[i].tolist()), X[i], float(y[i]))
    finalize_table(table)
    learner.table = table
    learner.train_inputs = X.copy()
    learner.train_keys = keys
    learner.fallback_count = 0
    return learner


def lsh_predict_batch(learner: LshLearner, X) -> NDArray[np.float64]:
    if learner.table is None:
        raise RuntimeError("learner not fitted")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != learner.family.dim:
        raise ValueError(f"expected shape (n, {learner.family.dim}), got {X.shape}")
    keys = euclidean_hash_batch(learner.family, X)
    out = np.empty(len(X))
    misses = []
    entries = learner.table.entries
    for i in range(len(X)):
        key = tuple(keys[i].tolist())
        if key in entries:
            out[i] = eval_payload(learner.table, key, X[i])
        else:
            misses.append(i)
    if misses:
        # exact nearest training input; its bucket is trained by construction
        T = learner.train_inputs
        t_sq = np.einsum("ij,ij->i", T, T)
        for i in misses:
            d2 = t_sq - 2.0 * (T @ X[i])  # |x|^2 is constant over the scan
            nearest = int(np.argmin(d2))
            key = tuple(learner.train_keys[nearest].tolist())
            out[i] = eval_payload(learner.table, key, T[nearest])
        learner.fallback_count += len(misses)
    return out


def lsh_predict(learner: LshLearner, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {x.shape}")
    return float(lsh_predict_batch(learner, x[None, :])[0])


def lsh_ensemble_predict(learners, weights, X) -> NDArray[np.float64]:
    """Weighted sum of per-table predictions (weights default to 1/s)."""
    learners = list(learners)
    if len(learners) < 1:
        raise ValueError("need at least one learner")
    if weights is None:
        weights = np.full(len(learners), 1.0 / len(learners))
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != len(learners):
        raise ValueError(f"{len(weights)} weights for {len(learners)} learners")
    X = np.asarray(X, dtype=np.float64)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[None, :]
    out = np.zeros(len(X))
    for w, learner in zip(weights, learners):
        out += w * lsh_predict_batch(learner, X)
    return float(out[0]) if squeeze else out


def calibrate_width(
    dim: int,
    num_planes: int,
    seed: int,
    inputs,
    delta: float,
    max_iters: int = 20,
    sample_cap: int = 2000,
) -> float:
    """Largest width in a halving search whose measured bucket diameter <= delta.

    The start width depends only on the data (twice a diameter upper bound),
    so shrinking delta can never increase the returned width.  Diameters are
    measured on a seeded subsample of at most ``sample_cap`` inputs.
    """
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("need at least 2 calibration inputs")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if len(X) > sample_cap:
        order = Stream(derive_seed(seed, _CALIB_TAG)).permutation(len(X))[:sample_cap]
        X = X[np.sort(order)]
    centroid = X.mean(axis=0)
    spread = float(np.linalg.norm(X - centroid, axis=1).max())
    width = max(4.0 * spread, 1e-12)
    for _ in range(max_iters):
        family = new_euclidean_lsh(dim, num_planes, width, seed)
        if bucket_stats(family, X).max_diameter <= delta:
            return width
        width /= 2.0
    raise RuntimeError("diameter bound unattainable within iteration budget (width underflow)")


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _routing_to_json(routing) -> dict:
    if isinstance(routing, TopKRouting):
        return {"variant": "topk", "k": routing.k}
    if isinstance(routing, RandomHashRouting):
        return {
            "variant": "random-hash",
            "k": routing.k,
            "hash_seed": routing.hash_seed,
            "mask_dim": routing.mask_dim,
        }
    if isinstance(routing, LshRouting):
        return {
            "variant": "lsh",
            "families": [family_to_json(f) for f in routing.families],
            "expert_seed": routing.expert_seed,
        }
    if isinstance(routing, NearestPointRouting):
        return {"variant": "nearest-point", "points": routing.points.tolist()}
    raise TypeError(f"not a routing rule: {type(routing).__name__}")


def _routing_from_json(obj: dict):
    variant = obj["variant"]
    if variant == "topk":
        return TopKRouting(obj["k"])
    if variant == "random-hash":
        return RandomHashRouting(obj["k"], obj["hash_seed"], obj["mask_dim"])
    if variant == "lsh":
        return LshRouting(
            tuple(family_from_json(f) for f in obj["families"]), obj["expert_seed"]
        )
    if variant == "nearest-point":
        return NearestPointRouting(np.asarray(obj["points"], dtype=np.float64))
    raise ValueError(f"unknown routing variant: {variant!r}")


def model_to_json(model) -> dict:
    if isinstance(model, DenseModel):
        return {
            "kind": "dense",
            "input_dim": model.input_dim,
            "width": model.width,
            "activation": model.activation,
            "seed": model.seed,
            "bottom": model.bottom.tolist(),
            "top": model.top.tolist(),
        }
    if isinstance(model, DsmModel):
        return {
            "kind": "dsm",
            "input_dim": model.input_dim,
            "width": model.width,
            "activation": model.activation,
            "seed": model.seed,
            "sparsity": model.sparsity,
            "routing": _routing_to_json(model.routing),
            "bottom": model.bottom.tolist(),
            "top": model.top.tolist(),
        }
    if isinstance(model, LshLearner):
        return {
            "kind": "lsh-learner",
            "family": family_to_json(model.family),
            "degree": model.degree,
            "table": None if model.table is None else table_to_json(model.table),
            "train_inputs": None
            if model.train_inputs is None
            else model.train_inputs.tolist(),
            "train_keys": None if model.train_keys is None else model.train_keys.tolist(),
            "fallback_count": model.fallback_count,
        }
    raise TypeError(f"not a model: {type(model).__name__}")


def model_from_json(obj: dict):
    kind = obj["kind"]
    if kind == "dense":
        return DenseModel(
            input_dim=obj["input_dim"],
            width=obj["width"],
            bottom=np.asarray(obj["bottom"], dtype=np.float64),
            top=np.asarray(obj["top"], dtype=np.float64),
            activation=obj["activation"],
            seed=obj["seed"],
        )
    if kind == "dsm":
        return DsmModel(
            input_dim=obj["input_dim"],
            width=obj["width"],
            bottom=np.asarray(obj["bottom"], dtype=np.float64),
            top=np.asarray(obj["top"], dtype=np.float64),
            activation=obj["activation"],
            routing=_routing_from_json(obj["routing"]),
            sparsity=obj["sparsity"],
            seed=obj["seed"],
        )
    if kind == "lsh-learner":
        learner = LshLearner(
            family=family_from_json(obj["family"]),
            degree=obj["degree"],
            table=None if obj["table"] is None else table_from_json(obj["table"]),
            train_inputs=None
            if obj["train_inputs"] is None
            else np.asarray(obj["train_inputs"], dtype=np.float64),
            train_keys=None
            if obj["train_keys"] is None
            else np.asarray(obj["train_keys"], dtype=np.int64),
            fallback_count=obj["fallback_count"],
        )
        return learner
    raise ValueError(f"unknown model kind: {kind!r}")
