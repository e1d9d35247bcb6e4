"""Euclidean lattice and sign-pattern hash families with bucket tables.

The Euclidean family discretizes random projections onto a shifted lattice:
key coordinate ``i`` is ``floor((a_i . x + b_i) / width)`` with Gaussian
directions ``a_i`` and offsets ``b_i`` uniform on ``[0, width)``.  The sign
family keeps only the sign pattern of the projections.  Bucket tables map
keys to learned payloads -- running-mean constants, or low-degree polynomial
coefficients -- and back the partition-based learners in
:mod:`sparselab.models`.

Two points sharing a Euclidean bucket satisfy ``|a_i . (x - x')| < width``
for every plane ``i``, which is what makes the bucket-diameter diagnostics
in :func:`bucket_stats` meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .rng import Stream, derive_seed

# A bucket key is the tuple of per-plane cell indices (Euclidean family) or
# the tuple of +/-1 signs (sign family).  Equality is element-wise.
BucketKey = tuple[int, ...]

_EUCLIDEAN_TAG = 0x4C561
_SIGN_TAG = 0x4C562

# Budget (in float64 elements) for temporary pairwise-distance blocks.
_PAIR_BLOCK = 1 << 21


@dataclass(frozen=True, eq=False)
class EuclideanLsh:
    """Lattice hash family: ``h_i(x) = floor((a_i . x + b_i) / width)``."""

    dim: int
    num_planes: int
    width: float
    directions: NDArray[np.float64]  # (num_planes, dim), iid standard normal
    offsets: NDArray[np.float64]  # (num_planes,), each in [0, width)
    seed: int


@dataclass(frozen=True, eq=False)
class SignLsh:
    """Hyperplane hash family: ``h_i(x) = sign(a_i . x)`` with 0 -> +1."""

    dim: int
    num_planes: int
    directions: NDArray[np.float64]
    seed: int


def new_euclidean_lsh(dim: int, num_planes: int, width: float, seed: int) -> EuclideanLsh:
    """Draw a Euclidean lattice family, deterministic in (dim, planes, width, seed)."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if num_planes < 1:
        raise ValueError(f"num_planes must be >= 1, got {num_planes}")
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    stream = Stream(derive_seed(seed, _EUCLIDEAN_TAG))
    directions = stream.normals(num_planes * dim).reshape(num_planes, dim)
    offsets = stream.uniforms(num_planes) * width
    return EuclideanLsh(dim, num_planes, float(width), directions, offsets, seed)


def new_sign_lsh(dim: int, num_planes: int, seed: int) -> SignLsh:
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if num_planes < 1:
        raise ValueError(f"num_planes must be >= 1, got {num_planes}")
    stream = Stream(derive_seed(seed, _SIGN_TAG))
    directions = stream.normals(num_planes * dim).reshape(num_planes, dim)
    return SignLsh(dim, num_planes, directions, seed)


def _check_batch(family, X) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != family.dim:
        raise ValueError(
            f"expected points of dimension {family.dim}, got array of shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite input")
    return X


def euclidean_hash_batch(lsh: EuclideanLsh, X) -> NDArray[np.int64]:
    """Bucket keys for rows of X, as an (n, num_planes) integer matrix."""
    X = _check_batch(lsh, X)
    cells = np.floor((X @ lsh.directions.T + lsh.offsets) / lsh.width)
    return cells.astype(np.int64)


def euclidean_hash(lsh: EuclideanLsh, x) -> BucketKey:
    """Bucket key for one point (delegates to the batch path so the two agree)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {x.shape}")
    return tuple(euclidean_hash_batch(lsh, x[None, :])[0].tolist())


def sign_hash_batch(lsh: SignLsh, X) -> NDArray[np.int64]:
    """Sign patterns (+1/-1 per plane) for rows of X; dot >= 0 maps to +1."""
    X = _check_batch(lsh, X)
    return np.where(X @ lsh.directions.T >= 0.0, 1, -1).astype(np.int64)


def sign_hash(lsh: SignLsh, x) -> BucketKey:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d point, got shape {x.shape}")
    return tuple(sign_hash_batch(lsh, x[None, :])[0].tolist())


def family_ref(family) -> str:
    """Opaque identifier tying a bucket table to the family that filled it."""
    if isinstance(family, EuclideanLsh):
        return (
            f"euclidean:dim={family.dim}:planes={family.num_planes}"
            f":width={family.width!r}:seed={family.seed}"
        )
    if isinstance(family, SignLsh):
        return f"sign:dim={family.dim}:planes={family.num_planes}:seed={family.seed}"
    raise TypeError(f"not a hash family: {type(family).__name__}")


@dataclass
class BucketPayload:
    """Learned per-bucket state.

    ``constant`` is the running mean of inserted targets (the degree-0
    predictor); ``centroid`` the running mean of inserted inputs.  For
    degree >= 1 tables, ``coefficients`` holds the monomial coefficients
    fitted by :func:`finalize_table`.
    """

    count: int
    centroid: NDArray[np.float64]
    constant: float
    coefficients: NDArray[np.float64] | None = None


@dataclass
class BucketTable:
    """Map from bucket key to payload for one hash family."""

    family_ref: str
    degree: int
    key_len: int
    dim: int
    entries: dict[BucketKey, BucketPayload] = field(default_factory=dict)
    # (x, y) pairs accumulated per bucket until finalize_table runs the
    # per-bucket least-squares fit; unused for degree 0.
    pending: dict[BucketKey, list[tuple[NDArray[np.float64], float]]] = field(
        default_factory=dict
    )


def new_bucket_table(family, degree: int = 0) -> BucketTable:
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    return BucketTable(
        family_ref=family_ref(family),
        degree=degree,
        key_len=family.num_planes,
        dim=family.dim,
    )


def table_insert(table: BucketTable, key: BucketKey, x, y: float) -> BucketTable:
    """Insert one (x, y) observation into its bucket (running-mean update)."""
    if len(key) != table.key_len:
        raise ValueError(f"key length {len(key)} != expected {table.key_len}")
    x = np.asarray(x, dtype=np.float64)
    entry = table.entries.get(key)
    if entry is None:
        table.entries[key] = BucketPayload(count=1, centroid=x.copy(), constant=float(y))
    else:
        entry.count += 1
        entry.centroid += (x - entry.centroid) / entry.count
        entry.constant += (float(y) - entry.constant) / entry.count
    if table.degree >= 1:
        table.pending.setdefault(key, []).append((x.copy(), float(y)))
    return table


def finalize_table(table: BucketTable) -> BucketTable:
    """Fit per-bucket ridge least squares over monomials (degree >= 1 tables).

    The tiny ridge term keeps buckets with fewer points than monomials
    solvable; degree-0 tables are already final after insertion.
    """
    if table.degree == 0:
        return table
    from .targets import eval_monomials, monomial_exponents

    exps = monomial_exponents(table.dim, table.degree)
    ridge = 1e-8
    for key, pairs in table.pending.items():
        X = np.stack([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        design = eval_monomials(X, exps)
        gram = design.T @ design + ridge * np.eye(design.shape[1])
        coef = np.linalg.solve(gram, design.T @ y)
        table.entries[key].coefficients = coef
    table.pending = {}
    return table


def eval_payload(table: BucketTable, key: BucketKey, x) -> float:
    """Evaluate a bucket's predictor at x."""
    entry = table.entries[key]
    if table.degree == 0:
        return entry.constant
    if entry.coefficients is None:
        raise RuntimeError("degree >= 1 table evaluated before finalize_table")
    from .targets import eval_monomials, monomial_exponents

    x = np.asarray(x, dtype=np.float64)
    design = eval_monomials(x[None, :], monomial_exponents(table.dim, table.degree))
    return float(design[0] @ entry.coefficients)


@dataclass
class BucketStats:
    """Occupancy and geometry of the buckets induced on a point sample."""

    non_empty_count: int
    max_diameter: float
    diameters: NDArray[np.float64]
    sample_size: int


def _group_diameter(Q: NDArray[np.float64]) -> float:
    """Exact max pairwise l2 distance, O(m^2) with bounded memory blocks."""
    m = len(Q)
    if m < 2:
        return 0.0
    sq = np.einsum("ij,ij->i", Q, Q)
    block = max(1, _PAIR_BLOCK // m)
    best = 0.0
    for lo in range(0, m, block):
        hi = min(m, lo + block)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (Q[lo:hi] @ Q.T)
        best = max(best, float(d2.max()))
    return float(np.sqrt(max(best, 0.0)))


def bucket_stats(lsh: EuclideanLsh, points) -> BucketStats:
    """Group points by bucket and measure per-bucket exact diameters."""
    P = _check_batch(lsh, points)
    if len(P) < 2:
        raise ValueError(f"need at least 2 points, got {len(P)}")
    keys = euclidean_hash_batch(lsh, P)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    n_groups = int(inverse.max()) + 1
    diameters = np.zeros(n_groups)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(n_groups + 1))
    for g in range(n_groups):
        members = order[bounds[g] : bounds[g + 1]]
        diameters[g] = _group_diameter(P[members])
    return BucketStats(
        non_empty_count=n_groups,
        max_diameter=float(diameters.max()),
        diameters=diameters,
        sample_size=len(P),
    )


# ---------------------------------------------------------------------------
# JSON interfaces.  Families serialize by construction parameters (the draw
# is deterministic, so rebuilding from the seed reproduces identical bits);
# tables serialize their entries as (key array, payload) pairs.
# ---------------------------------------------------------------------------


def key_to_json(key: BucketKey) -> list[int]:
    return [int(c) for c in key]


def bucket_stats_to_json(stats: BucketStats) -> dict:
    return {
        "non_empty": stats.non_empty_count,
        "max_diameter": stats.max_diameter,
        "sample_size": stats.sample_size,
    }


def family_to_json(family) -> dict:
    if isinstance(family, EuclideanLsh):
        return {
            "kind": "euclidean",
            "dim": family.dim,
            "num_planes": family.num_planes,
            "width": family.width,
            "seed": family.seed,
        }
    if isinstance(family, SignLsh):
        return {
            "kind": "sign",
            "dim": family.dim,
            "num_planes": family.num_planes,
            "seed": family.seed,
        }
    raise TypeError(f"not a hash family: {type(family).__name__}")


def family_from_json(obj: dict):
    if obj["kind"] == "euclidean":
        return new_euclidean_lsh(obj["dim"], obj["num_planes"], obj["width"], obj["seed"])
    if obj["kind"] == "sign":
        return new_sign_lsh(obj["dim"], obj["num_planes"], obj["seed"])
    raise ValueError(f"unknown family kind: {obj['kind']!r}")


def table_to_json(table: BucketTable) -> dict:
    entries = []
    for key, payload in table.entries.items():
        entries.append(
            [
                key_to_json(key),
                {
                    "count": payload.count,
                    "centroid": payload.centroid.tolist(),
                    "constant": payload.constant,
                    "coefficients": None
                    if payload.coefficients is None
                    else payload.coefficients.tolist(),
                },
            ]
        )
    return {
        "family_ref": table.family_ref,
        "degree": table.degree,
        "key_len": table.key_len,
        "dim": table.dim,
        "entries": entries,
    }


def table_from_json(obj: dict) -> BucketTable:
    table = BucketTable(
        family_ref=obj["family_ref"],
        degree=obj["degree"],
        key_len=obj["key_len"],
        dim=obj["dim"],
    )
    for key_list, p in obj["entries"]:
        table.entries[tuple(key_list)] = BucketPayload(
            count=p["count"],
            centroid=np.asarray(p["centroid"], dtype=np.float64),
            constant=p["constant"],
            coefficients=None
            if p["coefficients"] is None
            else np.asarray(p["coefficients"], dtype=np.float64),
        )
    return table
