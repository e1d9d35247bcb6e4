"""Synthetic regression targets with exact evaluators.

Five families: random bounded-degree polynomials, hypercube corner
interpolants, targets composed with a random orthonormal subspace embedding,
packings of piecewise-linear cones, and band-limited cosine sums.  Each
family has a generator (deterministic in its seed), an exact batch
evaluator, and JSON round-tripping so a dataset written to disk can be
re-evaluated later.  Datasets live on ``[-1, 1]^d``; the subspace families
restrict sampling to the slice of the cube cut by a random k-dimensional
linear subspace.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .rng import Stream, derive_seed

_POLY_TAG = 0x7A01
_CUBE_TAG = 0x7A02
_ORTH_TAG = 0x7A03
_CONE_TAG = 0x7A04
_FOURIER_TAG = 0x7A05
_DATA_TAG = 0x7A06
_LIP_TAG = 0x7A07

MAX_HYPERCUBE_DIM = 16
_ENUM_CAP = 200_000  # enumerate the monomial basis up to this size, sample beyond
_CENTER_CAP = 1 << 20
_EVAL_BUDGET = 1 << 22  # float64 elements per temporary block


# ---------------------------------------------------------------------------
# Monomial basis helpers (shared with the bucket tables' polynomial payloads)
# ---------------------------------------------------------------------------


def monomial_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent multi-indices with total degree <= degree, graded order."""
    out = [(0,) * dim]
    for total in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def eval_monomials(X, exponents) -> NDArray[np.float64]:
    """Design matrix of monomials: out[i, j] = prod_k X[i, k] ** exponents[j, k]."""
    X = np.asarray(X, dtype=np.float64)
    E = np.asarray(exponents, dtype=np.int64)
    n, d = X.shape
    max_deg = int(E.max()) if E.size else 0
    # Power tables keep memory at O(n * d * degree) instead of O(n * m * d).
    pows = np.ones((d, max_deg + 1, n))
    for p in range(1, max_deg + 1):
        pows[:, p] = pows[:, p - 1] * X.T
    out = np.ones((n, len(E)))
    for j in range(d):
        out *= pows[j, E[:, j]].T
    return out


# ---------------------------------------------------------------------------
# Random polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolynomialSpec:
    """Sparse polynomial with |coefficients| summing to 1/degree (or 1.0)."""

    dim: int
    degree: int
    exponents: tuple[tuple[int, ...], ...]
    coefficients: NDArray[np.float64]
    seed: int


def _sample_multi_index(stream: Stream, dim: int, degree: int) -> tuple[int, ...]:
    """Uniform multi-index with total degree <= degree via the multiset bijection.

    Multisets of size ``degree`` over ``{0..dim}`` (0 = slack symbol) biject
    with increasing ``degree``-subsets of ``range(dim + degree)``; a uniform
    subset therefore gives a uniform multi-index.
    """
    positions = np.sort(stream.permutation(dim + degree)[:degree])
    items = positions - np.arange(degree)
    e = [0] * dim
    for v in items.tolist():
        if v >= 1:
            e[v - 1] += 1
    return tuple(e)


def gen_random_polynomial(
    d: int, D: int, num_terms: int, seed: int, coeff_sum: str = "inv-degree"
) -> PolynomialSpec:
    """Sample ``num_terms`` distinct multi-indices of total degree <= D.

    Coefficients are uniform on [-1, 1], then rescaled so the sum of their
    absolute values is exactly 1/D (``coeff_sum="inv-degree"``, which bounds
    every coordinate-wise slope by 1) or exactly 1.0 (``coeff_sum="unit"``).
    """
    if d < 1 or D < 1 or num_terms < 1:
        raise ValueError(f"invalid polynomial arguments d={d}, D={D}, num_terms={num_terms}")
    if coeff_sum not in ("inv-degree", "unit"):
        raise ValueError(f"unknown coeff_sum variant: {coeff_sum!r}")
    total = math.comb(d + D, D)
    if num_terms > total:
        raise ValueError(f"num_terms={num_terms} exceeds basis size {total}")
    stream = Stream(derive_seed(seed, _POLY_TAG))
    if total <= _ENUM_CAP:
        basis = monomial_exponents(d, D)
        picked = sorted(stream.permutation(total)[:num_terms].tolist())
        exps = tuple(basis[i] for i in picked)
    else:
        seen: dict[tuple[int, ...], None] = {}
        attempts = 0
        while len(seen) < num_terms:
            attempts += 1
            if attempts > 100 * num_terms:
                raise RuntimeError("multi-index sampling failed to find distinct terms")
            seen.setdefault(_sample_multi_index(stream, d, D), None)
        exps = tuple(sorted(seen))
    raw = stream.uniforms(num_terms) * 2.0 - 1.0
    denom = np.abs(raw).sum()
    if denom == 0.0:
        raise RuntimeError("degenerate coefficient draw")
    target = 1.0 / D if coeff_sum == "inv-degree" else 1.0
    coeffs = raw * (target / denom)
    return PolynomialSpec(d, D, exps, coeffs, seed)


def eval_polynomial(spec: PolynomialSpec, X) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"expected shape (n, {spec.dim}), got {X.shape}")
    return eval_monomials(X, spec.exponents) @ spec.coefficients


# ---------------------------------------------------------------------------
# Hypercube corner interpolants
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HypercubeSpec:
    """f(x) = sum_y v_y * I_y(x) with I_y(x) = prod_i (1 + y_i x_i) / 2."""

    dim: int
    corner_values: NDArray[np.float64]  # (2**dim,), entries +/-1
    seed: int


def corner_matrix(dim: int) -> NDArray[np.float64]:
    """The 2^dim corners of {-1, +1}^dim.

    Ordered with the first coordinate most significant and +1 before -1, so
    for dim=2 the rows are (1,1), (1,-1), (-1,1), (-1,-1).
    """
    idx = np.arange(1 << dim)
    bits = (idx[:, None] >> (dim - 1 - np.arange(dim))[None, :]) & 1
    return np.where(bits == 0, 1.0, -1.0)


def gen_random_hypercube(d: int, seed: int) -> HypercubeSpec:
    """Corner values drawn +/-1 with equal probability."""
    if not 1 <= d <= MAX_HYPERCUBE_DIM:
        raise ValueError(f"hypercube dim must be in [1, {MAX_HYPERCUBE_DIM}], got {d}")
    stream = Stream(derive_seed(seed, _CUBE_TAG))
    u = stream.uniforms(1 << d)
    values = np.where(u < 0.5, 1.0, -1.0)
    return HypercubeSpec(d, values, seed)


def eval_hypercube(spec: HypercubeSpec, X) -> NDArray[np.float64]:
    """Direct summation over all 2^dim corners, chunked over input rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"expected shape (n, {spec.dim}), got {X.shape}")
    if np.abs(X).max(initial=0.0) > 1.0:
        raise ValueError("input outside [-1, 1]^d")
    Y = corner_matrix(spec.dim)
    n = len(X)
    out = np.empty(n)
    chunk = max(1, _EVAL_BUDGET // (Y.shape[0] * spec.dim))
    for lo in range(0, n, chunk):
        Xc = X[lo : lo + chunk]
        indicators = np.prod((1.0 + Xc[:, None, :] * Y[None, :, :]) * 0.5, axis=2)
        out[lo : lo + chunk] = indicators @ spec.corner_values
    return out


# ---------------------------------------------------------------------------
# Subspace embeddings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubspaceEmbedding:
    """Evaluate an intrinsic target on the image of a random k-subspace."""

    ambient_dim: int
    intrinsic_dim: int
    rows: NDArray[np.float64]  # (k, d), orthonormal
    inner: object  # any spec in this module, defined on R^k
    seed: int


def random_orthonormal_rows(d: int, k: int, seed: int) -> NDArray[np.float64]:
    """Orthonormalize k iid Gaussian rows by modified Gram-Schmidt.

    Near-zero residuals trigger a resample of the offending row; persistent
    degeneracy (impossible in practice for k <= d) raises.
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    stream = Stream(derive_seed(seed, _ORTH_TAG))
    rows = np.empty((k, d))
    for i in range(k):
        for attempt in range(20):
            v = stream.normals(d)
            for _ in range(2):  # second pass restores orthogonality lost to rounding
                for j in range(i):
                    v -= (rows[j] @ v) * rows[j]
            norm = np.linalg.norm(v)
            if norm >= 1e-6:
                rows[i] = v / norm
                break
        else:
            raise RuntimeError("degenerate draw during orthonormalization")
    return rows


def gen_subspace_embedding(d: int, k: int, inner_spec, seed: int) -> SubspaceEmbedding:
    if spec_dim(inner_spec) != k:
        raise ValueError(
            f"inner spec has dimension {spec_dim(inner_spec)}, expected k={k}"
        )
    rows = random_orthonormal_rows(d, k, seed)
    return SubspaceEmbedding(d, k, rows, inner_spec, seed)


def eval_subspace(spec: SubspaceEmbedding, X) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.ambient_dim:
        raise ValueError(f"expected shape (n, {spec.ambient_dim}), got {X.shape}")
    return evaluate(spec.inner, X @ spec.rows.T)


# ---------------------------------------------------------------------------
# Cone packings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConeFunctionSpec:
    """Sum of disjoint cones: sgn(s_v) * max(0, eps - L * |x - v|) per center.

    Centers form a grid with spacing exactly 2 * eps / L per axis, so cone
    supports (radius eps / L) have disjoint interiors and at most one term is
    nonzero at any point.  ``signs`` holds the +/-eps value taken at each
    center.
    """

    intrinsic_dim: int
    lipschitz: float
    epsilon: float
    centers: NDArray[np.float64]  # (m, k)
    signs: NDArray[np.float64]  # (m,), entries +/-epsilon
    seed: int


def gen_cone_family(
    k: int, lipschitz: float, epsilon: float, seed: int, low: float = -1.0, high: float = 1.0
) -> ConeFunctionSpec:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not lipschitz > 0 or not epsilon > 0:
        raise ValueError("lipschitz and epsilon must be positive")
    if not low < high:
        raise ValueError(f"empty region [{low}, {high}]")
    spacing = 2.0 * epsilon / lipschitz
    radius = epsilon / lipschitz
    per_axis = int(math.floor((high - low - 2.0 * radius) / spacing + 1.0 + 1e-12))
    if per_axis < 1:
        raise ValueError("epsilon too large: no cone fits inside the region")
    if per_axis**k > _CENTER_CAP:
        raise ValueError(f"grid of {per_axis}^{k} centers exceeds cap {_CENTER_CAP}")
    axis = low + radius + spacing * np.arange(per_axis)
    grids = np.meshgrid(*([axis] * k), indexing="ij")
    centers = np.stack(grids, axis=-1).reshape(-1, k)
    stream = Stream(derive_seed(seed, _CONE_TAG))
    signs = epsilon * np.where(stream.uniforms(len(centers)) < 0.5, 1.0, -1.0)
    return ConeFunctionSpec(k, float(lipschitz), float(epsilon), centers, signs, seed)


def eval_cone(spec: ConeFunctionSpec, X) -> NDArray[np.float64]:
    """Exact evaluation; distances use direct differences so f(v) = s_v exactly."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.intrinsic_dim:
        raise ValueError(f"expected shape (n, {spec.intrinsic_dim}), got {X.shape}")
    n, m = len(X), len(spec.centers)
    sign_dirs = np.sign(spec.signs)
    out = np.empty(n)
    chunk = max(1, _EVAL_BUDGET // max(1, m * spec.intrinsic_dim))
    for lo in range(0, n, chunk):
        diff = X[lo : lo + chunk, None, :] - spec.centers[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        bumps = np.maximum(0.0, spec.epsilon - spec.lipschitz * dist)
        out[lo : lo + chunk] = bumps @ sign_dirs
    return out


# ---------------------------------------------------------------------------
# Band-limited cosine sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FourierSpec:
    """f(x) = sum_n eta_n * eps1^alpha * 2 cos(pi n . x), n in {1..1/eps1}^k.

    ``signs`` holds eta_n = +/- lipschitz / (scale_c * sqrt(k) * pi) in the
    lexicographic order of :func:`fourier_frequencies`.
    """

    intrinsic_dim: int
    inv_eps1: int
    alpha: float
    signs: NDArray[np.float64]
    scale_c: float
    lipschitz: float
    seed: int


def fourier_frequencies(k: int, inv_eps1: int) -> NDArray[np.int64]:
    """Frequency multi-indices {1..inv_eps1}^k in lexicographic order."""
    return np.array(list(itertools.product(range(1, inv_eps1 + 1), repeat=k)), dtype=np.int64)


def gen_fourier_family(
    k: int,
    inv_eps1: int,
    seed: int,
    alpha: float | None = None,
    scale_c: float = 4.0,
    lipschitz: float = 1.0,
) -> FourierSpec:
    if k < 1 or inv_eps1 < 1:
        raise ValueError(f"need k >= 1 and inv_eps1 >= 1, got k={k}, inv_eps1={inv_eps1}")
    if not scale_c > 0 or not lipschitz > 0:
        raise ValueError("scale_c and lipschitz must be positive")
    if inv_eps1**k > _CENTER_CAP:
        raise ValueError(f"{inv_eps1}^{k} frequencies exceed cap {_CENTER_CAP}")
    if alpha is None:
        alpha = k / 2.0 + 1.0
    magnitude = lipschitz / (scale_c * math.sqrt(k) * math.pi)
    stream = Stream(derive_seed(seed, _FOURIER_TAG))
    signs = magnitude * np.where(stream.uniforms(inv_eps1**k) < 0.5, 1.0, -1.0)
    return FourierSpec(k, inv_eps1, float(alpha), signs, float(scale_c), float(lipschitz), seed)


def eval_fourier(spec: FourierSpec, X) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.intrinsic_dim:
        raise ValueError(f"expected shape (n, {spec.intrinsic_dim}), got {X.shape}")
    N = fourier_frequencies(spec.intrinsic_dim, spec.inv_eps1)
    eps1 = 1.0 / spec.inv_eps1
    phases = X @ N.T.astype(np.float64)
    return 2.0 * eps1**spec.alpha * (np.cos(np.pi * phases) @ spec.signs)


# ---------------------------------------------------------------------------
# Generic spec plumbing
# ---------------------------------------------------------------------------

_EVALUATORS = {
    PolynomialSpec: eval_polynomial,
    HypercubeSpec: eval_hypercube,
    SubspaceEmbedding: eval_subspace,
    ConeFunctionSpec: eval_cone,
    FourierSpec: eval_fourier,
}


def evaluate(spec, X) -> NDArray[np.float64]:
    """Evaluate any target spec on a batch of inputs (n, dim) -> (n,)."""
    try:
        fn = _EVALUATORS[type(spec)]
    except KeyError:
        raise TypeError(f"not a target spec: {type(spec).__name__}") from None
    return fn(spec, X)


def spec_dim(spec) -> int:
    """Ambient input dimension a spec expects."""
    if isinstance(spec, PolynomialSpec):
        return spec.dim
    if isinstance(spec, HypercubeSpec):
        return spec.dim
    if isinstance(spec, SubspaceEmbedding):
        return spec.ambient_dim
    if isinstance(spec, (ConeFunctionSpec, FourierSpec)):
        return spec.intrinsic_dim
    raise TypeError(f"not a target spec: {type(spec).__name__}")


def spec_to_json(spec) -> dict:
    if isinstance(spec, PolynomialSpec):
        return {
            "family": "poly",
            "dim": spec.dim,
            "degree": spec.degree,
            "exponents": [list(e) for e in spec.exponents],
            "coefficients": spec.coefficients.tolist(),
            "seed": spec.seed,
        }
    if isinstance(spec, HypercubeSpec):
        return {
            "family": "hypercube",
            "dim": spec.dim,
            "corner_values": spec.corner_values.tolist(),
            "seed": spec.seed,
        }
    if isinstance(spec, SubspaceEmbedding):
        return {
            "family": "subspace",
            "ambient_dim": spec.ambient_dim,
            "intrinsic_dim": spec.intrinsic_dim,
            "rows": spec.rows.tolist(),
            "inner": spec_to_json(spec.inner),
            "seed": spec.seed,
        }
    if isinstance(spec, ConeFunctionSpec):
        return {
            "family": "cone",
            "intrinsic_dim": spec.intrinsic_dim,
            "lipschitz": spec.lipschitz,
            "epsilon": spec.epsilon,
            "centers": spec.centers.tolist(),
            "signs": spec.signs.tolist(),
            "seed": spec.seed,
        }
    if isinstance(spec, FourierSpec):
        return {
            "family": "fourier",
            "intrinsic_dim": spec.intrinsic_dim,
            "inv_eps1": spec.inv_eps1,
            "alpha": spec.alpha,
            "signs": spec.signs.tolist(),
            "scale_c": spec.scale_c,
            "lipschitz": spec.lipschitz,
            "seed": spec.seed,
        }
    raise TypeError(f"not a target spec: {type(spec).__name__}")


def spec_from_json(obj: dict):
    family = obj["family"]
    if family == "poly":
        return PolynomialSpec(
            dim=obj["dim"],
            degree=obj["degree"],
            exponents=tuple(tuple(e) for e in obj["exponents"]),
            coefficients=np.asarray(obj["coefficients"], dtype=np.float64),
            seed=obj["seed"],
        )
    if family == "hypercube":
        return HypercubeSpec(
            dim=obj["dim"],
            corner_values=np.asarray(obj["corner_values"], dtype=np.float64),
            seed=obj["seed"],
        )
    if family == "subspace":
        return SubspaceEmbedding(
            ambient_dim=obj["ambient_dim"],
            intrinsic_dim=obj["intrinsic_dim"],
            rows=np.asarray(obj["rows"], dtype=np.float64),
            inner=spec_from_json(obj["inner"]),
            seed=obj["seed"],
        )
    if family == "cone":
        return ConeFunctionSpec(
            intrinsic_dim=obj["intrinsic_dim"],
            lipschitz=obj["lipschitz"],
            epsilon=obj["epsilon"],
            centers=np.asarray(obj["centers"], dtype=np.float64),
            signs=np.asarray(obj["signs"], dtype=np.float64),
            seed=obj["seed"],
        )
    if family == "fourier":
        return FourierSpec(
            intrinsic_dim=obj["intrinsic_dim"],
            inv_eps1=obj["inv_eps1"],
            alpha=obj["alpha"],
            signs=np.asarray(obj["signs"], dtype=np.float64),
            scale_c=obj["scale_c"],
            lipschitz=obj["lipschitz"],
            seed=obj["seed"],
        )
    raise ValueError(f"unknown target family: {family!r}")


def spec_from_params(params: dict):
    """Build a spec from generator parameters (the sweep/CLI config format)."""
    params = dict(params)
    family = params.pop("family")
    seed = params.pop("seed", 0)
    if family == "poly":
        return gen_random_polynomial(
            params["d"], params["degree"], params.get("num_terms", 16), seed,
            coeff_sum=params.get("coeff_sum", "inv-degree"),
        )
    if family == "hypercube":
        return gen_random_hypercube(params["d"], seed)
    if family == "subspace-poly":
        inner = gen_random_polynomial(
            params["k"], params["degree"], params.get("num_terms", 16),
            derive_seed(seed, 1),
            coeff_sum=params.get("coeff_sum", "inv-degree"),
        )
        return gen_subspace_embedding(params["d"], params["k"], inner, derive_seed(seed, 2))
    if family == "cone":
        return gen_cone_family(
            params["k"], params.get("lipschitz", 1.0), params["eps"], seed
        )
    if family == "fourier":
        return gen_fourier_family(
            params["k"], params["inv_eps1"], seed,
            alpha=params.get("alpha"), scale_c=params.get("scale_c", 4.0),
            lipschitz=params.get("lipschitz", 1.0),
        )
    raise ValueError(f"unknown target family: {family!r}")


# ---------------------------------------------------------------------------
# Lipschitz estimation and dataset sampling
# ---------------------------------------------------------------------------


def estimate_lipschitz(f, sampler, num_pairs: int, seed: int = 0) -> float:
    """Max sampled difference quotient |f(x) - f(x')| / |x - x'|.

    Pairs are drawn at two scales: independent global pairs from ``sampler``,
    and local pairs perturbed by radius 1e-3 (local slopes dominate for
    piecewise-linear targets).  ``sampler(n)`` must return an (n, dim) array.
    """
    if num_pairs < 1:
        raise ValueError(f"num_pairs must be >= 1, got {num_pairs}")
    a = np.asarray(sampler(num_pairs), dtype=np.float64)
    b = np.asarray(sampler(num_pairs), dtype=np.float64)
    base = np.asarray(sampler(num_pairs), dtype=np.float64)
    stream = Stream(derive_seed(seed, _LIP_TAG))
    direction = stream.normals(base.size).reshape(base.shape)
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    direction /= np.maximum(norms, 1e-30)
    best = 0.0
    for x1, x2 in ((a, b), (base, base + 1e-3 * direction)):
        dist = np.linalg.norm(x1 - x2, axis=1)
        keep = dist > 0
        if keep.any():
            ratio = np.abs(f(x1[keep]) - f(x2[keep])) / dist[keep]
            best = max(best, float(ratio.max()))
    return best


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sampled (inputs, targets) with enough metadata to regenerate exactly."""

    inputs: NDArray[np.float64]  # (n, d), inside [-1, 1]^d
    targets: NDArray[np.float64]  # (n,)
    meta: dict


def sample_subspace_slice(rows: NDArray[np.float64], n: int, seed: int) -> NDArray[np.float64]:
    """Uniform points on the slice {x = A^T z} inside [-1, 1]^d.

    Rejection sampling in slice coordinates: |z_j| <= |row_j|_1 bounds the
    coordinates of any cube point, so a box proposal covers the region.
    """
    rows = np.asarray(rows, dtype=np.float64)
    k, d = rows.shape
    halves = np.abs(rows).sum(axis=1)  # per-axis l1 bounds
    stream = Stream(derive_seed(seed, _DATA_TAG))
    batch = max(4096, 2 * n)
    kept = []
    got = 0
    for _ in range(200):
        Z = (stream.uniforms(batch * k).reshape(batch, k) * 2.0 - 1.0) * halves
        X = Z @ rows  # lift: x = A^T z
        inside = np.abs(X).max(axis=1) <= 1.0
        kept.append(X[inside])
        got += int(inside.sum())
        if got >= n:
            break
    else:
        raise RuntimeError("slice rejection sampling acceptance too low")
    return np.concatenate(kept)[:n]


def sample_dataset(spec, d: int, n: int, seed: int, distribution: str = "uniform-cube") -> Dataset:
    """n i.i.d. inputs from the given distribution with exact targets."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d != spec_dim(spec):
        raise ValueError(f"d={d} does not match spec dimension {spec_dim(spec)}")
    if distribution == "uniform-cube":
        stream = Stream(derive_seed(seed, _DATA_TAG))
        X = stream.uniforms(n * d).reshape(n, d) * 2.0 - 1.0
    elif distribution == "uniform-on-subspace-slice":
        if not isinstance(spec, SubspaceEmbedding):
            raise ValueError("subspace-slice sampling requires a subspace embedding spec")
        X = sample_subspace_slice(spec.rows, n, seed)
    else:
        raise ValueError(f"unknown distribution: {distribution!r}")
    y = evaluate(spec, X)
    meta = {
        "function": spec_to_json(spec),
        "seed": seed,
        "n": n,
        "distribution": distribution,
    }
    return Dataset(X, y, meta)


def write_dataset(dataset: Dataset, path) -> None:
    """CSV with columns x1..xd,y plus a JSON sidecar with the generator spec."""
    path = Path(path)
    d = dataset.inputs.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["y"])
        for row, target in zip(dataset.inputs, dataset.targets):
            writer.writerow([f"{v:.17g}" for v in row] + [f"{target:.17g}"])
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(dataset.meta, fh, indent=2)
        fh.write("\n")


def read_dataset(path) -> Dataset:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return Dataset(data[:, :-1], data[:, -1], meta)
