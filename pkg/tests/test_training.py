"""Top-layer optimizers, gradients, and the least-squares oracle."""

import numpy as np
import pytest

from sparselab.models import (
    TopKRouting,
    dense_forward_batch,
    masked_features,
    new_dense_model,
    new_dsm_model,
)
from sparselab.rng import Stream
from sparselab.targets import Dataset
from sparselab.training import (
    OptimizerConfig,
    least_squares_oracle,
    mse,
    rmsprop_step,
    sup_error,
    top_layer_gradient,
    train,
)


def make_dataset(n, d, seed, target_fn=None):
    X = Stream(seed).uniforms(n * d).reshape(n, d) * 2 - 1
    if target_fn is None:
        y = np.sin(X.sum(axis=1))
    else:
        y = target_fn(X)
    return Dataset(inputs=X, targets=y, meta={})


def power_iteration_lmax(H, iters=200):
    """Spectral norm of a symmetric PSD matrix by plain power iteration."""
    v = np.ones(len(H)) / np.sqrt(len(H))
    for _ in range(iters):
        w = H @ v
        v = w / np.linalg.norm(w)
    return float(v @ H @ v)


def fd_gradient(F, top, y, step=1e-6):
    """Central finite differences of mean((F a - y)^2) in each coordinate."""
    grad = np.empty_like(top)
    for j in range(len(top)):
        hi = top.copy()
        lo = top.copy()
        hi[j] += step
        lo[j] -= step
        grad[j] = (np.mean((F @ hi - y) ** 2) - np.mean((F @ lo - y) ** 2)) / (2 * step)
    return grad


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------


def test_mse_worked_examples():
    assert mse(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert mse(np.array([0.0]), np.array([2.0])) == 4.0


def test_mse_permutation_invariant():
    p = Stream(1).normals(20)
    t = Stream(2).normals(20)
    perm = Stream(3).permutation(20)
    assert mse(p, t) == pytest.approx(mse(p[perm], t[perm]), rel=1e-15)


def test_sup_error_worked_examples():
    assert sup_error(np.array([0.1, -0.3]), np.zeros(2)) == 0.3
    assert sup_error(np.array([5.0, 5.0]), np.array([5.0, 5.0])) == 0.0


def test_sup_error_dominates_rms():
    p = Stream(4).normals(50)
    t = Stream(5).normals(50)
    assert sup_error(p, t) >= np.sqrt(mse(p, t))


def test_losses_reject_bad_shapes():
    with pytest.raises(ValueError):
        mse(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        sup_error(np.zeros(0), np.zeros(0))


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def test_gradient_scalar_worked_example():
    # one unit, one sample: A=2, phi=3, y=5 -> g=6, grad = 2*(6-5)*3 = 6
    model = new_dense_model(1, 1, "identity", seed=0)
    model.bottom = np.array([[3.0]])
    model.top = np.array([2.0])
    grad = top_layer_gradient(model, (np.array([[1.0]]), np.array([5.0])))
    assert grad == pytest.approx([6.0])


def test_gradient_zero_at_fit():
    model = new_dense_model(3, 5, "identity", seed=1)
    model.top = Stream(6).normals(5)
    X = Stream(7).uniforms(30).reshape(10, 3) * 2 - 1
    y = dense_forward_batch(model, X)
    assert np.max(np.abs(top_layer_gradient(model, (X, y)))) < 1e-14


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_matches_finite_differences(seed):
    d, t = 4, 12
    model = new_dsm_model(d, t, TopKRouting(4), activation="relu", seed=seed)
    model.top = Stream(20 + seed).normals(t)
    ds = make_dataset(30, d, seed=30 + seed)
    analytic = top_layer_gradient(model, ds)
    numeric = fd_gradient(masked_features(model, ds.inputs), model.top, ds.targets)
    denom = max(np.max(np.abs(numeric)), 1e-12)
    assert np.max(np.abs(analytic - numeric)) / denom < 1e-5


def test_gradient_zero_for_never_activated_units():
    d, t = 4, 16
    model = new_dsm_model(d, t, TopKRouting(2), activation="relu", seed=3)
    model.top = Stream(8).normals(t)
    ds = make_dataset(5, d, seed=9)
    masks = masked_features(model, ds.inputs) != 0.0
    idle = ~masks.any(axis=0)
    assert idle.any()  # 5 samples x 2 active can touch at most 10 of 16 units
    assert np.all(top_layer_gradient(model, ds)[idle] == 0.0)


def test_gradient_rejects_empty_batch():
    model = new_dense_model(2, 4, seed=0)
    with pytest.raises(ValueError):
        top_layer_gradient(model, (np.zeros((0, 2)), np.zeros(0)))


# ---------------------------------------------------------------------------
# rmsprop
# ---------------------------------------------------------------------------


def rms_config(lr=0.1):
    return OptimizerConfig(kind="rmsprop", learning_rate=lr, epochs=1)


def test_rmsprop_scalar_worked_example():
    v, delta = rmsprop_step(np.array([0.0]), np.array([1.0]), rms_config(lr=0.1))
    assert v == pytest.approx([0.1])
    assert delta == pytest.approx([-0.31623], abs=1e-5)


def test_rmsprop_zero_gradient_decays_state():
    v, delta = rmsprop_step(np.array([0.4]), np.array([0.0]), rms_config())
    assert v == pytest.approx([0.36])
    assert delta == pytest.approx([0.0])


def test_rmsprop_delta_opposes_gradient():
    g = Stream(10).normals(32)
    v, delta = rmsprop_step(np.abs(Stream(11).normals(32)), g, rms_config())
    nz = g != 0
    assert np.all(np.sign(delta[nz]) == -np.sign(g[nz]))
    assert np.all(v > 0)


def test_rmsprop_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        rmsprop_step(np.zeros(3), np.zeros(4), rms_config())


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------


def test_gd_descent_is_monotone_below_critical_step():
    d, t = 4, 24
    model = new_dsm_model(d, t, TopKRouting(6), activation="relu", seed=5)
    ds = make_dataset(200, d, seed=40)
    F = masked_features(model, ds.inputs)
    lmax = power_iteration_lmax((2.0 / len(F)) * (F.T @ F))
    config = OptimizerConfig(kind="gd", learning_rate=0.9 / lmax, epochs=30)
    history = train(model, ds, None, config)
    diffs = np.diff(history.train_mse)
    assert np.all(diffs <= 1e-15)


def test_zero_targets_zero_init_trains_flat():
    model = new_dense_model(3, 8, "relu", seed=6)
    ds = make_dataset(50, 3, seed=41, target_fn=lambda X: np.zeros(len(X)))
    history = train(model, ds, None, OptimizerConfig(kind="gd", learning_rate=0.1, epochs=5))
    assert history.train_mse == [0.0] * 5
    assert np.all(model.top == 0.0)


def test_training_updates_model_in_place_and_improves():
    d, t = 4, 16
    model = new_dsm_model(d, t, TopKRouting(4), activation="relu", seed=7)
    ds = make_dataset(300, d, seed=42)
    baseline = mse(np.zeros(300), ds.targets)
    history = train(model, ds, None, OptimizerConfig(kind="rmsprop", learning_rate=1e-2, epochs=20))
    assert history.train_mse[-1] < 0.5 * baseline
    assert np.any(model.top != 0.0)


def test_sgd_and_eval_history():
    d = 3
    model = new_dense_model(d, 12, "relu", seed=8)
    train_ds = make_dataset(128, d, seed=43)
    eval_ds = make_dataset(64, d, seed=44)
    config = OptimizerConfig(kind="sgd", learning_rate=0.05, epochs=8, batch_size=32, seed=2)
    history = train(model, train_ds, eval_ds, config)
    assert len(history.train_mse) == len(history.eval_mse) == len(history.wall_ms) == 8
    assert all(ev is not None and np.isfinite(ev) for ev in history.eval_mse)
    assert history.train_mse[-1] < history.train_mse[0]


def test_training_is_deterministic():
    d = 3

    def run():
        model = new_dense_model(d, 10, "relu", seed=9)
        ds = make_dataset(100, d, seed=45)
        config = OptimizerConfig(kind="rmsprop", learning_rate=1e-2, epochs=6, batch_size=16, seed=3)
        history = train(model, ds, None, config)
        return history.train_mse, model.top

    mse_a, top_a = run()
    mse_b, top_b = run()
    assert mse_a == mse_b
    assert np.array_equal(top_a, top_b)


def test_divergence_guard_trips():
    model = new_dense_model(3, 8, "relu", seed=10)
    ds = make_dataset(50, 3, seed=46)
    with pytest.raises(RuntimeError, match="diverged"):
        train(model, ds, None, OptimizerConfig(kind="gd", learning_rate=1e6, epochs=50))


def test_never_activated_units_never_move():
    d, t = 4, 32
    model = new_dsm_model(d, t, TopKRouting(2), activation="relu", seed=11)
    ds = make_dataset(8, d, seed=47)
    touched = (masked_features(model, ds.inputs) != 0.0).any(axis=0)
    assert not touched.all()
    train(model, ds, None, OptimizerConfig(kind="rmsprop", learning_rate=1e-2, epochs=10, batch_size=4))
    assert np.all(model.top[~touched] == 0.0)


def test_train_rejects_empty_datasets():
    model = new_dense_model(2, 4, seed=0)
    empty = Dataset(inputs=np.zeros((0, 2)), targets=np.zeros(0), meta={})
    ds = make_dataset(10, 2, seed=48)
    config = OptimizerConfig(kind="gd", learning_rate=0.1, epochs=1)
    with pytest.raises(ValueError):
        train(model, empty, None, config)
    with pytest.raises(ValueError):
        train(model, ds, empty, config)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(kind="adam", learning_rate=0.1, epochs=1)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="gd", learning_rate=0.0, epochs=1)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="gd", learning_rate=0.1, epochs=-1)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="sgd", learning_rate=0.1, epochs=1, batch_size=0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="rmsprop", learning_rate=0.1, epochs=1, rho=1.0)
    with pytest.raises(ValueError):
        OptimizerConfig(kind="rmsprop", learning_rate=0.1, epochs=1, delta=0.0)


def test_history_csv_shape():
    model = new_dense_model(2, 6, "relu", seed=12)
    ds = make_dataset(40, 2, seed=49)
    history = train(model, ds, None, OptimizerConfig(kind="gd", learning_rate=0.05, epochs=3))
    lines = history.to_csv().strip().split("\n")
    assert lines[0] == "epoch,train_mse,eval_mse,wall_ms"
    assert len(lines) == 4
    # eval column stays empty when no eval set was given
    assert lines[1].split(",")[2] == ""
    assert lines[1].split(",")[0] == "0"


# ---------------------------------------------------------------------------
# least-squares oracle
# ---------------------------------------------------------------------------


def test_oracle_single_unit_closed_form():
    model = new_dense_model(2, 1, "identity", seed=13)
    ds = make_dataset(60, 2, seed=50)
    phi = ds.inputs @ model.bottom[0]
    want = float(phi @ ds.targets) / float(phi @ phi)
    got = least_squares_oracle(model, ds)
    assert got == pytest.approx([want], rel=1e-8)


def test_oracle_residual_not_beaten_by_gd():
    d, t = 4, 16
    model = new_dsm_model(d, t, TopKRouting(4), activation="relu", seed=14)
    ds = make_dataset(200, d, seed=51)
    F = masked_features(model, ds.inputs)
    lmax = power_iteration_lmax((2.0 / len(F)) * (F.T @ F))
    train(model, ds, None, OptimizerConfig(kind="gd", learning_rate=0.9 / lmax, epochs=100))
    star = least_squares_oracle(model, ds)
    assert mse(F @ star, ds.targets) <= mse(F @ model.top, ds.targets) + 1e-12


def test_gd_from_zero_converges_to_oracle():
    # identity activation keeps the 64-unit Gram well conditioned
    d, t = 8, 64
    model = new_dense_model(d, t, "identity", seed=15)
    ds = make_dataset(512, d, seed=52)
    F = masked_features(model, ds.inputs)
    lmax = power_iteration_lmax((2.0 / len(F)) * (F.T @ F))
    train(model, ds, None, OptimizerConfig(kind="gd", learning_rate=1.0 / lmax, epochs=4000))
    star = least_squares_oracle(model, ds)
    assert np.max(np.abs(model.top - star)) <= 1e-3


def test_oracle_rejects_empty():
    model = new_dense_model(2, 4, seed=0)
    with pytest.raises(ValueError):
        least_squares_oracle(model, (np.zeros((0, 2)), np.zeros(0)))
