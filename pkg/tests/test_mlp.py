import math

import numpy as np
import pytest

from aging_forecast.errors import DimensionMismatchError, TrainingDivergedError
from aging_forecast.mlp import (MlpModel, MlpTopology, TrainConfig, dumps_model, evaluate_rmse,
                                forward, gradient, init_model, loads_model, train)
from aging_forecast.preprocess import LagDataset

from .oracles import central_difference, mlp_loss


def dataset(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    return LagDataset(X, y, X.shape[1], 1, np.arange(y.size))


def one_one(v=2.0, c=0.0, out="identity"):
    return MlpModel.from_arrays(MlpTopology(1, 1, output_activation=out), [[0.0]], [0.0], [v], c)


@pytest.mark.parametrize("topo,count", [((6, 7), 57), ((3, 4), 21), ((4, 2), 13)])
def test_parameter_count(topo, count):
    m = init_model(MlpTopology(*topo), seed=1)
    assert m.params.size == count
    assert m.hidden_weights.shape == (topo[1], topo[0])


def test_init_deterministic_and_bounded():
    t = MlpTopology(6, 7)
    a, b = init_model(t, 99), init_model(t, 99)
    assert a.params.tobytes() == b.params.tobytes()
    assert init_model(t, 100) != a
    assert np.all(np.abs(a.hidden_weights) <= 1 / math.sqrt(6))
    assert np.all(np.abs(a.output_weights) <= 1 / math.sqrt(7))
    assert not a.hidden_biases.any() and a.output_bias == 0.0


def test_forward_zero_network(backend):
    m = MlpModel(MlpTopology(3, 2), np.zeros(MlpTopology(3, 2).n_params))
    assert forward(m, [1.0, -4.0, 9.0]) == 0.0


def test_forward_hand_evaluated(backend):
    for x in (-3.0, 0.0, 12.5):
        assert forward(one_one(), [x]) == 1.0


def test_forward_sigmoid_output_in_unit_interval(backend, rng):
    topo = MlpTopology(4, 3, output_activation="sigmoid")
    for _ in range(50):
        m = MlpModel(topo, rng.normal(scale=5, size=topo.n_params))
        y = forward(m, rng.normal(scale=5, size=4))
        assert 0.0 < y < 1.0


def test_forward_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        forward(init_model(MlpTopology(3, 2), 0), [1.0, 2.0])


def test_gradient_zero_at_target(backend):
    m = init_model(MlpTopology(3, 4), 5)
    x = [0.1, 0.5, 0.9]
    g = gradient(m, x, forward(m, x))
    assert not g.params.any()


def test_gradient_output_bias_by_hand(backend):
    # y = 2*sigmoid(0) = 1, identity output: dL/dc = (y - t) * 1
    g = gradient(one_one(), [0.3], 0.25)
    assert g.output_bias == pytest.approx(0.75, abs=1e-15)
    assert g.output_weights[0] == pytest.approx(0.75 * 0.5, abs=1e-15)
    # sigmoid output: u = 1, y = s(1), dL/dc = (y - t) * y * (1 - y)
    g = gradient(one_one(out="sigmoid"), [0.3], 0.25)
    y = 1 / (1 + math.exp(-1.0))
    assert g.output_bias == pytest.approx((y - 0.25) * y * (1 - y), abs=1e-15)


def test_gradient_matches_finite_differences(backend, rng):
    cases = 0
    for d in range(3, 8):
        for h in range(2, 8):
            for out in ("identity", "sigmoid"):
                topo = MlpTopology(d, h, output_activation=out)
                m = MlpModel(topo, rng.normal(scale=0.8, size=topo.n_params))
                x = rng.uniform(-0.2, 1.2, size=d)
                t = rng.uniform(0, 1)
                g = gradient(m, x, t).params
                fd = central_difference(m.params, d, h, out == "sigmoid", x, t)
                assert np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(g))) < 1e-4
                cases += 1
    assert cases >= 60


def test_train_learns_constant(backend, rng):
    X = rng.uniform(0, 1, size=(200, 3))
    y = np.full(200, 0.7)
    m, _ = train(init_model(MlpTopology(3, 2), 3), dataset(X, y), dataset(X[:50], y[:50]),
                 TrainConfig())
    assert np.max(np.abs(m.predict_batch(X) - 0.7)) < 1e-3


def test_train_descends_with_small_rate(rng):
    X = rng.uniform(0, 1, size=(50, 2))
    y = 0.3 * X[:, 0] - 0.2 * X[:, 1] + 0.4
    ok = 0
    for seed in range(20):
        _, trace = train(init_model(MlpTopology(2, 3), seed), dataset(X, y), None,
                         TrainConfig(learning_rate=1e-3, max_epochs=50, patience=0, seed=seed))
        ok += trace.train_rmse[-1] <= trace.train_rmse[0]
    assert ok >= 19


def test_train_epoch_count_without_patience(rng):
    X = rng.uniform(size=(20, 3))
    _, trace = train(init_model(MlpTopology(3, 2), 0), dataset(X, X[:, 0]), dataset(X, X[:, 0]),
                     TrainConfig(max_epochs=5, patience=0))
    assert trace.epochs == 5 == len(trace.validation_rmse)


def test_train_returns_best_snapshot_and_is_deterministic(backend, rng):
    X = rng.uniform(size=(80, 4))
    y = np.sin(3 * X.sum(axis=1))
    tr, va = dataset(X[:60], y[:60]), dataset(X[60:], y[60:])
    cfg = TrainConfig(learning_rate=0.2, max_epochs=60, patience=0, seed=11)
    m0 = init_model(MlpTopology(4, 3), 2)
    m1, t1 = train(m0, tr, va, cfg)
    m2, t2 = train(m0, tr, va, cfg)
    assert m1.params.tobytes() == m2.params.tobytes()
    assert t1.validation_rmse == t2.validation_rmse
    assert evaluate_rmse(m1, va) == pytest.approx(min(t1.validation_rmse), rel=1e-12)
    assert all(evaluate_rmse(m1, va) <= v + 1e-15 for v in t1.validation_rmse)


def test_unshuffled_training_replays_manual_sgd(rng):
    X = rng.uniform(size=(30, 3))
    y = X.mean(axis=1)
    perm = rng.permutation(30)
    lr = 0.1
    model = init_model(MlpTopology(3, 2), 4)
    manual = model.params.copy()
    for _ in range(3):
        model, _ = train(model, dataset(X[perm], y[perm]), None,
                         TrainConfig(learning_rate=lr, max_epochs=1, patience=0,
                                     shuffle_each_epoch=False))
        for k in perm:
            manual -= lr * gradient(MlpModel(model.topology, manual), X[k], y[k]).params
    assert np.allclose(model.params, manual, rtol=0, atol=1e-14)


def test_train_aborts_on_non_finite():
    X = np.ones((4, 2))
    with pytest.raises(TrainingDivergedError) as exc:
        train(init_model(MlpTopology(2, 2), 0), dataset(X, np.full(4, 1e300)), None,
              TrainConfig(max_epochs=3))
    assert exc.value.epoch == 0


def test_train_rejects_bad_datasets():
    m = init_model(MlpTopology(3, 2), 0)
    with pytest.raises(ValueError):
        train(m, dataset(np.empty((0, 3)), []), None)
    with pytest.raises(DimensionMismatchError):
        train(m, dataset(np.ones((4, 2)), np.ones(4)), None)


def test_serialization_round_trip_bit_exact(rng):
    topo = MlpTopology(6, 7, output_activation="sigmoid")
    m = MlpModel(topo, rng.normal(size=topo.n_params) * 1e-3 ** rng.integers(0, 3, topo.n_params))
    text = dumps_model(m, {"scaler_min": 0.1, "scaler_max": 123.456})
    back, extra = loads_model(text)
    assert back.topology == topo
    assert back.params.tobytes() == m.params.tobytes()
    assert extra == {"scaler_min": 0.1, "scaler_max": 123.456}
    assert "hidden_weights[6,5]=" in text and text.startswith("#")


def test_mlp_loss_oracle_agrees_with_forward(rng):
    topo = MlpTopology(3, 3)
    m = MlpModel(topo, rng.normal(size=topo.n_params))
    x = rng.normal(size=3)
    assert mlp_loss(m.params, 3, 3, False, x, 0.0) == pytest.approx(0.5 * forward(m, x) ** 2,
                                                                      rel=1e-12)
