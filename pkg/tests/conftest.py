import numpy as np
import pytest

from sdgzsl import SyntheticSpec, TrainConfig, generate_synthetic, train
from sdgzsl.mlp import backward, init_params, mse_loss
from sdgzsl.rng import SplitMix64

BENCH_SPEC = SyntheticSpec(
    n_seen_classes=10,
    n_unseen_classes=3,
    feature_dim=32,
    semantic_dim=16,
    per_class_train=50,
    per_class_test=20,
    cluster_spread=0.05,
    seed=7,
)


def sample_gradcheck_case(seed: int):
    """Random small architecture + batch whose hidden preactivations stay
    clear of the ReLU kink, so central differences are trustworthy."""
    chooser = np.random.default_rng(seed)
    for attempt in range(200):
        d = int(chooser.integers(2, 7))
        s = int(chooser.integers(1, 5))
        depth = int(chooser.integers(0, 3))
        hidden = [int(chooser.integers(2, 7)) for _ in range(depth)]
        n = int(chooser.integers(1, 9))
        params = init_params(d, hidden, s, SplitMix64(seed * 1000 + attempt))
        xs = chooser.normal(size=(n, d))
        zs = chooser.normal(size=(n, s))
        h = xs
        safe = True
        for k, (w, b, act) in enumerate(zip(params.weights, params.biases, params.activations)):
            pre = h @ w.T + b
            if act == "relu" and np.abs(pre).min() < 1e-3:
                safe = False
                break
            h = np.maximum(pre, 0.0) if act == "relu" else pre
        if safe:
            return params, xs, zs
    raise RuntimeError("could not sample a kink-free gradcheck case")


def max_gradient_relative_error(params, xs, zs, h=1e-5) -> float:
    """Central finite differences against the analytic gradient, worst case
    over every parameter."""
    gw, gb = backward(params, xs, zs)
    worst = 0.0
    for arrays, grads in ((params.weights, gw), (params.biases, gb)):
        for arr, grad in zip(arrays, grads):
            flat, gflat = arr.ravel(), grad.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = mse_loss(params, xs, zs)
                flat[i] = orig - h
                down = mse_loss(params, xs, zs)
                flat[i] = orig
                fd = (up - down) / (2.0 * h)
                rel = abs(fd - gflat[i]) / max(1e-6, abs(fd) + abs(gflat[i]))
                worst = max(worst, rel)
    return worst


@pytest.fixture(scope="session")
def bench_dataset():
    return generate_synthetic(BENCH_SPEC)


@pytest.fixture(scope="session")
def bench_mapper(bench_dataset):
    params, history = train(bench_dataset, TrainConfig())
    return params, history


@pytest.fixture(scope="session")
def noiseless_dataset():
    spec = SyntheticSpec(10, 3, 32, 16, 50, 20, 0.0, seed=11)
    return generate_synthetic(spec)


@pytest.fixture()
def np_rng():
    return np.random.default_rng(20260809)
