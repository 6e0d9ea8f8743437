"""Seeded training loop (Adam), rolling evaluation, gradient verification.

Same seed means the same init draws, the same shuffles and therefore
bit-identical parameters on one platform; that determinism is part of the
contract, not an accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..preprocess import WindowedDataset
from .autodiff import Tape, Tensor, gaussian_nll, mse, no_grad
from .config import NeuralConfig
from .models import KINDS, deepar_step, forward_point, init_params


class TrainingError(RuntimeError):
    """Raised when the loss goes non-finite mid-training."""


class Adam:
    """Adaptive moment estimation over a parameter dict."""

    def __init__(self, params: dict, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for key, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            m = self.m[key]
            v = self.v[key]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p.data -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None


@dataclass(frozen=True, eq=False)
class TrainedForecaster:
    kind: str
    params: dict
    config: NeuralConfig
    train_loss_curve: np.ndarray

    def __post_init__(self):
        if len(self.train_loss_curve) != self.config.epochs:
            raise TrainingError("loss curve length must equal epochs")


def _batch_loss(kind: str, X: np.ndarray, y: np.ndarray, params: dict) -> Tensor:
    target = y[:, None]
    if kind == "DEEPAR":
        mu, sigma = deepar_step(X, params)
        return gaussian_nll(mu, sigma, target)
    return mse(forward_point(kind, X, params), target)


def train(kind: str, windows: WindowedDataset, cfg: NeuralConfig) -> TrainedForecaster:
    """Train one forecaster for cfg.epochs of shuffled mini-batches.

    Loss is MSE (Gaussian NLL for DeepAR); the returned curve holds the
    per-window mean loss of every epoch.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    inputs, targets = windows.inputs, windows.targets
    n = len(targets)
    if n == 0:
        raise TrainingError("no training windows")
    if windows.window_len != cfg.window:
        raise TrainingError(
            f"windows were framed with w={windows.window_len}, config says {cfg.window}"
        )

    rng = np.random.default_rng(cfg.seed)
    params = init_params(kind, cfg, rng)
    opt = Adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
               cfg.adam_eps)

    curve = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            with Tape() as tape:
                loss = _batch_loss(kind, inputs[idx], targets[idx], params)
                value = float(loss.data)
                if not math.isfinite(value):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch} (kind {kind})"
                    )
                tape.backward(loss)
            opt.step()
            opt.zero_grad()
            epoch_total += value * len(idx)
        curve[epoch] = epoch_total / n
    return TrainedForecaster(kind, params, cfg, curve)


def predict_point(model: TrainedForecaster, windows,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Point predictions for a batch of windows, shape (B,).

    DeepAR predictions are the median of config.deepar_samples Gaussian
    draws, so they need the caller's seeded generator.
    """
    with no_grad():
        if model.kind == "DEEPAR":
            if rng is None:
                raise ValueError("DeepAR prediction needs a seeded generator")
            mu, sigma = deepar_step(windows, model.params)
            draws = (mu.data[:, :]
                     + sigma.data[:, :]
                     * rng.standard_normal((mu.data.shape[0],
                                            model.config.deepar_samples)))
            return np.median(draws, axis=1)
        out = forward_point(model.kind, windows, model.params)
    return out.data[:, 0]


def rolling_forecast_neural(model: TrainedForecaster, history,
                            test, seed: int | None = None) -> np.ndarray:
    """One-step rolling forecast: each step sees the last w true values."""
    history = np.asarray(history, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    w = model.config.window
    if len(history) < w:
        raise ValueError(f"history of {len(history)} points is shorter than "
                         f"the window ({w})")
    rng = np.random.default_rng(model.config.seed if seed is None else seed)
    context = np.concatenate([history, test])
    start = len(history)
    preds = np.empty(len(test))
    for i in range(len(test)):
        window = context[start + i - w: start + i]
        preds[i] = predict_point(model, window, rng=rng)[0]
    return preds


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_err: float
    n_checked: int
    worst_param: str

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_err < tolerance


def gradient_check(loss_fn, params: dict, eps: float = 1e-5,
                   max_checks: int = 10_000, seed: int = 0) -> GradCheckReport:
    """Compare reverse-mode gradients with central finite differences.

    Checks every parameter element, or a seeded subsample when the model has
    more than max_checks of them. loss_fn takes no arguments and evaluates
    the loss from `params` as a Tensor.
    """
    with Tape() as tape:
        loss = loss_fn()
        tape.backward(loss)
    grads = {k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
             for k, p in params.items()}
    for p in params.values():
        p.grad = None

    total = sum(p.data.size for p in params.values())
    rng = np.random.default_rng(seed)

    worst = 0.0
    worst_param = ""
    checked = 0
    for key, p in params.items():
        flat = p.data.reshape(-1)
        size = flat.size
        if total > max_checks:
            take = max(1, int(round(max_checks * size / total)))
            idx = rng.choice(size, size=min(take, size), replace=False)
        else:
            idx = np.arange(size)
        g_flat = grads[key].reshape(-1)
        for j in idx:
            orig = flat[j]
            flat[j] = orig + eps
            with no_grad():
                up = float(loss_fn().data)
            flat[j] = orig - eps
            with no_grad():
                down = float(loss_fn().data)
            flat[j] = orig
            fd = (up - down) / (2.0 * eps)
            a = g_flat[j]
            rel = abs(a - fd) / max(abs(a), abs(fd), 1e-5)
            checked += 1
            if rel > worst:
                worst = rel
                worst_param = f"{key}[{j}]"
    return GradCheckReport(max_rel_err=worst, n_checked=checked,
                           worst_param=worst_param)


CHECKPOINT_FORMAT_VERSION = 1


def forecaster_to_record(model: TrainedForecaster) -> dict:
    """Versioned flat checkpoint: kind, config, parameter tensors."""
    from dataclasses import asdict
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "kind": model.kind,
        "config": asdict(model.config),
        "params": {
            k: {"shape": list(p.data.shape), "data": p.data.reshape(-1).tolist()}
            for k, p in model.params.items()
        },
        "train_loss_curve": model.train_loss_curve.tolist(),
    }


def forecaster_from_record(record: dict) -> TrainedForecaster:
    if record.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format "
                         f"{record.get('format_version')!r}")
    cfg = NeuralConfig(**record["config"])
    params = {
        k: Tensor(np.array(spec["data"]).reshape(spec["shape"]))
        for k, spec in record["params"].items()
    }
    return TrainedForecaster(record["kind"], params, cfg,
                             np.asarray(record["train_loss_curve"]))


def loss_curve_csv(model: TrainedForecaster) -> str:
    lines = ["epoch,loss"]
    for i, v in enumerate(model.train_loss_curve):
        lines.append(f"{i},{v!r}")
    return "\n".join(lines) + "\n"
