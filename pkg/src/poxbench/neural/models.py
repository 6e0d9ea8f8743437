"""LSTM, GRU, N-BEATS and DeepAR forward passes.

The recurrent trunks are fused tape primitives: the whole window unroll is
one tape entry whose backward replays the cached gate activations in
reverse (classic BPTT). All forward functions take a (batch, window) array
and return (batch, 1) tensors; a single 1-D window is promoted to a batch
of one.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels as _k
from .autodiff import (
    Tensor,
    _rec,
    accumulate,
    add,
    linear,
    relu,
    shift,
    softplus,
    sub,
)
from .config import NeuralConfig

KINDS = ("LSTM", "GRU", "NBEATS", "DEEPAR")

SIGMA_FLOOR = 1e-6


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    k = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-k, k, size=shape)


def _init_lstm_trunk(params: dict, rng, hidden: int) -> None:
    # fused gate blocks, column order (input, forget, output, cell)
    params["wx"] = Tensor(_uniform(rng, (1, 4 * hidden), 1))
    params["wh"] = Tensor(_uniform(rng, (hidden, 4 * hidden), hidden))
    params["b"] = Tensor(_uniform(rng, (4 * hidden,), hidden))


def init_params(kind: str, cfg: NeuralConfig, rng: np.random.Generator) -> dict:
    """Seeded uniform(-k, k) parameters, k = 1/sqrt(fan-in), fixed draw order."""
    hidden, w = cfg.hidden_size, cfg.window
    params: dict[str, Tensor] = {}
    if kind == "LSTM":
        _init_lstm_trunk(params, rng, hidden)
        params["head_w"] = Tensor(_uniform(rng, (hidden, 1), hidden))
        params["head_b"] = Tensor(_uniform(rng, (1,), hidden))
    elif kind == "GRU":
        # fused (reset, update) block plus the candidate block
        params["wx_rz"] = Tensor(_uniform(rng, (1, 2 * hidden), 1))
        params["wh_rz"] = Tensor(_uniform(rng, (hidden, 2 * hidden), hidden))
        params["b_rz"] = Tensor(_uniform(rng, (2 * hidden,), hidden))
        params["wx_n"] = Tensor(_uniform(rng, (1, hidden), 1))
        params["wh_n"] = Tensor(_uniform(rng, (hidden, hidden), hidden))
        params["b_n"] = Tensor(_uniform(rng, (hidden,), hidden))
        params["head_w"] = Tensor(_uniform(rng, (hidden, 1), hidden))
        params["head_b"] = Tensor(_uniform(rng, (1,), hidden))
    elif kind == "NBEATS":
        width = cfg.nbeats_layer_width
        for i in range(cfg.nbeats_n_blocks):
            pre = f"blk{i}_"
            dims = [w, width, width, width, width]
            for layer in range(4):
                fan = dims[layer]
                params[pre + f"l{layer}_w"] = Tensor(
                    _uniform(rng, (fan, dims[layer + 1]), fan))
                params[pre + f"l{layer}_b"] = Tensor(
                    _uniform(rng, (dims[layer + 1],), fan))
            params[pre + "back_w"] = Tensor(_uniform(rng, (width, w), width))
            params[pre + "back_b"] = Tensor(_uniform(rng, (w,), width))
            params[pre + "fore_w"] = Tensor(_uniform(rng, (width, 1), width))
            params[pre + "fore_b"] = Tensor(_uniform(rng, (1,), width))
    elif kind == "DEEPAR":
        _init_lstm_trunk(params, rng, hidden)
        params["mu_w"] = Tensor(_uniform(rng, (hidden, 1), hidden))
        params["mu_b"] = Tensor(_uniform(rng, (1,), hidden))
        params["sigma_w"] = Tensor(_uniform(rng, (hidden, 1), hidden))
        params["sigma_b"] = Tensor(_uniform(rng, (1,), hidden))
    else:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    return params


def count_params(params: dict) -> int:
    return sum(t.data.size for t in params.values())


def lstm_trunk(X: np.ndarray, wx: Tensor, wh: Tensor, b: Tensor) -> Tensor:
    """Unroll an LSTM over X (B, w); returns the final hidden state (B, H).

    The input sequence is data, not a differentiation target, so only the
    three weight tensors receive gradients.
    """
    X = np.ascontiguousarray(X)
    HS, CS, ACT, HC = _k.lstm_fwd(X, wx.data[0], wh.data, b.data)
    out = Tensor(HS[-1])

    def bw():
        gh = out.grad
        if gh is None:
            return
        dwx, dwh, db = _k.lstm_bwd(X, wh.data, np.ascontiguousarray(gh),
                                   HS, CS, ACT, HC)
        accumulate(wx, dwx[None, :])
        accumulate(wh, dwh)
        accumulate(b, db)

    _rec(bw)
    return out


def gru_trunk(X: np.ndarray, wx_rz: Tensor, wh_rz: Tensor, b_rz: Tensor,
              wx_n: Tensor, wh_n: Tensor, b_n: Tensor) -> Tensor:
    """Unroll a GRU over X (B, w); returns the final hidden state (B, H)."""
    X = np.ascontiguousarray(X)
    HS, RZ, N, RH = _k.gru_fwd(X, wx_rz.data[0], wh_rz.data, b_rz.data,
                               wx_n.data[0], wh_n.data, b_n.data)
    out = Tensor(HS[-1])

    def bw():
        gh = out.grad
        if gh is None:
            return
        dwx_rz, dwh_rz, db_rz, dwx_n, dwh_n, db_n = _k.gru_bwd(
            X, wh_rz.data, wh_n.data, np.ascontiguousarray(gh), HS, RZ, N, RH)
        accumulate(wx_rz, dwx_rz[None, :])
        accumulate(wh_rz, dwh_rz)
        accumulate(b_rz, db_rz)
        accumulate(wx_n, dwx_n[None, :])
        accumulate(wh_n, dwh_n)
        accumulate(b_n, db_n)

    _rec(bw)
    return out


def _as_batch(windows) -> np.ndarray:
    X = np.asarray(windows, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    return X


def lstm_forward(windows, params: dict) -> Tensor:
    """Scalar next-step prediction per window, shape (B, 1)."""
    h = lstm_trunk(_as_batch(windows), params["wx"], params["wh"], params["b"])
    return linear(h, params["head_w"], params["head_b"])


def gru_forward(windows, params: dict) -> Tensor:
    h = gru_trunk(_as_batch(windows), params["wx_rz"], params["wh_rz"],
                  params["b_rz"], params["wx_n"], params["wh_n"], params["b_n"])
    return linear(h, params["head_w"], params["head_b"])


def _nbeats_n_blocks(params: dict) -> int:
    n = 0
    while f"blk{n}_l0_w" in params:
        n += 1
    return n


def nbeats_forward(windows, params: dict) -> tuple[Tensor, Tensor]:
    """Generic (identity-basis) N-BEATS.

    Each block runs a 4-layer ReLU trunk on the running residual, emits a
    backcast (subtracted from the residual) and a forecast (summed). Returns
    (final residual, forecast sum of shape (B, 1)).
    """
    X = _as_batch(windows)
    residual = Tensor(X)
    forecast = None
    for i in range(_nbeats_n_blocks(params)):
        pre = f"blk{i}_"
        hdn = residual
        for layer in range(4):
            hdn = relu(linear(hdn, params[pre + f"l{layer}_w"],
                              params[pre + f"l{layer}_b"]))
        backcast = linear(hdn, params[pre + "back_w"], params[pre + "back_b"])
        fore = linear(hdn, params[pre + "fore_w"], params[pre + "fore_b"])
        residual = sub(residual, backcast)
        forecast = fore if forecast is None else add(forecast, fore)
    return residual, forecast


def deepar_step(windows, params: dict) -> tuple[Tensor, Tensor]:
    """Gaussian parameters (mu, sigma) for the next step; sigma > 0 always."""
    h = lstm_trunk(_as_batch(windows), params["wx"], params["wh"], params["b"])
    mu = linear(h, params["mu_w"], params["mu_b"])
    sigma = shift(softplus(linear(h, params["sigma_w"], params["sigma_b"])),
                  SIGMA_FLOOR)
    return mu, sigma


def forward_point(kind: str, windows, params: dict) -> Tensor:
    """The point-prediction tensor used for MSE training/inference."""
    if kind == "LSTM":
        return lstm_forward(windows, params)
    if kind == "GRU":
        return gru_forward(windows, params)
    if kind == "NBEATS":
        return nbeats_forward(windows, params)[1]
    if kind == "DEEPAR":
        return deepar_step(windows, params)[0]
    raise ValueError(f"unknown model kind {kind!r}")
