"""From-scratch neural forecasters on a minimal reverse-mode core."""

from .autodiff import Tape, Tensor, no_grad
from .config import NeuralConfig
from .models import (
    deepar_step,
    gru_forward,
    init_params,
    lstm_forward,
    nbeats_forward,
)
from .training import (
    Adam,
    TrainedForecaster,
    gradient_check,
    rolling_forecast_neural,
    train,
)

__all__ = [
    "Adam",
    "NeuralConfig",
    "Tape",
    "Tensor",
    "TrainedForecaster",
    "deepar_step",
    "gradient_check",
    "gru_forward",
    "init_params",
    "lstm_forward",
    "nbeats_forward",
    "no_grad",
    "rolling_forecast_neural",
    "train",
]
