"""Hyperparameters shared by all neural forecasters."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class NeuralConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    window: int = 52
    batch_size: int = 32
    hidden_size: int = 32
    seed: int = 0
    nbeats_stacks: int = 2
    nbeats_blocks_per_stack: int = 2
    nbeats_layer_width: int = 64
    deepar_samples: int = 100

    def __post_init__(self):
        for name in ("epochs", "window", "batch_size", "hidden_size",
                     "nbeats_stacks", "nbeats_blocks_per_stack",
                     "nbeats_layer_width", "deepar_samples"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def nbeats_n_blocks(self) -> int:
        return self.nbeats_stacks * self.nbeats_blocks_per_stack

    def replace(self, **kwargs) -> "NeuralConfig":
        from dataclasses import replace as _replace
        return _replace(self, **kwargs)
