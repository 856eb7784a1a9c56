"""Model specifications (the tuned hyperparameters) and training config."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidConfig


@dataclass
class RFSpec:
    n_trees: int = 187
    min_samples_leaf: int = 24

    kind = "rf"

    def validate(self):
        if not 10 <= self.n_trees <= 10_000:
            raise InvalidConfig(f"n_trees={self.n_trees}")
        if not 20 <= self.min_samples_leaf <= 50:
            raise InvalidConfig(f"min_samples_leaf={self.min_samples_leaf}")


@dataclass
class SVMSpec:
    alpha: float = 0.077  # L2 regularization strength

    kind = "svm"

    def validate(self):
        if not 0.0001 <= self.alpha <= 0.1:
            raise InvalidConfig(f"alpha={self.alpha}")


@dataclass
class FFNNSpec:
    h1: int = 75
    h2: int = 105
    h3: int = 95
    dropout3: float = 0.6

    kind = "ffnn"

    def validate(self):
        for name, hi in (("h1", 600), ("h2", 320), ("h3", 120)):
            v = getattr(self, name)
            if not 5 <= v <= hi:
                raise InvalidConfig(f"{name}={v}")
        if not 0.0 <= self.dropout3 <= 1.0:
            raise InvalidConfig(f"dropout3={self.dropout3}")


@dataclass
class CNNSpec:
    k1: int = 5
    k2: int = 59
    k3: int = 19
    h1: int = 260
    h2: int = 319
    h3: int = 101
    dropout3: float = 0.9

    kind = "cnn"

    def validate(self):
        for name in ("k1", "k2", "k3"):
            v = getattr(self, name)
            if not 5 <= v <= 60:
                raise InvalidConfig(f"{name}={v}")
        for name, hi in (("h1", 600), ("h2", 320), ("h3", 120)):
            v = getattr(self, name)
            if not 5 <= v <= hi:
                raise InvalidConfig(f"{name}={v}")
        if not 0.0 <= self.dropout3 <= 1.0:
            raise InvalidConfig(f"dropout3={self.dropout3}")


ModelSpec = RFSpec | SVMSpec | FFNNSpec | CNNSpec

SPEC_KINDS = {"rf": RFSpec, "svm": SVMSpec, "ffnn": FFNNSpec, "cnn": CNNSpec}


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    full_batch: bool = False  # literal "updated after each epoch" reading
    learning_rate: float = 1e-3  # Adam defaults
    seed: int = 0
    mc_passes: int = 50

    def validate(self):
        if self.epochs < 1:
            raise InvalidConfig(f"epochs={self.epochs}")
        if self.mc_passes < 1:
            raise InvalidConfig(f"mc_passes={self.mc_passes}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size={self.batch_size}")
