from .api import (
    TrainedModel,
    accuracy,
    grad_check,
    load_model,
    mc_dropout_accuracy,
    predict_proba,
    save_history,
    save_model,
    train,
)
from .dataset import Dataset
from .specs import CNNSpec, FFNNSpec, ModelSpec, RFSpec, SVMSpec, TrainConfig

__all__ = [
    "CNNSpec", "Dataset", "FFNNSpec", "ModelSpec", "RFSpec", "SVMSpec",
    "TrainConfig", "TrainedModel", "accuracy", "grad_check", "load_model",
    "mc_dropout_accuracy", "predict_proba", "save_history", "save_model",
    "train",
]
