"""From-scratch classifiers behind a common train/predict contract."""
from .base import (FLAT, SEQUENCE, Algorithm, ModelSpec, TrainedModel, available_algorithms, fit,
                   get_algorithm, load_model, predict, register, save_model, train_raw)
from .losses import LossConfig, bce_loss, sigmoid, sigmoid_f1_loss
from .logreg import train_logreg
from .forest import train_rf
from .svm import train_svm
from .lstm import train_lstm

__all__ = [
    "FLAT", "SEQUENCE", "Algorithm", "ModelSpec", "TrainedModel", "LossConfig",
    "available_algorithms", "fit", "get_algorithm", "load_model", "predict", "register", "save_model",
    "train_raw", "bce_loss", "sigmoid", "sigmoid_f1_loss",
    "train_logreg", "train_rf", "train_svm", "train_lstm",
]
