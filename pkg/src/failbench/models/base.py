"""Uniform train/predict contract, algorithm registry and model serialization.

Every algorithm registers an :class:`Algorithm` entry: a trainer that maps
standardized features to a dict of parameter arrays, and a predictor that maps
parameters plus features to failure probabilities and labels. New model
families plug in through :func:`register` without touching the protocol.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch, SingleClassInput, ValidationError

FLAT = "flat"
SEQUENCE = "sequence"


@dataclass(frozen=True)
class Algorithm:
    name: str
    train: object
    predict: object
    layout: str
    defaults: dict = field(default_factory=dict)
    required: tuple = ()
    needs_both_classes: bool = True


_REGISTRY = {}


def register(algorithm):
    _REGISTRY[algorithm.name] = algorithm
    return algorithm


def get_algorithm(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown algorithm {name!r}; known: {sorted(_REGISTRY)}") from None


def available_algorithms():
    return sorted(_REGISTRY)


@dataclass(frozen=True)
class ModelSpec:
    algorithm: str
    hyperparams: dict = field(default_factory=dict)
    seed: int = 0

    def resolved(self):
        """Hyperparameters with algorithm defaults filled in, validated."""
        algo = get_algorithm(self.algorithm)
        unknown = set(self.hyperparams) - set(algo.defaults) - set(algo.required)
        if unknown:
            raise ValidationError(f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}")
        missing = [k for k in algo.required if k not in self.hyperparams]
        if missing:
            raise ValidationError(f"{self.algorithm}: missing hyperparameters {missing}")
        return {**algo.defaults, **self.hyperparams}


@dataclass(eq=False)
class TrainedModel:
    """A fitted predictor.

    ``input_shape`` is the per-sample shape seen at training, before any
    flattening. ``mean``/``scale`` hold the standardization statistics (``None``
    when the caller supplied already-standardized features).
    """

    spec: ModelSpec
    parameters: dict
    feature_layout: str
    input_shape: tuple
    mean: np.ndarray = None
    scale: np.ndarray = None
    info: dict = field(default_factory=dict)

    def prepare(self, features):
        x = np.asarray(features, dtype=float)
        if x.shape[1:] != tuple(self.input_shape):
            raise ShapeMismatch(f"expected samples of shape {tuple(self.input_shape)}, got {x.shape[1:]}")
        if self.feature_layout == FLAT:
            x = x.reshape(x.shape[0], -1)
        if self.mean is not None:
            x = (x - self.mean) / self.scale
        return x


def check_binary(y, both=True):
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be 0/1")
    if both and np.unique(y).size < 2:
        raise SingleClassInput("training labels contain a single class")
    return y


def standardization(x, axis):
    mean = x.mean(axis=axis)
    std = x.std(axis=axis)
    return mean, np.where(std > 0, std, 1.0)


def fit(spec, features, labels, class_weights=None):
    """Standardize ``features`` with their own statistics, then train ``spec``.

    ``features`` is ``(M, S_RW, V)`` for windowed data or ``(M, D)``. Flat
    algorithms see the row-major flattening standardized per feature; sequence
    algorithms see the tensor standardized per variable.
    """
    algo = get_algorithm(spec.algorithm)
    x = np.asarray(features, dtype=float)
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValidationError("need at least two samples")
    y = check_binary(labels, both=algo.needs_both_classes)
    shape = x.shape[1:]
    if algo.layout == FLAT:
        x = x.reshape(x.shape[0], -1)
        mean, scale = standardization(x, 0)
    else:
        if x.ndim == 2:
            x = x[:, :, None]
            shape = x.shape[1:]
        mean, scale = standardization(x.reshape(-1, x.shape[-1]), 0)
    xs = (x - mean) / scale
    params, info = algo.train(xs, y, spec.seed, class_weights=class_weights, **spec.resolved())
    return TrainedModel(spec, params, algo.layout, tuple(shape), mean, scale, info)


def train_raw(spec, features, labels, class_weights=None):
    """Train on features used as given (no standardization)."""
    algo = get_algorithm(spec.algorithm)
    x = np.asarray(features, dtype=float)
    y = check_binary(labels, both=algo.needs_both_classes)
    shape = x.shape[1:]
    if algo.layout == FLAT:
        x = x.reshape(x.shape[0], -1)
    params, info = algo.train(x, y, spec.seed, class_weights=class_weights, **spec.resolved())
    return TrainedModel(spec, params, algo.layout, tuple(shape), None, None, info)


def predict(model, features):
    """Failure probability in [0, 1] and the thresholded 0/1 label per sample."""
    algo = get_algorithm(model.spec.algorithm)
    x = model.prepare(features)
    proba, label = algo.predict(model.parameters, x, **model.spec.resolved())
    return np.asarray(proba, dtype=float), np.asarray(label, dtype=np.int64)


def save_model(model, file):
    """Write a self-describing ``.npz`` record of ``model`` to a path or binary file."""
    meta = {
        "algorithm": model.spec.algorithm,
        "hyperparams": model.spec.hyperparams,
        "seed": model.spec.seed,
        "feature_layout": model.feature_layout,
        "input_shape": list(model.input_shape),
        "parameters": sorted(model.parameters),
        "standardized": model.mean is not None,
        "info": model.info,
    }
    arrays = {f"param__{k}": np.asarray(v) for k, v in model.parameters.items()}
    if model.mean is not None:
        arrays["scaler__mean"] = model.mean
        arrays["scaler__scale"] = model.scale
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    np.savez(file, **arrays)


def load_model(file):
    with np.load(file, allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        params = {k: data[f"param__{k}"] for k in meta["parameters"]}
        mean = data["scaler__mean"] if meta["standardized"] else None
        scale = data["scaler__scale"] if meta["standardized"] else None
    spec = ModelSpec(meta["algorithm"], meta["hyperparams"], meta["seed"])
    return TrainedModel(spec, params, meta["feature_layout"], tuple(meta["input_shape"]), mean, scale,
                        meta["info"])


def model_bytes(model):
    buf = io.BytesIO()
    save_model(model, buf)
    return buf.getvalue()
