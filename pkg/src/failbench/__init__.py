"""Failure-prediction benchmarking over reading/prediction window grids."""

__version__ = "0.1.0"

from .errors import FailbenchError, ValidationError
from .timeseries import (AlertLog, DatasetProfile, RawSeries, RegularSeries, compute_ttf, minmax_normalize,
                         precursor_diversity, profile_dataset, resample_locf, spectral_entropy)
from .sessions import MovementSpec, SessionMap, compute_sessions, session_spans, whole_dataset_session
from .windows import LabeledWindow, WindowSpec, count_support, extract_windows, flatten_features
from .balance import ClassWeights, RusInstance, class_weights, exclude_overlap, random_undersample
from .metrics import ConfusionMatrix, MetricsReport, confusion, report

__all__ = [
    "__version__", "FailbenchError", "ValidationError",
    "AlertLog", "DatasetProfile", "RawSeries", "RegularSeries", "compute_ttf", "minmax_normalize",
    "precursor_diversity", "profile_dataset", "resample_locf", "spectral_entropy",
    "MovementSpec", "SessionMap", "compute_sessions", "session_spans", "whole_dataset_session",
    "LabeledWindow", "WindowSpec", "count_support", "extract_windows", "flatten_features",
    "ClassWeights", "RusInstance", "class_weights", "exclude_overlap", "random_undersample",
    "ConfusionMatrix", "MetricsReport", "confusion", "report",
]
