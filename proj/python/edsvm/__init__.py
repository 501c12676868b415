import json

from ._core import (
    InvalidArgument,
    Model,
    SolverError,
    _check_calibration,
    _diagnose,
    _metrics,
    bayes_accuracy,
    benchmark_guide,
    calibration_threshold,
    cli,
    fit,
    gram,
    roc_auc,
    simulate_dataset,
)

__all__ = [
    "InvalidArgument",
    "Model",
    "SolverError",
    "bayes_accuracy",
    "benchmark_guide",
    "calibration_threshold",
    "check_calibration",
    "cli",
    "diagnose",
    "fit",
    "gram",
    "metrics",
    "roc_auc",
    "simulate_dataset",
]


def metrics(scores, y, threshold=0.0):
    return json.loads(_metrics(scores, y, threshold))


def check_calibration(elite, targets, omega, model="cedsvm"):
    return json.loads(_check_calibration(elite, targets, omega, model))


def diagnose(X, y, elite, targets, **kwargs):
    return json.loads(_diagnose(X, y, elite, targets, **kwargs))
