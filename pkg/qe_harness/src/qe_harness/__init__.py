"""Desk-scale harness for training a reference-free QE regressor on
src,mt,score exports and evaluating it through the annotation pipeline's
correlation tooling."""

from .data import Example, SchemaError, load_csv
from .harness import CorrelationReport, TrainResult, TrainSpec, predict_and_correlate, train

__all__ = [
    "CorrelationReport",
    "Example",
    "SchemaError",
    "TrainResult",
    "TrainSpec",
    "load_csv",
    "predict_and_correlate",
    "train",
]

__version__ = "0.1.0"
