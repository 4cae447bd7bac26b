"""Hashtag recommendation with correlation-weighted matrix factorization."""

from .correlation import WeightMatrix, build_weight_matrix, corr
from .factorization import FactorModel, TrainConfig, predict, recommend, train
from .ingest import (
    CooccurrenceMatrix,
    InteractionDataset,
    UserHashtagMatrix,
    build_matrices,
    parse_tweets,
    read_tweets,
)
from .synth import SynthParams, generate
from .stats import consistency_test, welch_t_test

__version__ = "0.1.0"

__all__ = [
    "CooccurrenceMatrix",
    "FactorModel",
    "InteractionDataset",
    "SynthParams",
    "TrainConfig",
    "UserHashtagMatrix",
    "WeightMatrix",
    "build_matrices",
    "build_weight_matrix",
    "consistency_test",
    "corr",
    "generate",
    "parse_tweets",
    "predict",
    "read_tweets",
    "recommend",
    "train",
    "welch_t_test",
]
