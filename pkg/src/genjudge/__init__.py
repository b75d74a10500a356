"""Score graph generative models by how well a graphlet-kernel SVM tells
their output apart from target graphs."""

__version__ = "0.1.0"

from .classifier import CvConfig, cross_validate, predict, stratified_folds, train_svm
from .evaluator import (
    EvaluationConfig,
    compare_generators,
    error_score,
    evaluate_generator,
)
from .generators import GeneratorSpec, sample_fake_set
from .graph import Dataset, Graph, Label, RngSeed, load_dataset, parse_edge_list, serialize_edge_list
from .graphlets import build_catalog, count_exact, feature_vector

__all__ = [
    "CvConfig",
    "Dataset",
    "EvaluationConfig",
    "GeneratorSpec",
    "Graph",
    "Label",
    "RngSeed",
    "build_catalog",
    "compare_generators",
    "count_exact",
    "cross_validate",
    "error_score",
    "evaluate_generator",
    "feature_vector",
    "load_dataset",
    "parse_edge_list",
    "predict",
    "sample_fake_set",
    "serialize_edge_list",
    "stratified_folds",
    "train_svm",
]
