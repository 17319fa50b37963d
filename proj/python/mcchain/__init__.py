"""Classifier chains with Monte Carlo order search and inference."""

from ._mcchain import (
    ArgumentError,
    Dataset,
    IntractableError,
    MethodSpec,
    Model,
    ParseError,
    StructuralError,
    __version__,
    cross_validate,
    fit,
    load_dataset,
    model_from_json,
    save_dataset,
    search_order,
)

METHODS = ("ic", "cc", "pcc", "mcc", "mscc", "pmscc", "ptmscc")

__all__ = [
    "ArgumentError",
    "Dataset",
    "IntractableError",
    "METHODS",
    "MethodSpec",
    "Model",
    "ParseError",
    "StructuralError",
    "__version__",
    "cross_validate",
    "fit",
    "load_dataset",
    "model_from_json",
    "save_dataset",
    "search_order",
]
