"""Decision-threshold calibration for scored knowledge-graph triples."""

from ._threshcal import (
    Classifier,
    ConvergenceError,
    Dataset,
    DegenerateLabels,
    Error,
    InputError,
    IoError,
    NumericalError,
    ParseError,
    ScoredTriple,
    ThresholdMap,
    calibrate,
    density_scores,
    estimate_threshold,
    evaluate,
    fit_classifier,
    load_dataset,
    load_thresholds,
    parse_dataset,
    run_trial,
    select,
    sweep,
    synthetic,
)

__all__ = [
    "Classifier",
    "ConvergenceError",
    "Dataset",
    "DegenerateLabels",
    "Error",
    "InputError",
    "IoError",
    "NumericalError",
    "ParseError",
    "ScoredTriple",
    "ThresholdMap",
    "calibrate",
    "density_scores",
    "estimate_threshold",
    "evaluate",
    "fit_classifier",
    "load_dataset",
    "load_thresholds",
    "parse_dataset",
    "run_trial",
    "select",
    "sweep",
    "synthetic",
]
