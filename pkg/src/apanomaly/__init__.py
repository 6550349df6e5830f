"""Seeded WLAN access-point usage simulation and anomaly detection.

Pipeline: simulate session logs, aggregate per-AP per-slot features,
reduce with PCA, model normal behavior with a Gaussian-emission HMM, and
flag anomalous slots with a histogram quarter-of-mode threshold, compared
against raw-data and PCA baseline detectors.
"""

from .detector import (DetectionResult, HistogramThresholdConfig, detect_hmm,
                       detect_pca, detect_raw, histogram_threshold)
from .errors import ApAnomalyError, InternalError, NumericError, ValidationError
from .evaluate import (ExperimentSpec, ScoreSummary, compare_methods,
                       family_scenario, run_experiment, summarize)
from .features import FeatureSeries, FeatureVector, featurize
from .hmm import (GaussianHmm, LikelihoodSeries, TrainConfig, baum_welch,
                  emission_logdensity, forward_loglik, init_random, score_run,
                  viterbi)
from .pca import PcaModel, fit_pca, project, transform
from .session_sim import (AnomalySpec, FlowSpec, ScenarioSpec, SessionEvent,
                          SimParams, TopologySpec, TrafficPlan, ground_truth,
                          simulate)

__version__ = "0.1.0"

__all__ = [
    "ApAnomalyError", "ValidationError", "NumericError", "InternalError",
    "TopologySpec", "TrafficPlan", "FlowSpec", "AnomalySpec", "ScenarioSpec",
    "SimParams", "SessionEvent", "simulate", "ground_truth",
    "FeatureVector", "FeatureSeries", "featurize",
    "PcaModel", "fit_pca", "project", "transform",
    "GaussianHmm", "LikelihoodSeries", "TrainConfig", "init_random",
    "emission_logdensity", "forward_loglik", "viterbi", "baum_welch", "score_run",
    "HistogramThresholdConfig", "DetectionResult", "histogram_threshold",
    "detect_hmm", "detect_raw", "detect_pca",
    "ExperimentSpec", "ScoreSummary", "run_experiment", "summarize",
    "compare_methods", "family_scenario",
    "__version__",
]
