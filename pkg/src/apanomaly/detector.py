"""Histogram-based threshold detection.

A univariate histogram is built over a series; the mode bin is taken as
the normal mass and the scan walks outward until a bin falls below a
quarter of the mode frequency. That bin and everything farther out is
anomalous. The same rule runs on the HMM likelihood series (low tail),
and on each raw feature or PCA component series (both tails), whose
detections are unioned.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .features import FEATURE_NAMES, FeatureSeries
from .hmm import LikelihoodSeries
from .pca import PcaModel, transform

TAILS = ("low", "both")
METHOD_HMM = "hmm"
METHOD_RAW = "raw"
METHOD_PCA = "pca"


@dataclass(frozen=True)
class HistogramThresholdConfig:
    bin_count: int | None = None   # None = ceil(sqrt(N))
    mode_fraction: float = 0.25
    tails: str = "low"

    def validate(self) -> None:
        if self.bin_count is not None and self.bin_count < 2:
            raise ValidationError("detector.bin_count: must be >= 2 when explicit")
        if not 0.0 < self.mode_fraction < 1.0:
            raise ValidationError("detector.mode_fraction: must be in (0, 1)")
        if self.tails not in TAILS:
            raise ValidationError(f"detector.tails: must be one of {TAILS}")


DEFAULT_HMM_CONFIG = HistogramThresholdConfig(tails="low")
DEFAULT_SERIES_CONFIG = HistogramThresholdConfig(tails="both")


@dataclass(frozen=True)
class DetectionResult:
    method: str
    anomalous_slots: tuple[int, ...]
    per_series_detail: dict[str, tuple[int, ...]]
    config: HistogramThresholdConfig


def histogram_threshold(values, config: HistogramThresholdConfig | None = None) -> list[int]:
    """Indices of the samples in bins beyond the quarter-of-mode cut."""
    config = config or DEFAULT_HMM_CONFIG
    config.validate()
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 1:
        raise ValidationError("histogram_threshold: input must be one-dimensional")
    n = vals.shape[0]
    if n < 4:
        raise ValidationError("histogram_threshold: need at least 4 samples")
    if not np.isfinite(vals).all():
        raise ValidationError("histogram_threshold: values must be finite")
    vmin, vmax = float(vals.min()), float(vals.max())
    if vmin == vmax:
        return []
    bins = config.bin_count or math.ceil(math.sqrt(n))
    counts, edges = np.histogram(vals, bins=bins, range=(vmin, vmax))
    assign = np.clip(np.searchsorted(edges, vals, side="right") - 1, 0, bins - 1)

    mode_count = int(counts.max())
    median = float(np.median(vals))
    centers = 0.5 * (edges[:-1] + edges[1:])
    tied = np.flatnonzero(counts == mode_count)
    mode_bin = int(tied[np.argmin(np.abs(centers[tied] - median))])

    cutoff = config.mode_fraction * mode_count
    flagged_bins: set[int] = set()
    for b in range(mode_bin - 1, -1, -1):
        if counts[b] < cutoff:
            flagged_bins.update(range(0, b + 1))
            break
    if config.tails == "both":
        for b in range(mode_bin + 1, bins):
            if counts[b] < cutoff:
                flagged_bins.update(range(b, bins))
                break
    if not flagged_bins:
        return []
    mask = np.isin(assign, sorted(flagged_bins))
    return [int(i) for i in np.flatnonzero(mask)]


def detect_hmm(series: LikelihoodSeries,
               config: HistogramThresholdConfig | None = None) -> DetectionResult:
    """Low-likelihood slots of a scored run."""
    config = config or DEFAULT_HMM_CONFIG
    slots = histogram_threshold(series.values, config)
    return DetectionResult(method=METHOD_HMM, anomalous_slots=tuple(slots),
                           per_series_detail={"loglik": tuple(slots)}, config=config)


def detect_raw(features: FeatureSeries,
               config: HistogramThresholdConfig | None = None) -> DetectionResult:
    """Per-feature detection on the raw series, unioned across features."""
    config = config or DEFAULT_SERIES_CONFIG
    detail: dict[str, tuple[int, ...]] = {}
    union: set[int] = set()
    for idx, name in enumerate(FEATURE_NAMES):
        slots = histogram_threshold(features.matrix[:, idx], config)
        detail[name] = tuple(slots)
        union.update(slots)
    return DetectionResult(method=METHOD_RAW, anomalous_slots=tuple(sorted(union)),
                           per_series_detail=detail, config=config)


def detect_pca(features: FeatureSeries, pca_model: PcaModel,
               config: HistogramThresholdConfig | None = None) -> DetectionResult:
    """Per-component detection on the projected series, unioned."""
    config = config or DEFAULT_SERIES_CONFIG
    projected = transform(pca_model, features.matrix)
    detail: dict[str, tuple[int, ...]] = {}
    union: set[int] = set()
    for comp in range(projected.shape[1]):
        slots = histogram_threshold(projected[:, comp], config)
        detail[f"component_{comp}"] = tuple(slots)
        union.update(slots)
    return DetectionResult(method=METHOD_PCA, anomalous_slots=tuple(sorted(union)),
                           per_series_detail=detail, config=config)


def with_tails(config: HistogramThresholdConfig, tails: str) -> HistogramThresholdConfig:
    return replace(config, tails=tails)


def format_detection(result: DetectionResult) -> str:
    return json.dumps({
        "method": result.method,
        "anomalous_slots": list(result.anomalous_slots),
        "per_series_detail": {k: list(v) for k, v in result.per_series_detail.items()},
        "config": {
            "bin_count": result.config.bin_count,
            "mode_fraction": result.config.mode_fraction,
            "tails": result.config.tails,
        },
    }, indent=1) + "\n"


def parse_detection(text: str) -> DetectionResult:
    data = json.loads(text)
    try:
        cfg = HistogramThresholdConfig(
            bin_count=data["config"]["bin_count"],
            mode_fraction=data["config"]["mode_fraction"],
            tails=data["config"]["tails"])
        return DetectionResult(
            method=data["method"],
            anomalous_slots=tuple(int(s) for s in data["anomalous_slots"]),
            per_series_detail={k: tuple(int(s) for s in v)
                               for k, v in data["per_series_detail"].items()},
            config=cfg)
    except KeyError as exc:
        raise ValidationError(f"detection file: missing field {exc}") from exc
