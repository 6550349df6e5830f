"""Delimiter-separated plot data plus small hand-rolled SVG renderings.

SVGs are written directly (no plotting library) so output trees are
byte-identical across runs.
"""

from __future__ import annotations

from .detector import DetectionResult
from .evaluate import METHODS, QUANTILE_STATS, ScoreSummary
from .hmm import LikelihoodSeries

_W, _H, _PAD = 640, 320, 40


def _scale(values, lo, hi, out_lo, out_hi):
    if hi == lo:
        return [0.5 * (out_lo + out_hi) for _ in values]
    return [out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo) for v in values]


def _svg(body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n'
            f'<rect width="{_W}" height="{_H}" fill="white"/>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def format_series_markers(series: LikelihoodSeries, detection: DetectionResult) -> str:
    """Rows of slot, log-likelihood and a 0/1 detection marker."""
    detected = set(detection.anomalous_slots)
    lines = ["slot_index,loglik,detected"]
    for i, v in enumerate(series.values):
        lines.append(f"{i},{float(v)!r},{1 if i in detected else 0}")
    return "\n".join(lines) + "\n"


def render_series_svg(series: LikelihoodSeries, detection: DetectionResult) -> str:
    values = [float(v) for v in series.values]
    lo, hi = min(values), max(values)
    xs = _scale(range(len(values)), 0, max(len(values) - 1, 1), _PAD, _W - _PAD)
    ys = _scale(values, lo, hi, _H - _PAD, _PAD)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    body = [f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>']
    for slot in detection.anomalous_slots:
        body.append(f'<circle cx="{xs[slot]:.2f}" cy="{ys[slot]:.2f}" r="4" '
                    f'fill="none" stroke="crimson" stroke-width="1.5"/>')
    body.append(f'<text x="{_PAD}" y="{_H - 8}" font-size="11" fill="black">'
                f'slot 0..{len(values) - 1}, log-likelihood in [{lo:.2f}, {hi:.2f}], '
                f'{len(detection.anomalous_slots)} detected</text>')
    return _svg(body)


def format_boxplot_data(summary: ScoreSummary) -> str:
    """Exactly five quantile rows per method/metric pair.

    Quantiles use the nearest-rank definition; whiskers are min/max.
    """
    lines = ["# quantiles: nearest-rank; whiskers: min/max; "
             "precision of an empty detection set is 1.0",
             "family,method,metric,stat,value"]
    for metric in ("precision", "recall"):
        for method in METHODS:
            stats = summary.quantiles[metric][method]
            for stat in QUANTILE_STATS:
                value = stats[stat]
                text = "n/a" if value is None else repr(float(value))
                lines.append(f"{summary.family},{method},{metric},{stat},{text}")
    return "\n".join(lines) + "\n"


def render_boxplot_svg(summary: ScoreSummary) -> str:
    body = []
    groups = [(metric, method) for metric in ("precision", "recall") for method in METHODS]
    slot_w = (_W - 2 * _PAD) / len(groups)
    for gi, (metric, method) in enumerate(groups):
        stats = summary.quantiles[metric][method]
        cx = _PAD + slot_w * (gi + 0.5)
        if stats["median"] is None:
            body.append(f'<text x="{cx - 10:.2f}" y="{_H / 2:.2f}" font-size="10">n/a</text>')
            continue
        ys = {k: _H - _PAD - (_H - 2 * _PAD) * float(v) for k, v in stats.items()}
        half = slot_w * 0.25
        body.append(f'<line x1="{cx:.2f}" y1="{ys["min"]:.2f}" x2="{cx:.2f}" '
                    f'y2="{ys["max"]:.2f}" stroke="black" stroke-width="1"/>')
        body.append(f'<rect x="{cx - half:.2f}" y="{min(ys["q3"], ys["q1"]):.2f}" '
                    f'width="{2 * half:.2f}" height="{abs(ys["q1"] - ys["q3"]):.2f}" '
                    f'fill="lightsteelblue" stroke="black" stroke-width="1"/>')
        body.append(f'<line x1="{cx - half:.2f}" y1="{ys["median"]:.2f}" '
                    f'x2="{cx + half:.2f}" y2="{ys["median"]:.2f}" '
                    f'stroke="crimson" stroke-width="2"/>')
        body.append(f'<text x="{cx - half:.2f}" y="{_H - _PAD + 14}" font-size="9">'
                    f'{method}</text>')
        body.append(f'<text x="{cx - half:.2f}" y="{_H - _PAD + 26}" font-size="9">'
                    f'{metric[:4]}</text>')
    body.append(f'<text x="{_PAD}" y="{_PAD - 14}" font-size="11">{summary.family}: '
                f'precision and recall, scale 0..1</text>')
    return _svg(body)


def boxplot_quantile_rows(summary: ScoreSummary) -> int:
    data = format_boxplot_data(summary)
    return sum(1 for ln in data.splitlines() if ln and not ln.startswith(("#", "family,")))
