"""Per-AP, per-slot feature extraction from session logs.

Each slot yields a 7-vector: three density attributes (distinct users,
active sessions, summed association time) and four usage attributes
(octets and packets per direction). Session counters are prorated
uniformly over the session lifetime, so the featurizer needs nothing
beyond the log itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .session_sim import SessionEvent

FEATURE_NAMES = ("user_count", "session_count", "connection_duration",
                 "input_octets", "output_octets", "input_packets", "output_packets")
FEATURE_DIM = len(FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    user_count: float
    session_count: float
    connection_duration: float
    input_octets: float
    output_octets: float
    input_packets: float
    output_packets: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=float)


@dataclass(frozen=True)
class FeatureSeries:
    """Gap-free slot-indexed feature rows for one AP."""

    ap_id: int
    slot_length_s: float
    matrix: np.ndarray  # (T, 7)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def vector(self, slot: int) -> FeatureVector:
        return FeatureVector(*self.matrix[slot])

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, FEATURE_NAMES.index(name)]


def featurize(events: list[SessionEvent], ap_id: int,
              slot_length_s: float, run_duration_s: float) -> FeatureSeries:
    """Aggregate a session log into per-slot features for one AP.

    Usage counters are attributed to slots proportionally to the overlap
    between the slot and the session interval.
    """
    if slot_length_s <= 0 or run_duration_s <= 0:
        raise ValidationError("featurize: slot length and run duration must be > 0")
    n_slots = run_duration_s / slot_length_s
    if abs(n_slots - round(n_slots)) > 1e-9:
        raise ValidationError("featurize: run duration must be a multiple of the slot length")
    T = int(round(n_slots))
    matrix = np.zeros((T, FEATURE_DIM))
    users: list[set[int]] = [set() for _ in range(T)]

    for e in events:
        if not (0 <= e.start_s < e.end_s <= run_duration_s):
            raise ValidationError(
                f"featurize: session [{e.start_s}, {e.end_s}) outside [0, {run_duration_s}]")
        if e.ap_id != ap_id:
            continue
        length = e.end_s - e.start_s
        first = int(e.start_s // slot_length_s)
        last = min(int(np.ceil(e.end_s / slot_length_s)) - 1, T - 1)
        for slot in range(first, last + 1):
            lo = slot * slot_length_s
            hi = lo + slot_length_s
            overlap = min(e.end_s, hi) - max(e.start_s, lo)
            if overlap <= 0:
                continue
            frac = overlap / length
            users[slot].add(e.station_id)
            matrix[slot, 1] += 1.0
            matrix[slot, 2] += overlap
            matrix[slot, 3] += e.input_octets * frac
            matrix[slot, 4] += e.output_octets * frac
            matrix[slot, 5] += e.input_packets * frac
            matrix[slot, 6] += e.output_packets * frac

    for slot in range(T):
        matrix[slot, 0] = len(users[slot])
    return FeatureSeries(ap_id=ap_id, slot_length_s=slot_length_s, matrix=matrix)


# -- feature matrix I/O ---------------------------------------------------------


def format_feature_matrix(series: FeatureSeries) -> str:
    lines = [",".join(("slot_index",) + FEATURE_NAMES)]
    for i, row in enumerate(series.matrix):
        lines.append(",".join([str(i)] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def parse_feature_matrix(text: str, ap_id: int = 0,
                         slot_length_s: float = 15.0) -> FeatureSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",") != list(("slot_index",) + FEATURE_NAMES):
        raise ValidationError("feature matrix: missing or malformed header row")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != FEATURE_DIM + 1:
            raise ValidationError(f"feature matrix: bad row {ln!r}")
        rows.append([float(x) for x in parts[1:]])
    return FeatureSeries(ap_id=ap_id, slot_length_s=slot_length_s,
                         matrix=np.array(rows, dtype=float).reshape(len(rows), FEATURE_DIM))
