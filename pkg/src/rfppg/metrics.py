"""Evaluation helpers: correlation and heart-rate extraction."""

from __future__ import annotations

import numpy as np


def pearson_r(a, b) -> float:
    """Pearson correlation; 0.0 when either input has zero variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ac = a - a.mean()
    bc = b - b.mean()
    denom = np.sqrt(np.sum(ac ** 2) * np.sum(bc ** 2))
    if denom == 0.0:
        return 0.0
    return float(np.dot(ac, bc) / denom)


def detect_peaks(x, rate: float, height_frac: float = 0.5,
                 min_spacing_s: float = 0.3) -> np.ndarray:
    """Local maxima above height_frac of the segment maximum, greedily
    thinned to the given minimum spacing (strongest peaks win)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 3 or x.max() <= 0:
        return np.array([], dtype=int)
    interior = (x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])
    candidates = np.where(interior)[0] + 1
    candidates = candidates[x[candidates] >= height_frac * x.max()]
    if candidates.size == 0:
        return candidates
    min_gap = int(round(min_spacing_s * rate))
    kept: list[int] = []
    for idx in candidates[np.argsort(-x[candidates], kind="stable")]:
        if all(abs(idx - k) >= min_gap for k in kept):
            kept.append(int(idx))
    return np.array(sorted(kept), dtype=int)


def estimate_hr_bpm(x, rate: float) -> float | None:
    """Heart rate from mean peak-to-peak interval; None with < 2 peaks."""
    peaks = detect_peaks(x, rate)
    if peaks.size < 2:
        return None
    mean_interval = float(np.mean(np.diff(peaks))) / rate
    if mean_interval <= 0:
        return None
    return 60.0 / mean_interval
