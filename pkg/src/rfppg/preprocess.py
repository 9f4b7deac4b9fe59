"""Signal conditioning: PPG cleanup, radio fusion/denoising, pairing.

The record-level pipeline mirrors the block diagram of the method:

  PPG:   artifact scan -> baseline removal -> 12th-order Butterworth LPF
         -> resample to 2000/11 Hz -> z-score -> 2.2 s segments
  radio: 16 equi-spaced subcarriers -> per-part PCA fusion -> 10-level
         db2 denoising -> resample -> z-score -> 2.2 s segments

followed by per-pair circular cross-correlation alignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, sosfiltfilt

from . import wavelet
from .errors import (
    DegenerateVariance,
    EmptyResult,
    LengthMismatch,
    NyquistViolation,
    ShapeMismatch,
)
from .series import (
    PROCESSED_RATE_HZ,
    SEGMENT_SECONDS,
    RealSeries,
    Segment,
    resample,
    segment,
    zscore,
)

N_SELECTED_SUBCARRIERS = 16
DEFAULT_KEEP_DETAIL_LEVELS = frozenset({5, 6, 7, 8})


@dataclass
class SubcarrierMatrix:
    """Per-symbol complex channel estimates; rows are subcarriers."""

    estimates: np.ndarray
    symbol_rate: float = 250.0

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=np.complex128)
        if self.estimates.ndim != 2:
            raise ShapeMismatch("estimates must be a 2-D matrix")
        if not self.symbol_rate > 0:
            raise ValueError("symbol_rate must be positive")
        if self.estimates.size and not np.all(np.isfinite(self.estimates)):
            raise ValueError("estimates contain NaN or Inf")

    @property
    def n_subcarriers(self) -> int:
        return self.estimates.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.estimates.shape[1]


@dataclass
class FusedRadioSeries:
    """Nonnegative fused radio magnitude series plus the fusion mode tag."""

    values: RealSeries
    mode: str  # "concat" | "complex-modulus"


@dataclass
class SegmentPair:
    """One aligned (radio, PPG) training unit of 400 + 400 samples."""

    radio: Segment
    ppg: Segment
    lag_applied: int
    record_id: str = ""
    index: int = 0


@dataclass
class ArtifactWindow:
    """A flagged fixed-length window of a record."""

    index: int
    start_s: float
    end_s: float
    peak_z: float


@dataclass
class PreprocessConfig:
    target_rate: float = PROCESSED_RATE_HZ
    seg_seconds: float = SEGMENT_SECONDS
    fuse_mode: str = "complex-modulus"
    dwt_levels: int = 10
    keep_detail_levels: frozenset = field(default_factory=lambda: DEFAULT_KEEP_DETAIL_LEVELS)
    lpf_order: int = 12
    lpf_fc_hz: float = 3.4
    baseline_max_hz: float = 0.2
    artifact_z_thresh: float = 6.0
    max_lag: int = 91


def select_subcarriers(m: SubcarrierMatrix) -> SubcarrierMatrix:
    """Keep 16 equi-spaced of the 64 subcarriers (rows 0, 4, ..., 60)."""
    if m.n_subcarriers != 64:
        raise ShapeMismatch(f"expected 64 subcarrier rows, got {m.n_subcarriers}")
    return SubcarrierMatrix(m.estimates[::4, :].copy(), m.symbol_rate)


def pca_first_component(x: np.ndarray) -> np.ndarray:
    """Score series of the leading principal component of the row variables.

    Rows are variables, columns are time. Covariance uses the population
    (1/N) convention. The eigenvector sign is fixed so that its
    largest-magnitude loading is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch("expected a 2-D matrix")
    n_var, n_t = x.shape
    if n_t <= n_var:
        raise ShapeMismatch(f"need more time samples ({n_t}) than variables ({n_var})")
    centered = x - x.mean(axis=1, keepdims=True)
    cov = (centered @ centered.T) / n_t
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[-1] <= 1e-12 * max(1.0, abs(eigvals).max(), np.abs(x).max() ** 2):
        raise DegenerateVariance("all variables are constant")
    leading = eigvecs[:, -1]
    if leading[np.argmax(np.abs(leading))] < 0:
        leading = -leading
    return leading @ centered


def pca_scores(m: SubcarrierMatrix) -> tuple[np.ndarray, np.ndarray]:
    """First-principal-component score series of the real and imaginary parts."""
    if m.n_subcarriers != N_SELECTED_SUBCARRIERS:
        raise ShapeMismatch(f"expected {N_SELECTED_SUBCARRIERS} rows, got {m.n_subcarriers}")
    return (pca_first_component(m.estimates.real),
            pca_first_component(m.estimates.imag))


def fuse_scores(xr: np.ndarray, xi: np.ndarray, mode: str, rate: float) -> FusedRadioSeries:
    """Combine the two score series into one nonnegative magnitude series.

    concat: |[xr; xi]| of length 2N (the literal formulation);
    complex-modulus: |xr + j*xi| of length N (default, keeps one sample
    per symbol so the timeline matches the PPG).
    """
    if xr.size != xi.size:
        raise LengthMismatch("real/imag score lengths differ")
    if mode == "concat":
        vals = np.abs(np.concatenate([xr, xi]))
    elif mode == "complex-modulus":
        vals = np.abs(xr + 1j * xi)
    else:
        raise ValueError(f"unknown fuse mode {mode!r}")
    return FusedRadioSeries(RealSeries(vals, rate), mode)


def pca_fuse(m: SubcarrierMatrix, mode: str = "complex-modulus") -> FusedRadioSeries:
    xr, xi = pca_scores(m)
    return fuse_scores(xr, xi, mode, m.symbol_rate)


def dwt_denoise(x: RealSeries, levels: int = 10,
                keep_detail_levels=DEFAULT_KEEP_DETAIL_LEVELS,
                keep_approximation: bool = False) -> RealSeries:
    """db2 band-pass denoising: zero every detail level outside the keep
    set and (by default) the deepest approximation, then reconstruct.
    """
    y = wavelet.band_reconstruct(x.samples, levels, keep_detail_levels,
                                 keep_approximation=keep_approximation)
    return RealSeries(y, x.rate)


def baseline_depth(rate: float, max_hz: float) -> int:
    """Smallest depth whose approximation band sits strictly below max_hz."""
    level = 1
    while rate / 2.0 ** (level + 1) >= max_hz:
        level += 1
    return level


def ppg_baseline_remove(x: RealSeries, max_baseline_hz: float = 0.2) -> RealSeries:
    """Subtract the db2 approximation whose band lies below max_baseline_hz."""
    depth = baseline_depth(x.rate, max_baseline_hz)
    baseline = wavelet.approximation_reconstruct(x.samples, depth)
    return RealSeries(x.samples - baseline, x.rate)


def butterworth_lpf(x: RealSeries, order: int = 12, fc_hz: float = 3.4) -> RealSeries:
    """Zero-phase (forward-backward) Butterworth low-pass as SOS cascade."""
    if x.rate <= 2.0 * fc_hz:
        raise NyquistViolation(f"rate {x.rate} Hz too low for fc {fc_hz} Hz")
    sos = butter(order, fc_hz, btype="low", fs=x.rate, output="sos")
    return RealSeries(sosfiltfilt(sos, x.samples), x.rate)


def artifact_scan(x: RealSeries, z_thresh: float = 6.0,
                  window_s: float = SEGMENT_SECONDS) -> list[ArtifactWindow]:
    """Flag fixed windows whose peak |z| over the whole record exceeds z_thresh."""
    if math.isinf(z_thresh):
        return []
    mu = float(np.mean(x.samples))
    sigma = float(np.std(x.samples))
    if sigma == 0.0:
        return []
    z = np.abs((x.samples - mu) / sigma)
    win = int(round(window_s * x.rate))
    flagged = []
    for k in range(len(x) // win):
        peak = float(z[k * win:(k + 1) * win].max())
        if peak > z_thresh:
            flagged.append(ArtifactWindow(k, k * win / x.rate, (k + 1) * win / x.rate, peak))
    return flagged


def align_segments(radio: Segment, ppg: Segment, max_lag: int = 91) -> tuple[Segment, int]:
    """Circularly shift the radio segment to maximize its normalized inner
    product with the PPG segment over lags in [-max_lag, +max_lag].

    A returned lag s means the radio content was advanced by s samples
    (np.roll by -s), i.e. s recovers a radio delayed by s. Ties go to the
    smallest |s|, negative first.
    """
    a = radio.samples
    b = ppg.samples
    if a.size != b.size:
        raise LengthMismatch(f"segment lengths differ: {a.size} vs {b.size}")
    if max_lag >= a.size // 2:
        raise ValueError(f"max_lag {max_lag} must be < length/2 = {a.size // 2}")
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0.0:
        return Segment(a.copy(), radio.origin_index, radio.duration_s), 0
    best_lag = 0
    best_score = -np.inf
    for s in sorted(range(-max_lag, max_lag + 1), key=lambda v: (abs(v), v)):
        score = float(np.dot(np.roll(a, -s), b)) / norm
        if score > best_score:
            best_score = score
            best_lag = s
    return (Segment(np.roll(a, -best_lag), radio.origin_index, radio.duration_s),
            best_lag)


def _radio_series(m: SubcarrierMatrix, cfg: PreprocessConfig) -> RealSeries:
    """Radio chain up to (and including) resampling to the common rate."""
    selected = select_subcarriers(m)
    xr, xi = pca_scores(selected)
    if cfg.fuse_mode == "complex-modulus":
        fused = fuse_scores(xr, xi, "complex-modulus", m.symbol_rate).values
        denoised = dwt_denoise(fused, cfg.dwt_levels, cfg.keep_detail_levels)
        return resample(denoised, cfg.target_rate)
    if cfg.fuse_mode == "concat":
        # Each magnitude half keeps its own timeline; denoise and resample
        # them separately, then recombine by root-sum-of-squares so the
        # result is one sample per instant again.
        halves = []
        for part in (np.abs(xr), np.abs(xi)):
            series = RealSeries(part, m.symbol_rate)
            denoised = dwt_denoise(series, cfg.dwt_levels, cfg.keep_detail_levels)
            halves.append(resample(denoised, cfg.target_rate).samples)
        n = min(h.size for h in halves)
        combined = np.sqrt(halves[0][:n] ** 2 + halves[1][:n] ** 2)
        return RealSeries(combined, cfg.target_rate)
    raise ValueError(f"unknown fuse mode {cfg.fuse_mode!r}")


def _ppg_series(x: RealSeries, cfg: PreprocessConfig) -> RealSeries:
    """PPG chain up to (and including) resampling to the common rate."""
    cleaned = ppg_baseline_remove(x, cfg.baseline_max_hz)
    filtered = butterworth_lpf(cleaned, cfg.lpf_order, cfg.lpf_fc_hz)
    return resample(filtered, cfg.target_rate)


def preprocess_record(radio_capture: SubcarrierMatrix, ppg_capture: RealSeries,
                      cfg: PreprocessConfig | None = None,
                      record_id: str = "") -> list[SegmentPair]:
    """Run both conditioning chains and return aligned segment pairs.

    Windows flagged by the artifact scan on the raw PPG are excluded; the
    flag grid and the output segment grid share the same 2.2 s spacing
    from t = 0, so flagged window k drops pair k.
    """
    cfg = cfg or PreprocessConfig()
    flagged = {w.index for w in artifact_scan(ppg_capture, cfg.artifact_z_thresh,
                                              cfg.seg_seconds)}
    ppg_segments = segment(zscore(_ppg_series(ppg_capture, cfg)), cfg.seg_seconds)
    radio_segments = segment(zscore(_radio_series(radio_capture, cfg)), cfg.seg_seconds)

    n_pairs = min(len(ppg_segments), len(radio_segments))
    pairs = []
    for k in range(n_pairs):
        if k in flagged:
            continue
        aligned, lag = align_segments(radio_segments[k], ppg_segments[k], cfg.max_lag)
        pairs.append(SegmentPair(radio=aligned, ppg=ppg_segments[k],
                                 lag_applied=lag, record_id=record_id, index=k))
    if not pairs:
        raise EmptyResult(f"record {record_id or '<unnamed>'}: all windows flagged or empty")
    return pairs
