"""Core series types and the shared numeric operations of the pipeline.

Everything downstream trades in uniformly sampled 1-D signals with an
explicit sample rate. Z-scoring uses the population (1/N) standard
deviation so that the operation is exactly idempotent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.signal import firwin, resample_poly

from .errors import DegenerateVariance, EmptyInput, LengthMismatch, SegmentTooLong

# Common processed rate: 2.2 s segments come out to exactly 400 samples.
PROCESSED_RATE_HZ = 2000.0 / 11.0
SEGMENT_SECONDS = 2.2
SEGMENT_SAMPLES = 400

# Polyphase resampler: windowed-sinc prototype, Kaiser window.
RESAMPLE_KAISER_BETA = 8.0
RESAMPLE_TAPS_PER_PHASE = 64


@dataclass
class RealSeries:
    """Uniformly sampled real signal with a sample rate in Hz."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("samples must be 1-D")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.rate


@dataclass
class ComplexSeries:
    """Uniformly sampled complex signal with a sample rate in Hz."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ValueError("samples must be 1-D")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.rate


@dataclass
class Segment:
    """Fixed-length slice of a parent series (400 samples canonically)."""

    samples: np.ndarray
    origin_index: int = 0
    duration_s: float = field(default=SEGMENT_SECONDS)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    def __len__(self):
        return self.samples.size


def zscore(x: RealSeries) -> RealSeries:
    """Z-score normalize: subtract mean, divide by population std.

    Raises EmptyInput for fewer than 2 samples and DegenerateVariance
    for constant input.
    """
    if len(x) < 2:
        raise EmptyInput(f"z-score needs at least 2 samples, got {len(x)}")
    mu = float(np.mean(x.samples))
    sigma = float(np.sqrt(np.mean((x.samples - mu) ** 2)))
    if sigma == 0.0:
        raise DegenerateVariance("constant input has zero variance")
    return RealSeries((x.samples - mu) / sigma, x.rate)


def segment(x: RealSeries, seg_seconds: float = SEGMENT_SECONDS) -> list[Segment]:
    """Cut the series into non-overlapping segments of seg_seconds.

    The segment length is round(seg_seconds * rate) samples; any trailing
    remainder is dropped (padding would fabricate signal content).
    """
    L = int(round(seg_seconds * x.rate))
    if L < 2:
        raise EmptyInput(f"segment length {L} too short")
    n = len(x)
    if L > n:
        raise SegmentTooLong(f"segment length {L} exceeds series length {n}")
    out = []
    for k in range(n // L):
        out.append(Segment(x.samples[k * L:(k + 1) * L].copy(),
                           origin_index=k * L,
                           duration_s=L / x.rate))
    return out


def _rational_ratio(target_rate: float, in_rate: float) -> tuple[int, int]:
    frac = Fraction(target_rate / in_rate).limit_denominator(1_000_000)
    return frac.numerator, frac.denominator


def resample(x: RealSeries, target_rate: float) -> RealSeries:
    """Polyphase windowed-sinc resampling to target_rate.

    Kaiser-windowed sinc prototype (beta=8, 64 taps per phase); the
    rational rate ratio is recovered with limit_denominator so that e.g.
    250 -> 2000/11 Hz maps to up=8, down=11 exactly. Output length is
    ceil(n * up / down), which keeps the duration within one output
    sample of the input duration.
    """
    if not target_rate > 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if len(x) == 0:
        raise EmptyInput("cannot resample an empty series")
    if math.isclose(target_rate, x.rate, rel_tol=1e-12):
        return RealSeries(x.samples.copy(), target_rate)
    up, down = _rational_ratio(target_rate, x.rate)
    # Odd tap count keeps the prototype symmetric about an integer of the
    # upsampled grid (resample_poly handles the up-gain internally).
    numtaps = RESAMPLE_TAPS_PER_PHASE * up + 1
    cutoff = min(1.0 / up, 1.0 / down)
    h = firwin(numtaps, cutoff, window=("kaiser", RESAMPLE_KAISER_BETA))
    y = resample_poly(x.samples, up, down, window=h)
    return RealSeries(y, target_rate)


def mae(a, b) -> float:
    """Mean absolute error between two equal-length 1-D sequences."""
    av = a.samples if isinstance(a, (Segment, RealSeries)) else np.asarray(a, dtype=np.float64)
    bv = b.samples if isinstance(b, (Segment, RealSeries)) else np.asarray(b, dtype=np.float64)
    if av.size != bv.size:
        raise LengthMismatch(f"lengths differ: {av.size} vs {bv.size}")
    return float(np.mean(np.abs(av - bv)))
