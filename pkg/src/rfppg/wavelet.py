"""Multilevel db2 wavelet transform with periodized boundaries.

One wavelet family serves both the radio denoising and the PPG baseline
estimation. The transform wraps at the boundaries (odd lengths are
edge-padded by one sample per level, and the pad is dropped again on
synthesis), which keeps the filter bank orthonormal and reconstruction
exact to machine precision for any input length.

Level numbering follows the usual dyadic convention: level j detail
covers roughly [fs / 2**(j+1), fs / 2**j].
"""

from __future__ import annotations

import numpy as np

from .errors import InputTooShort

_SQRT3 = np.sqrt(3.0)
# Daubechies-2 orthonormal scaling filter and its quadrature mirror.
DB2_LO = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (4.0 * np.sqrt(2.0))
DB2_HI = np.array([DB2_LO[3], -DB2_LO[2], DB2_LO[1], -DB2_LO[0]])


def _analysis_step(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    n = x.size
    pad = n % 2
    if pad:
        x = np.concatenate([x, x[-1:]])
    half = x.size // 2
    idx = (2 * np.arange(half)[:, None] + np.arange(4)[None, :]) % x.size
    windows = x[idx]
    return windows @ DB2_LO, windows @ DB2_HI, pad


def _synthesis_step(approx: np.ndarray, detail: np.ndarray, pad: int) -> np.ndarray:
    n = 2 * approx.size
    x = np.zeros(n)
    base = 2 * np.arange(approx.size)
    for m in range(4):
        np.add.at(x, (base + m) % n, approx * DB2_LO[m] + detail * DB2_HI[m])
    return x[:-1] if pad else x


def wavedec(x: np.ndarray, levels: int) -> tuple[np.ndarray, list[np.ndarray], list[int]]:
    """Decompose x into (approximation, [detail level 1..levels], pads)."""
    x = np.asarray(x, dtype=np.float64)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if x.size < 2 ** levels:
        raise InputTooShort(f"need at least {2 ** levels} samples for {levels} levels, got {x.size}")
    approx = x
    details = []
    pads = []
    for _ in range(levels):
        approx, detail, pad = _analysis_step(approx)
        details.append(detail)
        pads.append(pad)
    return approx, details, pads


def waverec(approx: np.ndarray, details: list[np.ndarray], pads: list[int]) -> np.ndarray:
    """Inverse of wavedec; exact up to float rounding."""
    x = np.asarray(approx, dtype=np.float64)
    for detail, pad in zip(reversed(details), reversed(pads)):
        x = _synthesis_step(x, np.asarray(detail, dtype=np.float64), pad)
    return x


def band_reconstruct(x: np.ndarray, levels: int,
                     keep_detail_levels,
                     keep_approximation: bool = False) -> np.ndarray:
    """Reconstruct keeping only the selected detail levels.

    Detail levels outside keep_detail_levels are zeroed, as is the
    deepest approximation unless keep_approximation is set. Output has
    the input's length.
    """
    approx, details, pads = wavedec(x, levels)
    keep = set(keep_detail_levels)
    if not keep_approximation:
        approx = np.zeros_like(approx)
    kept_details = [d if (j + 1) in keep else np.zeros_like(d)
                    for j, d in enumerate(details)]
    return waverec(approx, kept_details, pads)


def approximation_reconstruct(x: np.ndarray, levels: int) -> np.ndarray:
    """Reconstruct only the level-`levels` approximation (all details zeroed)."""
    approx, details, pads = wavedec(x, levels)
    return waverec(approx, [np.zeros_like(d) for d in details], pads)
