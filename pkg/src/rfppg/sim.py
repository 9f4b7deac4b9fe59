"""Physics-based stand-in for the SDR hardware and the private dataset.

Generates paired (radio capture, reference PPG) records. The transmit
side sends QPSK-loaded OFDM symbols; the channel carries a few static
multipath components plus one chest path whose phase is modulated by
chest displacement, phi(t) = 4*pi*d(t)/lambda (two-way reflective path).
Chest displacement couples a respiration sinusoid with a cardiac term
that follows the normalized ground-truth PPG, so end-to-end
reconstruction has a well-defined target.

DFT convention: forward DFT unnormalized, inverse DFT carries 1/N
(numpy's default), used consistently on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRange, RateMismatch, ShapeMismatch
from .preprocess import SubcarrierMatrix
from .series import ComplexSeries, RealSeries

SPEED_OF_LIGHT = 299_792_458.0

QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass
class OfdmConfig:
    """Baseband OFDM layout: 64 subcarriers + 16-sample CP at 20 kS/s."""

    n_subcarriers: int = 64
    cp_len: int = 16
    sample_rate: float = 20_000.0
    center_freq: float = 5.24e9
    modulation: str = "qpsk"

    def __post_init__(self):
        if self.cp_len >= self.n_subcarriers:
            raise ValueError("cp_len must be smaller than n_subcarriers")

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def symbol_rate(self) -> float:
        # 80 samples per symbol at 20 kS/s -> 250 symbols/s.
        return self.sample_rate / self.symbol_len

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.center_freq


@dataclass
class ChestKinematics:
    """Chest-wall displacement model driving the reflected-path phase."""

    cardiac_amp: float = 0.5e-3
    resp_amp: float = 5e-3
    resp_rate: float = 0.25
    resp_phase: float = 0.0
    ppg_source: RealSeries | None = None

    def __post_init__(self):
        if self.cardiac_amp < 0 or self.resp_amp < 0:
            raise ValueError("amplitudes must be nonnegative")

    def displacement(self, t: np.ndarray) -> np.ndarray:
        """d(t) in meters at the given times, bounded by cardiac_amp + resp_amp."""
        d = self.resp_amp * np.sin(2 * np.pi * self.resp_rate * t + self.resp_phase)
        if self.cardiac_amp > 0 and self.ppg_source is not None and len(self.ppg_source) > 0:
            p = self.ppg_source.samples - np.mean(self.ppg_source.samples)
            peak = np.max(np.abs(p))
            if peak > 0:
                p = p / peak
            d = d + self.cardiac_amp * np.interp(t, self.ppg_source.times(), p)
        return d


@dataclass
class ChannelModel:
    """Static multipath plus one phase-modulated chest path plus AWGN."""

    static_paths: list = field(default_factory=list)  # (complex gain, delay samples)
    chest_path_gain: complex = 1.0 + 0.0j
    noise_snr_db: float | None = None  # None disables noise
    wavelength: float = SPEED_OF_LIGHT / 5.24e9

    def __post_init__(self):
        if abs(self.chest_path_gain) <= 0:
            raise ValueError("chest path gain must be nonzero")


def gen_ppg_waveform(hr_bpm: float, hrv_pct: float, duration_s: float,
                     rate: float, seed: int) -> RealSeries:
    """Synthetic ground-truth PPG: per beat, a systolic Gaussian lobe plus
    a smaller dicrotic lobe (amplitude ratio 0.35, delayed 0.35 of the
    beat period). Beat intervals are jittered uniformly by +/- hrv_pct.
    """
    if not (30.0 <= hr_bpm <= 200.0):
        raise InvalidRange(f"hr_bpm {hr_bpm} outside [30, 200]")
    if not (0.0 <= hrv_pct <= 20.0):
        raise InvalidRange(f"hrv_pct {hrv_pct} outside [0, 20]")
    if duration_s <= 0 or rate <= 0:
        raise InvalidRange("duration_s and rate must be positive")

    rng = np.random.default_rng(seed)
    mean_period = 60.0 / hr_bpm
    t = np.arange(int(round(duration_s * rate))) / rate
    out = np.zeros_like(t)

    onset = -mean_period  # one spill-in beat so the record starts mid-rhythm
    while onset < duration_s + mean_period:
        period = mean_period * (1.0 + (hrv_pct / 100.0) * rng.uniform(-1.0, 1.0))
        sys_center = onset + 0.3 * period
        dic_center = sys_center + 0.35 * period
        sigma_sys = 0.08 * period
        sigma_dic = 0.12 * period
        lo = max(0, int((onset - period) * rate))
        hi = min(t.size, int((onset + 2 * period) * rate))
        tw = t[lo:hi]
        out[lo:hi] += np.exp(-0.5 * ((tw - sys_center) / sigma_sys) ** 2)
        out[lo:hi] += 0.35 * np.exp(-0.5 * ((tw - dic_center) / sigma_dic) ** 2)
        onset += period
    return RealSeries(out, rate)


def gen_qpsk_symbols(n_symbols: int, n_subcarriers: int, seed: int) -> np.ndarray:
    """Unit-magnitude QPSK grid, shape (n_subcarriers, n_symbols)."""
    if n_symbols < 1 or n_subcarriers < 1:
        raise InvalidRange("n_symbols and n_subcarriers must be >= 1")
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, 4, size=(n_subcarriers, n_symbols))
    return QPSK_POINTS[picks]


def ofdm_modulate(symbols: np.ndarray, cfg: OfdmConfig | None = None) -> ComplexSeries:
    """Inverse DFT each symbol column, prepend the cyclic prefix."""
    cfg = cfg or OfdmConfig()
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 2 or symbols.shape[0] != cfg.n_subcarriers:
        raise ShapeMismatch(f"expected {cfg.n_subcarriers} rows, got shape {symbols.shape}")
    time_sym = np.fft.ifft(symbols, axis=0)  # carries 1/N
    with_cp = np.concatenate([time_sym[-cfg.cp_len:, :], time_sym], axis=0)
    return ComplexSeries(with_cp.T.reshape(-1), cfg.sample_rate)


def apply_channel(tx: ComplexSeries, chest: ChestKinematics, ch: ChannelModel,
                  seed: int, cfg: OfdmConfig | None = None) -> ComplexSeries:
    """rx = sum of static paths + chest_gain * exp(j*4*pi*d(t)/lambda) * tx + AWGN."""
    cfg = cfg or OfdmConfig()
    if not np.isclose(tx.rate, cfg.sample_rate, rtol=1e-9):
        raise RateMismatch(f"tx rate {tx.rate} != {cfg.sample_rate}")
    n = len(tx)
    t = np.arange(n) / tx.rate
    phi = 4.0 * np.pi * chest.displacement(t) / ch.wavelength
    rx = ch.chest_path_gain * np.exp(1j * phi) * tx.samples
    for gain, delay in ch.static_paths:
        delay = int(delay)
        if delay == 0:
            rx = rx + gain * tx.samples
        else:
            delayed = np.concatenate([np.zeros(delay, dtype=np.complex128),
                                      tx.samples[:-delay]])
            rx = rx + gain * delayed
    if ch.noise_snr_db is not None and np.isfinite(ch.noise_snr_db):
        rng = np.random.default_rng(seed)
        p_signal = float(np.mean(np.abs(rx) ** 2))
        p_noise = p_signal / (10.0 ** (ch.noise_snr_db / 10.0))
        scale = np.sqrt(p_noise / 2.0)
        rx = rx + scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ComplexSeries(rx, tx.rate)


def ofdm_demodulate(rx: ComplexSeries, tx_symbols: np.ndarray,
                    cfg: OfdmConfig | None = None) -> SubcarrierMatrix:
    """Per symbol: drop the CP, forward DFT, divide by the known transmit
    symbol. Yields channel estimates H[k, m] at the symbol rate (250 Hz).
    """
    cfg = cfg or OfdmConfig()
    tx_symbols = np.asarray(tx_symbols, dtype=np.complex128)
    n_sym = tx_symbols.shape[1] if tx_symbols.ndim == 2 else 0
    if tx_symbols.ndim != 2 or tx_symbols.shape[0] != cfg.n_subcarriers:
        raise ShapeMismatch(f"expected {cfg.n_subcarriers} rows in tx_symbols")
    if len(rx) != n_sym * cfg.symbol_len:
        raise ShapeMismatch(
            f"rx length {len(rx)} != {n_sym} symbols x {cfg.symbol_len} samples")
    blocks = rx.samples.reshape(n_sym, cfg.symbol_len)[:, cfg.cp_len:]
    rx_freq = np.fft.fft(blocks, axis=1).T  # unnormalized forward DFT
    estimates = rx_freq / tx_symbols
    return SubcarrierMatrix(estimates, symbol_rate=cfg.symbol_rate)


def symbol_center_times(n_symbols: int, cfg: OfdmConfig | None = None) -> np.ndarray:
    """Mean sample time of each symbol's post-CP DFT window."""
    cfg = cfg or OfdmConfig()
    first = cfg.cp_len
    last = cfg.symbol_len - 1
    centers = np.arange(n_symbols) * cfg.symbol_len + (first + last) / 2.0
    return centers / cfg.sample_rate


@dataclass
class RecordParams:
    """Everything needed to regenerate one capture/PPG record."""

    record_id: str
    seed: int
    duration_s: float = 300.0
    hr_bpm: float = 72.0
    hrv_pct: float = 2.0
    cardiac_amp: float = 0.5e-3
    resp_amp: float = 5e-3
    resp_rate: float = 0.25
    snr_db: float = 20.0
    ppg_rate: float = 2500.0


def derive_seed(*keys) -> int:
    """Stable scalar seed from a tuple of integers."""
    ss = np.random.SeedSequence(list(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


def default_channel(seed: int, wavelength: float) -> ChannelModel:
    """Per-record channel: two modest static echoes and a chest path with
    a random (but seeded) reflection phase, standing in for session
    geometry."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi)
    return ChannelModel(
        static_paths=[(0.5 * np.exp(0.4j), 0), (0.25 * np.exp(-1.9j), 2)],
        chest_path_gain=np.exp(1j * theta),
        noise_snr_db=None,
        wavelength=wavelength,
    )


def simulate_record(params: RecordParams, cfg: OfdmConfig | None = None,
                    return_raw: bool = False):
    """Generate one paired record: (SubcarrierMatrix, reference PPG).

    With return_raw=True also returns the received IQ stream and the
    transmitted symbol grid.
    """
    cfg = cfg or OfdmConfig()
    n_sym = int(round(params.duration_s * cfg.symbol_rate))
    ppg = gen_ppg_waveform(params.hr_bpm, params.hrv_pct, params.duration_s,
                           params.ppg_rate, derive_seed(params.seed, 1))
    symbols = gen_qpsk_symbols(n_sym, cfg.n_subcarriers, derive_seed(params.seed, 2))
    tx = ofdm_modulate(symbols, cfg)
    chest = ChestKinematics(cardiac_amp=params.cardiac_amp,
                            resp_amp=params.resp_amp,
                            resp_rate=params.resp_rate,
                            resp_phase=np.random.default_rng(
                                derive_seed(params.seed, 3)).uniform(0, 2 * np.pi),
                            ppg_source=ppg)
    channel = default_channel(derive_seed(params.seed, 4), cfg.wavelength)
    channel.noise_snr_db = params.snr_db
    rx = apply_channel(tx, chest, channel, derive_seed(params.seed, 5), cfg)
    estimates = ofdm_demodulate(rx, symbols, cfg)
    if return_raw:
        return estimates, ppg, rx, symbols
    return estimates, ppg
