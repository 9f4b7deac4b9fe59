"""rfppg: PPG waveform synthesis from chest-motion-modulated OFDM captures."""

from .config import RunConfig
from .preprocess import (
    FusedRadioSeries,
    PreprocessConfig,
    SegmentPair,
    SubcarrierMatrix,
    align_segments,
    artifact_scan,
    butterworth_lpf,
    dwt_denoise,
    pca_first_component,
    pca_fuse,
    ppg_baseline_remove,
    preprocess_record,
    select_subcarriers,
)
from .regress import (
    MlpModel,
    RidgeModel,
    TrainConfig,
    dct2,
    idct2,
    mlp_forward,
    mlp_train,
    ridge_fit,
    split_pairs,
    translate,
)
from .series import (
    PROCESSED_RATE_HZ,
    SEGMENT_SAMPLES,
    SEGMENT_SECONDS,
    ComplexSeries,
    RealSeries,
    Segment,
    mae,
    resample,
    segment,
    zscore,
)
from .sim import (
    ChannelModel,
    ChestKinematics,
    OfdmConfig,
    apply_channel,
    gen_ppg_waveform,
    gen_qpsk_symbols,
    ofdm_demodulate,
    ofdm_modulate,
    simulate_record,
)

__version__ = "0.1.0"
