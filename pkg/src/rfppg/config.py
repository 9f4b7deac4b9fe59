"""Run configuration: one flat key=value namespace for every tunable."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError
from .preprocess import DEFAULT_KEEP_DETAIL_LEVELS, PreprocessConfig
from .regress import TrainConfig
from .series import PROCESSED_RATE_HZ, SEGMENT_SECONDS


@dataclass
class RunConfig:
    # randomness
    seed: int = 0
    # dataset shape
    scale: float = 1.0
    n_subjects: int = 16
    sessions_per_subject: int = 2
    session_duration_s: float = 300.0
    snr_db: float = 20.0
    # subject physiology / kinematics
    hr_min_bpm: float = 60.0
    hr_max_bpm: float = 90.0
    hrv_pct: float = 2.0
    cardiac_amp_m: float = 0.5e-3
    resp_amp_m: float = 5e-3
    resp_rate_hz: float = 0.25
    ppg_rate_hz: float = 2500.0
    # conditioning
    target_rate_hz: float = PROCESSED_RATE_HZ
    seg_seconds: float = SEGMENT_SECONDS
    fuse_mode: str = "complex-modulus"
    dwt_levels: int = 10
    keep_detail_levels: frozenset = field(default_factory=lambda: DEFAULT_KEEP_DETAIL_LEVELS)
    lpf_order: int = 12
    lpf_fc_hz: float = 3.4
    baseline_max_hz: float = 0.2
    artifact_z_thresh: float = 6.0
    max_lag: int = 91
    # regression
    model_kind: str = "mlp"
    ridge_alpha: float = 10.0
    hidden_dims: tuple = (512, 512, 512)
    leaky_slope: float = 0.01
    learning_rate: float = 1e-4
    l2_lambda: float = 1e-6
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 500
    patience: int = 50
    split_fraction: float = 0.8
    split_mode: str = "segment"
    dct_keep: int = 0  # 0 keeps all coefficients

    def validate(self):
        if self.scale <= 0 or self.session_duration_s <= 0:
            raise ConfigError("scale and session_duration_s must be positive")
        if self.n_subjects < 1 or self.sessions_per_subject < 1:
            raise ConfigError("need at least one subject and one session")
        if not (0.0 < self.split_fraction < 1.0):
            raise ConfigError("split_fraction must be in (0, 1)")
        if self.fuse_mode not in ("complex-modulus", "concat"):
            raise ConfigError(f"unknown fuse_mode {self.fuse_mode!r}")
        if self.model_kind not in ("ridge", "mlp"):
            raise ConfigError(f"unknown model_kind {self.model_kind!r}")
        if self.split_mode not in ("segment", "subject"):
            raise ConfigError(f"unknown split_mode {self.split_mode!r}")
        if self.dwt_levels < 1:
            raise ConfigError("dwt_levels must be >= 1")
        if self.dct_keep < 0:
            raise ConfigError("dct_keep must be >= 0")
        for key in ("ppg_rate_hz", "target_rate_hz", "seg_seconds", "lpf_fc_hz",
                    "learning_rate", "batch_size", "epochs"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        return self

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        cfg = cls()
        known = {f.name: f for f in dataclasses.fields(cls)}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                try:
                    setattr(cfg, key, _coerce(key, value))
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
        return cfg.validate()

    def to_preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(
            target_rate=self.target_rate_hz,
            seg_seconds=self.seg_seconds,
            fuse_mode=self.fuse_mode,
            dwt_levels=self.dwt_levels,
            keep_detail_levels=self.keep_detail_levels,
            lpf_order=self.lpf_order,
            lpf_fc_hz=self.lpf_fc_hz,
            baseline_max_hz=self.baseline_max_hz,
            artifact_z_thresh=self.artifact_z_thresh,
            max_lag=self.max_lag,
        )

    def to_train_config(self) -> TrainConfig:
        return TrainConfig(
            l2_lambda=self.l2_lambda,
            learning_rate=self.learning_rate,
            beta1=self.adam_beta1,
            beta2=self.adam_beta2,
            eps=self.adam_eps,
            batch_size=self.batch_size,
            epochs=self.epochs,
            split=self.split_fraction,
            seed=self.seed,
            patience=self.patience,
            hidden_dims=tuple(self.hidden_dims),
            leaky_slope=self.leaky_slope,
        )


_INT_KEYS = {"seed", "n_subjects", "sessions_per_subject", "dwt_levels", "lpf_order",
             "max_lag", "batch_size", "epochs", "patience", "dct_keep"}
_STR_KEYS = {"fuse_mode", "model_kind", "split_mode"}


def _coerce(key: str, value: str):
    if key == "keep_detail_levels":
        return frozenset(int(v) for v in value.split(",") if v.strip())
    if key == "hidden_dims":
        return tuple(int(v) for v in value.split(",") if v.strip())
    if key in _INT_KEYS:
        return int(value)
    if key in _STR_KEYS:
        return value
    return float(value)
