"""Waveform translation: DCT-domain ridge and MLP regression.

Segments are moved into the frequency domain with an orthonormal type-II
DCT, a regressor maps radio coefficients to PPG coefficients, and the
inverse DCT returns the synthetic PPG segment. The MLP is trained from
scratch with MAE loss, L2 weight penalty and Adam.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    DivergedLoss,
    EmptyDataset,
    LengthMismatch,
    ModelMismatch,
    ShapeMismatch,
    SingularSystem,
)
from .series import Segment


@lru_cache(maxsize=8)
def _dct_matrix(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    mat = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    mat[0, :] = np.sqrt(1.0 / n)
    mat.flags.writeable = False
    return mat


def dct2(seg) -> np.ndarray:
    """Orthonormal type-II DCT of a segment (energy preserving)."""
    x = seg.samples if isinstance(seg, Segment) else np.asarray(seg, dtype=np.float64)
    if x.size == 0:
        raise LengthMismatch("cannot transform an empty segment")
    return _dct_matrix(x.size) @ x


def idct2(v) -> np.ndarray:
    """Inverse of dct2 (the transpose, since the matrix is orthogonal)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise LengthMismatch("cannot invert an empty coefficient vector")
    return _dct_matrix(v.size).T @ v


@dataclass
class RidgeModel:
    """Closed-form linear map in DCT space: y = x @ W + b."""

    W: np.ndarray
    b: np.ndarray
    alpha: float

    kind = "ridge"

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.W.shape[0], self.W.shape[1])

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.W.shape[0]:
            raise ModelMismatch(f"input dim {x.shape[-1]} != model dim {self.W.shape[0]}")
        return x @ self.W + self.b


def ridge_fit(X: np.ndarray, Y: np.ndarray, alpha: float) -> RidgeModel:
    """Minimize ||X W + b - Y||_F^2 + alpha ||W||_F^2 in closed form.

    The bias is handled by column-centering both sides, so W solves
    (Xc' Xc + alpha I) W = Xc' Yc and b reproduces the means.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeMismatch(f"incompatible shapes {X.shape} and {Y.shape}")
    if X.shape[0] < 1:
        raise EmptyDataset("ridge fit needs at least one sample")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean
    gram = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        W = cho_solve(cho_factor(gram), Xc.T @ Yc)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("normal equations are singular; use alpha > 0") from exc
    b = y_mean - x_mean @ W
    return RidgeModel(W=W, b=b, alpha=float(alpha))


def ridge_objective(model: RidgeModel, X: np.ndarray, Y: np.ndarray) -> float:
    resid = X @ model.W + model.b - Y
    return float(np.sum(resid ** 2) + model.alpha * np.sum(model.W ** 2))


@dataclass
class MlpModel:
    """Fully connected net; leaky ReLU on every layer except the last.

    weights[i] has shape (dims[i+1], dims[i]); the hidden chain follows
    the 400 -> 512 -> 512 -> 512 -> 400 default.
    """

    weights: list
    biases: list
    leaky_slope: float = 0.01

    kind = "mlp"

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[1]] + [w.shape[0] for w in self.weights])

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.shape[1] != self.dims[0]:
            raise ModelMismatch(f"input dim {h.shape[1]} != model dim {self.dims[0]}")
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W.T + b
            h = z if i == last else np.where(z > 0, z, self.leaky_slope * z)
        return h[0] if squeeze else h


def mlp_forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    return model.predict(x)


def init_mlp(dims, seed: int, leaky_slope: float = 0.01) -> MlpModel:
    """He-uniform initialization: W ~ U(+-sqrt(6/fan_in)), zero biases."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise ValueError("need at least an input and an output dimension")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights=weights, biases=biases, leaky_slope=leaky_slope)


@dataclass
class TrainConfig:
    l2_lambda: float = 1e-6
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 500
    split: float = 0.8
    seed: int = 0
    patience: int = 50
    hidden_dims: tuple = (512, 512, 512)
    leaky_slope: float = 0.01

    def __post_init__(self):
        if not (0.0 < self.split < 1.0):
            raise ValueError("split fraction must be in (0, 1)")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate, batch_size and epochs must be positive")


def mlp_loss_and_grads(model: MlpModel, X: np.ndarray, Y: np.ndarray,
                       l2_lambda: float):
    """MAE + L2 loss and its gradients w.r.t. every weight and bias.

    The MAE subgradient at a zero residual is taken as 0 (np.sign).
    """
    n, d_out = Y.shape
    hs = [X]
    zs = []
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        z = hs[-1] @ W.T + b
        zs.append(z)
        hs.append(z if i == last else np.where(z > 0, z, model.leaky_slope * z))
    pred = hs[-1]
    resid = pred - Y
    loss = float(np.mean(np.abs(resid)))
    loss += l2_lambda * sum(float(np.sum(W ** 2)) for W in model.weights)

    delta = np.sign(resid) / (n * d_out)
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for i in range(last, -1, -1):
        grads_w[i] = delta.T @ hs[i] + 2.0 * l2_lambda * model.weights[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            upstream = delta @ model.weights[i]
            delta = upstream * np.where(zs[i - 1] > 0, 1.0, model.leaky_slope)
    return loss, grads_w, grads_b


def _dataset_mae(model: MlpModel, X: np.ndarray, Y: np.ndarray) -> float:
    return float(np.mean(np.abs(model.predict(X) - Y)))


def split_pairs(pairs, fraction: float = 0.8, seed: int = 0, mode: str = "segment",
                keys=None) -> tuple[list, list]:
    """Seeded shuffle-and-split into (train, test).

    segment mode permutes individual pairs; subject mode permutes the
    distinct keys (e.g. subject ids) and assigns whole groups, keeping
    all of a subject's segments on one side.
    """
    pairs = list(pairs)
    n = len(pairs)
    if n < 2:
        raise EmptyDataset(f"need at least 2 pairs to split, got {n}")
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    if mode == "segment":
        order = rng.permutation(n)
        n_train = int(np.floor(n * fraction))
        train_idx = order[:n_train]
        test_idx = order[n_train:]
    elif mode == "subject":
        if keys is None:
            raise ValueError("subject mode needs a key per pair")
        keys = list(keys)
        if len(keys) != n:
            raise LengthMismatch("one key per pair required")
        uniq = sorted(set(keys))
        uniq_order = [uniq[i] for i in rng.permutation(len(uniq))]
        n_train_subj = int(np.floor(len(uniq) * fraction))
        train_subj = set(uniq_order[:n_train_subj])
        train_idx = [i for i, k in enumerate(keys) if k in train_subj]
        test_idx = [i for i, k in enumerate(keys) if k not in train_subj]
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    return [pairs[i] for i in train_idx], [pairs[i] for i in test_idx]


def mlp_train(pairs, cfg: TrainConfig, val_pairs=None):
    """Train the MLP on (input, target) coefficient pairs.

    Without an explicit validation set the pairs are split with
    cfg.split and cfg.seed; Adam minimizes mean MAE plus the L2 penalty
    over mini-batches whose order is fixed by the seed. Early stopping
    restores the parameters of the best validation epoch (patience
    cfg.patience). Returns the model and a history of
    (epoch, train_mae, val_mae) rows.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise EmptyDataset(f"need at least 2 pairs, got {len(pairs)}")
    if val_pairs is None:
        train_pairs, val_pairs = split_pairs(pairs, cfg.split, cfg.seed)
    else:
        train_pairs, val_pairs = pairs, list(val_pairs)
    X = np.asarray([p[0] for p in train_pairs], dtype=np.float64)
    Y = np.asarray([p[1] for p in train_pairs], dtype=np.float64)
    Xv = np.asarray([p[0] for p in val_pairs], dtype=np.float64)
    Yv = np.asarray([p[1] for p in val_pairs], dtype=np.float64)

    dims = (X.shape[1],) + tuple(cfg.hidden_dims) + (Y.shape[1],)
    model = init_mlp(dims, cfg.seed, cfg.leaky_slope)

    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    t = 0

    rng = np.random.default_rng(cfg.seed + 1)
    history = []
    best_val = np.inf
    best_state = None
    stale = 0
    n = X.shape[0]

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            loss, gw, gb = mlp_loss_and_grads(model, X[batch], Y[batch], cfg.l2_lambda)
            if not np.isfinite(loss):
                raise DivergedLoss(f"loss became {loss} at epoch {epoch}")
            t += 1
            bc1 = 1.0 - cfg.beta1 ** t
            bc2 = 1.0 - cfg.beta2 ** t
            for params, grads, ms, vs in ((model.weights, gw, m_w, v_w),
                                          (model.biases, gb, m_b, v_b)):
                for i, g in enumerate(grads):
                    ms[i] = cfg.beta1 * ms[i] + (1 - cfg.beta1) * g
                    vs[i] = cfg.beta2 * vs[i] + (1 - cfg.beta2) * g * g
                    params[i] -= cfg.learning_rate * (ms[i] / bc1) / (np.sqrt(vs[i] / bc2) + cfg.eps)

        train_mae = _dataset_mae(model, X, Y)
        val_mae = _dataset_mae(model, Xv, Yv) if len(val_pairs) else train_mae
        if not (np.isfinite(train_mae) and np.isfinite(val_mae)):
            raise DivergedLoss(f"epoch {epoch}: MAE not finite")
        history.append((epoch, train_mae, val_mae))
        if val_mae < best_val:
            best_val = val_mae
            best_state = ([w.copy() for w in model.weights],
                          [b.copy() for b in model.biases])
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    if best_state is not None:
        model = MlpModel(weights=best_state[0], biases=best_state[1],
                         leaky_slope=cfg.leaky_slope)
    return model, history


def translate(model, radio_seg: Segment) -> Segment:
    """Synthesize a PPG segment: inverse-DCT the model's output coefficients."""
    coeffs = dct2(radio_seg)
    out = model.predict(coeffs)
    return Segment(idct2(out), radio_seg.origin_index, radio_seg.duration_s)
