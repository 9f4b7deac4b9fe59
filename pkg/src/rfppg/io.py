"""On-disk formats: capture files, PPG tables, pair archives, models.

CaptureFile (binary, little-endian):
  magic "RPG1" | version u8 | subcarriers u16 | symbol_rate f64 |
  duration_s f64 | payload of float32 (re, im) pairs, subcarrier-major
  within each symbol block.

PpgFile (text): header line "# rate_hz=<r>", then "time_s value" rows at
uniform spacing.

Model file (text): header "rfppg-model v1 <kind> <dims...>", scalar
parameter lines, then one block per tensor:
  tensor <name> <rows> <cols>
  <rows lines of <cols> decimal floats>
Floats are written with repr() so a write/read round trip is bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .preprocess import SegmentPair, SubcarrierMatrix
from .regress import MlpModel, RidgeModel
from .series import RealSeries, Segment

CAPTURE_MAGIC = b"RPG1"
CAPTURE_VERSION = 1
_CAPTURE_HEADER = struct.Struct("<4sBHdd")


def write_capture(path, m: SubcarrierMatrix) -> None:
    """Store channel estimates as float32; values are rounded once here."""
    n_sub, n_sym = m.estimates.shape
    duration = n_sym / m.symbol_rate
    header = _CAPTURE_HEADER.pack(CAPTURE_MAGIC, CAPTURE_VERSION, n_sub,
                                  m.symbol_rate, duration)
    interleaved = np.empty((n_sym, n_sub, 2), dtype="<f4")
    interleaved[:, :, 0] = m.estimates.real.T
    interleaved[:, :, 1] = m.estimates.imag.T
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(interleaved.tobytes())


def read_capture(path) -> SubcarrierMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _CAPTURE_HEADER.size:
        raise FormatError(f"{path}: truncated capture header")
    magic, version, n_sub, symbol_rate, duration = _CAPTURE_HEADER.unpack_from(data)
    if magic != CAPTURE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != CAPTURE_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    payload = data[_CAPTURE_HEADER.size:]
    frame = n_sub * 8
    if n_sub < 1 or len(payload) % frame:
        raise FormatError(f"{path}: payload length {len(payload)} not a multiple of "
                          f"{frame} bytes")
    n_sym = len(payload) // frame
    if abs(duration - n_sym / symbol_rate) > 1.5 / symbol_rate:
        raise FormatError(f"{path}: header duration {duration} inconsistent with "
                          f"{n_sym} symbols at {symbol_rate} Hz")
    flat = np.frombuffer(payload, dtype="<f4").reshape(n_sym, n_sub, 2)
    estimates = (flat[:, :, 0].astype(np.float64)
                 + 1j * flat[:, :, 1].astype(np.float64)).T
    return SubcarrierMatrix(estimates, symbol_rate=symbol_rate)


def write_ppg(path, x: RealSeries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# rate_hz={x.rate!r}\n")
        rate = x.rate
        for i, v in enumerate(x.samples):
            fh.write(f"{i / rate!r} {v!r}\n")


def read_ppg(path) -> RealSeries:
    rate = None
    times = []
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "rate_hz=" in line:
                    rate = float(line.split("rate_hz=", 1)[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'time value'")
            times.append(float(parts[0]))
            values.append(float(parts[1]))
    if rate is None:
        raise FormatError(f"{path}: missing '# rate_hz=' header")
    if len(values) < 2:
        raise FormatError(f"{path}: need at least 2 samples")
    t = np.asarray(times)
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise FormatError(f"{path}: time column must be strictly increasing")
    if np.max(np.abs(dt - 1.0 / rate)) > 1e-6:
        raise FormatError(f"{path}: nonuniform spacing vs rate {rate} Hz")
    return RealSeries(np.asarray(values), rate)


def save_pairs(path, pairs: list[SegmentPair]) -> None:
    if not pairs:
        raise FormatError("refusing to write an empty pair archive")
    seg_len = len(pairs[0].radio)
    dtype = np.dtype([("record_id", "<U32"), ("seg_index", "<u4"), ("lag", "<i4"),
                      ("radio", "<f8", (seg_len,)), ("ppg", "<f8", (seg_len,))])
    arr = np.empty(len(pairs), dtype=dtype)
    for i, p in enumerate(pairs):
        arr[i] = (p.record_id, p.index, p.lag_applied, p.radio.samples, p.ppg.samples)
    np.save(path, arr, allow_pickle=False)


def load_pairs(path) -> list[SegmentPair]:
    try:
        arr = np.load(path, allow_pickle=False)
    except (ValueError, OSError) as exc:
        raise FormatError(f"{path}: not a pair archive: {exc}") from exc
    names = arr.dtype.names or ()
    if set(names) != {"record_id", "seg_index", "lag", "radio", "ppg"}:
        raise FormatError(f"{path}: unexpected fields {names}")
    pairs = []
    for row in arr:
        pairs.append(SegmentPair(
            radio=Segment(np.array(row["radio"]), origin_index=0),
            ppg=Segment(np.array(row["ppg"]), origin_index=0),
            lag_applied=int(row["lag"]),
            record_id=str(row["record_id"]),
            index=int(row["seg_index"]),
        ))
    return pairs


MODEL_MAGIC = "rfppg-model"
MODEL_VERSION = "v1"


def _write_tensor(fh, name: str, arr: np.ndarray) -> None:
    mat = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    fh.write(f"tensor {name} {mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        fh.write(" ".join(repr(v) for v in row))
        fh.write("\n")


def save_model(path, model) -> None:
    dims = " ".join(str(d) for d in model.dims)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{MODEL_MAGIC} {MODEL_VERSION} {model.kind} {dims}\n")
        if isinstance(model, RidgeModel):
            fh.write(f"alpha {model.alpha!r}\n")
            _write_tensor(fh, "W", model.W)
            _write_tensor(fh, "b", model.b)
        elif isinstance(model, MlpModel):
            fh.write(f"leaky_slope {model.leaky_slope!r}\n")
            for i, (W, b) in enumerate(zip(model.weights, model.biases), start=1):
                _write_tensor(fh, f"W{i}", W)
                _write_tensor(fh, f"b{i}", b)
        else:
            raise FormatError(f"unknown model type {type(model).__name__}")


def _read_tensors(lines, path):
    tensors = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 4 or parts[0] != "tensor":
            raise FormatError(f"{path}: expected tensor block header, got {lines[i]!r}")
        name, rows, cols = parts[1], int(parts[2]), int(parts[3])
        if i + rows >= len(lines) + 1:
            raise FormatError(f"{path}: truncated tensor {name}")
        block = np.array([[float(v) for v in lines[i + 1 + r].split()]
                          for r in range(rows)])
        if block.shape != (rows, cols):
            raise FormatError(f"{path}: tensor {name} shape mismatch")
        tensors[name] = block
        i += 1 + rows
    return tensors


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines:
        raise FormatError(f"{path}: empty model file")
    head = lines[0].split()
    if len(head) < 4 or head[0] != MODEL_MAGIC or head[1] != MODEL_VERSION:
        raise FormatError(f"{path}: bad model header {lines[0]!r}")
    kind = head[2]
    dims = [int(d) for d in head[3:]]
    scalars = {}
    body_start = 1
    for line in lines[1:]:
        parts = line.split()
        if len(parts) == 2 and parts[0] in ("alpha", "leaky_slope"):
            scalars[parts[0]] = float(parts[1])
            body_start += 1
        else:
            break
    tensors = _read_tensors([l for l in lines[body_start:] if l.strip()], path)
    if kind == "ridge":
        if len(dims) != 2 or "W" not in tensors or "b" not in tensors:
            raise FormatError(f"{path}: malformed ridge model")
        W = tensors["W"]
        if W.shape != (dims[0], dims[1]):
            raise FormatError(f"{path}: ridge W shape {W.shape} != dims {dims}")
        return RidgeModel(W=W, b=tensors["b"][0], alpha=scalars.get("alpha", 0.0))
    if kind == "mlp":
        n_layers = len(dims) - 1
        weights = []
        biases = []
        for i in range(1, n_layers + 1):
            if f"W{i}" not in tensors or f"b{i}" not in tensors:
                raise FormatError(f"{path}: missing layer {i} tensors")
            W = tensors[f"W{i}"]
            if W.shape != (dims[i], dims[i - 1]):
                raise FormatError(f"{path}: layer {i} shape {W.shape} inconsistent "
                                  f"with dims {dims}")
            weights.append(W)
            biases.append(tensors[f"b{i}"][0])
        return MlpModel(weights=weights, biases=biases,
                        leaky_slope=scalars.get("leaky_slope", 0.01))
    raise FormatError(f"{path}: unknown model kind {kind!r}")


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid manifest: {exc}") from exc


def dataset_records(dataset_dir) -> list[dict]:
    """Enumerate (record_id, capture path, ppg path) from a dataset directory."""
    root = Path(dataset_dir)
    manifest_path = root / "manifest.json"
    records = []
    if manifest_path.exists():
        manifest = read_manifest(manifest_path)
        for rec in manifest.get("records", []):
            records.append({"record_id": rec["record_id"],
                            "capture": root / rec["capture"],
                            "ppg": root / rec["ppg"]})
    else:
        for cap in sorted(root.glob("*.capture")):
            ppg = cap.with_suffix(".ppg")
            if ppg.exists():
                records.append({"record_id": cap.stem, "capture": cap, "ppg": ppg})
    return records
