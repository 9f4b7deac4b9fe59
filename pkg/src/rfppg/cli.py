"""Command-line driver: simulate | preprocess | train | eval | translate."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io, metrics, svg
from .config import RunConfig
from .errors import EmptyResult, FormatError, ModelMismatch, RfppgError
from .preprocess import artifact_scan, preprocess_record
from .preprocess import _radio_series  # record-level radio chain, shared with translate
from .regress import dct2, idct2, mlp_train, ridge_fit, split_pairs
from .series import RealSeries, Segment, segment, zscore
from .sim import OfdmConfig, RecordParams, derive_seed, simulate_record


def _n_workers() -> int:
    env = os.environ.get("RFPPG_WORKERS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _run_pool(fn, items):
    workers = _n_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- simulate

def _record_params(cfg: RunConfig, subject: int, session: int) -> RecordParams:
    subj_rng = np.random.default_rng(derive_seed(cfg.seed, subject))
    hr = subj_rng.uniform(cfg.hr_min_bpm, cfg.hr_max_bpm)
    return RecordParams(
        record_id=f"s{subject:02d}_r{session}",
        seed=derive_seed(cfg.seed, subject, session),
        duration_s=cfg.session_duration_s * cfg.scale,
        hr_bpm=hr,
        hrv_pct=cfg.hrv_pct,
        cardiac_amp=cfg.cardiac_amp_m,
        resp_amp=cfg.resp_amp_m,
        resp_rate=cfg.resp_rate_hz,
        snr_db=cfg.snr_db,
        ppg_rate=cfg.ppg_rate_hz,
    )


def cmd_simulate(cfg: RunConfig, out_dir, raw_iq: bool = False) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = [_record_params(cfg, subj, sess)
              for subj in range(1, cfg.n_subjects + 1)
              for sess in range(1, cfg.sessions_per_subject + 1)]

    def build(p: RecordParams) -> dict:
        ofdm = OfdmConfig()
        if raw_iq:
            estimates, ppg, rx, _ = simulate_record(p, ofdm, return_raw=True)
            iq = io.SubcarrierMatrix(rx.samples[None, :], symbol_rate=ofdm.sample_rate)
            io.write_capture(out / f"{p.record_id}.iq", iq)
        else:
            estimates, ppg = simulate_record(p, ofdm)
        io.write_capture(out / f"{p.record_id}.capture", estimates)
        io.write_ppg(out / f"{p.record_id}.ppg", ppg)
        entry = {
            "record_id": p.record_id,
            "capture": f"{p.record_id}.capture",
            "ppg": f"{p.record_id}.ppg",
            "seed": p.seed,
            "duration_s": p.duration_s,
            "hr_bpm": p.hr_bpm,
            "hrv_pct": p.hrv_pct,
            "cardiac_amp_m": p.cardiac_amp,
            "resp_amp_m": p.resp_amp,
            "resp_rate_hz": p.resp_rate,
            "snr_db": p.snr_db,
            "ppg_rate_hz": p.ppg_rate,
        }
        if raw_iq:
            entry["raw_iq"] = f"{p.record_id}.iq"
        return entry

    entries = _run_pool(build, params)
    entries.sort(key=lambda e: e["record_id"])
    manifest = {
        "seed": cfg.seed,
        "scale": cfg.scale,
        "n_subjects": cfg.n_subjects,
        "sessions_per_subject": cfg.sessions_per_subject,
        "records": entries,
    }
    io.write_manifest(out / "manifest.json", manifest)
    print(f"simulate: wrote {len(entries)} records "
          f"({cfg.n_subjects} subjects x {cfg.sessions_per_subject} sessions) to {out}")
    return manifest


# -------------------------------------------------------------- preprocess

def cmd_preprocess(cfg: RunConfig, dataset_dir, out_file) -> list:
    records = io.dataset_records(dataset_dir)
    if not records:
        raise EmptyResult(f"no capture/ppg records found in {dataset_dir}")
    pcfg = cfg.to_preprocess_config()

    def work(rec):
        try:
            capture = io.read_capture(rec["capture"])
            ppg = io.read_ppg(rec["ppg"])
            flagged = artifact_scan(ppg, pcfg.artifact_z_thresh, pcfg.seg_seconds)
            pairs = preprocess_record(capture, ppg, pcfg, record_id=rec["record_id"])
            return rec["record_id"], pairs, len(flagged), None
        except (FormatError, OSError) as exc:
            return rec["record_id"], [], 0, str(exc)

    results = _run_pool(work, records)
    results.sort(key=lambda r: r[0])
    all_pairs = []
    n_bad = 0
    for record_id, pairs, n_flagged, err in results:
        if err is not None:
            n_bad += 1
            print(f"warning: skipping {record_id}: {err}", file=sys.stderr)
            continue
        print(f"{record_id}: {len(pairs)} pairs, {n_flagged} flagged windows")
        all_pairs.extend(pairs)
    if n_bad:
        print(f"warning: {n_bad} record(s) skipped", file=sys.stderr)
    if not all_pairs:
        raise EmptyResult("preprocessing produced no segment pairs")
    all_pairs.sort(key=lambda p: (p.record_id, p.index))
    io.save_pairs(out_file, all_pairs)
    print(f"preprocess: wrote {len(all_pairs)} pairs to {out_file}")
    return all_pairs


# ------------------------------------------------------------------- train

def _dct_xy(pairs, dct_keep: int = 0):
    """DCT both sides of every pair; optionally keep only the first K coefficients."""
    X = np.stack([dct2(p.radio) for p in pairs])
    Y = np.stack([dct2(p.ppg) for p in pairs])
    if dct_keep:
        X = X[:, :dct_keep]
        Y = Y[:, :dct_keep]
    return X, Y


def _split(cfg: RunConfig, pairs):
    keys = [p.record_id.split("_")[0] for p in pairs] if cfg.split_mode == "subject" else None
    return split_pairs(pairs, cfg.split_fraction, cfg.seed, cfg.split_mode, keys)


def _write_history(path, history) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_mae,val_mae\n")
        for epoch, train_mae, val_mae in history:
            fh.write(f"{epoch},{train_mae!r},{val_mae!r}\n")


def cmd_train(cfg: RunConfig, pairs_file, model_kind: str, out_model,
              history_file=None):
    pairs = io.load_pairs(pairs_file)
    train_pairs, test_pairs = _split(cfg, pairs)
    Xtr, Ytr = _dct_xy(train_pairs, cfg.dct_keep)
    Xte, Yte = _dct_xy(test_pairs, cfg.dct_keep)

    if model_kind == "ridge":
        model = ridge_fit(Xtr, Ytr, cfg.ridge_alpha)
        history = [(0,
                    float(np.mean(np.abs(model.predict(Xtr) - Ytr))),
                    float(np.mean(np.abs(model.predict(Xte) - Yte))))]
    elif model_kind == "mlp":
        tcfg = cfg.to_train_config()
        dct_train = list(zip(Xtr, Ytr))
        dct_val = list(zip(Xte, Yte))
        model, history = mlp_train(dct_train, tcfg, val_pairs=dct_val)
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")

    io.save_model(out_model, model)
    if history_file:
        _write_history(history_file, history)
    final = history[-1]
    print(f"train[{model_kind}]: {len(train_pairs)} train / {len(test_pairs)} test pairs, "
          f"{len(history)} epochs, final train_mae={final[1]:.6g} val_mae={final[2]:.6g}")
    print(f"train: model written to {out_model}")
    return model, history


# -------------------------------------------------------------------- eval

def _model_dims_check(model, seg_len: int) -> int:
    d_in = model.dims[0]
    d_out = model.dims[-1]
    if d_in > seg_len or d_out > seg_len:
        raise ModelMismatch(f"model dims {model.dims} exceed segment length {seg_len}")
    if d_in != d_out:
        raise ModelMismatch(f"model input dim {d_in} != output dim {d_out}")
    return d_in


def _synthesize(model, radio_seg: Segment, keep: int, seg_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (predicted coefficients, synthetic time-domain segment)."""
    coeffs = dct2(radio_seg)[:keep]
    pred = model.predict(coeffs)
    full = np.zeros(seg_len)
    full[:keep] = pred
    return pred, idct2(full)


def _eval_split(model, pairs, keep: int, seg_len: int, rate: float):
    rows = []
    for p in pairs:
        pred_coeffs, synth = _synthesize(model, p.radio, keep, seg_len)
        ref = p.ppg.samples
        ref_coeffs = dct2(p.ppg)[:keep]
        time_mae = float(np.mean(np.abs(synth - ref)))
        dct_mae = float(np.mean(np.abs(pred_coeffs - ref_coeffs)))
        r = metrics.pearson_r(synth, ref)
        hr_ref = metrics.estimate_hr_bpm(ref, rate)
        hr_syn = metrics.estimate_hr_bpm(synth, rate)
        rows.append({"record_id": p.record_id, "seg_index": p.index,
                     "time_mae": time_mae, "dct_mae": dct_mae, "pearson_r": r,
                     "hr_ref": hr_ref, "hr_syn": hr_syn, "synth": synth, "ref": ref})
    return rows


def _aggregate(rows) -> dict:
    time_mae = float(np.mean([r["time_mae"] for r in rows]))
    dct_mae = float(np.mean([r["dct_mae"] for r in rows]))
    rs = np.array([r["pearson_r"] for r in rows])
    hr_errors = [abs(r["hr_syn"] - r["hr_ref"]) for r in rows
                 if r["hr_ref"] is not None and r["hr_syn"] is not None]
    return {
        "n_segments": len(rows),
        "time_mae": time_mae,
        "dct_mae": dct_mae,
        "pearson_median": float(np.median(rs)),
        "pearson_iqr": float(np.percentile(rs, 75) - np.percentile(rs, 25)),
        "hr_mae_median_bpm": float(np.median(hr_errors)) if hr_errors else float("nan"),
        "hr_pairs_used": len(hr_errors),
    }


_METRIC_COLUMNS = ("n_segments", "time_mae", "dct_mae", "pearson_median",
                   "pearson_iqr", "hr_mae_median_bpm", "hr_pairs_used")


def cmd_eval(cfg: RunConfig, pairs_file, model_file, report_dir) -> dict:
    pairs = io.load_pairs(pairs_file)
    model = io.load_model(model_file)
    seg_len = len(pairs[0].radio)
    keep = _model_dims_check(model, seg_len)
    if cfg.dct_keep and cfg.dct_keep != keep:
        raise ModelMismatch(f"config dct_keep={cfg.dct_keep} but model dim is {keep}")

    train_pairs, test_pairs = _split(cfg, pairs)
    report = Path(report_dir)
    report.mkdir(parents=True, exist_ok=True)
    rate = cfg.target_rate_hz

    summary = {}
    seg_lines = ["split,record_id,seg_index,time_mae,dct_mae,pearson_r,hr_ref_bpm,hr_syn_bpm"]
    for split_name, split_rows in (("train", _eval_split(model, train_pairs, keep, seg_len, rate)),
                                   ("test", _eval_split(model, test_pairs, keep, seg_len, rate))):
        summary[split_name] = _aggregate(split_rows)
        for r in split_rows:
            hr_ref = "" if r["hr_ref"] is None else repr(r["hr_ref"])
            hr_syn = "" if r["hr_syn"] is None else repr(r["hr_syn"])
            seg_lines.append(f"{split_name},{r['record_id']},{r['seg_index']},"
                             f"{r['time_mae']!r},{r['dct_mae']!r},{r['pearson_r']!r},"
                             f"{hr_ref},{hr_syn}")
        if split_name == "test":
            for i, r in enumerate(split_rows[:2]):
                svg.polyline_plot(
                    report / f"overlay_{i}.svg",
                    [("reference", r["ref"]), ("synthetic", r["synth"])],
                    title=f"{r['record_id']} segment {r['seg_index']}",
                    x_label="sample", y_label="amplitude (z-scored)")
                with open(report / f"overlay_{i}.csv", "w", encoding="utf-8") as fh:
                    fh.write("sample,time_s,reference,synthetic\n")
                    for n, (rv, sv) in enumerate(zip(r["ref"], r["synth"])):
                        fh.write(f"{n},{n / rate!r},{rv!r},{sv!r}\n")

    with open(report / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("split," + ",".join(_METRIC_COLUMNS) + "\n")
        for split_name in ("train", "test"):
            agg = summary[split_name]
            cells = [repr(agg[c]) if isinstance(agg[c], float) else str(agg[c])
                     for c in _METRIC_COLUMNS]
            fh.write(f"{split_name}," + ",".join(cells) + "\n")
    with open(report / "segments.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(seg_lines))
        fh.write("\n")

    for split_name in ("train", "test"):
        agg = summary[split_name]
        print(f"eval[{split_name}]: n={agg['n_segments']} time_mae={agg['time_mae']:.4f} "
              f"dct_mae={agg['dct_mae']:.4f} r_median={agg['pearson_median']:.4f} "
              f"hr_mae={agg['hr_mae_median_bpm']:.2f} bpm")
    print(f"eval: report written to {report}")
    return summary


# --------------------------------------------------------------- translate

def cmd_translate(cfg: RunConfig, capture_file, model_file, out_ppg) -> RealSeries:
    capture = io.read_capture(capture_file)
    model = io.load_model(model_file)
    pcfg = cfg.to_preprocess_config()
    radio = zscore(_radio_series(capture, pcfg))
    segments = segment(radio, pcfg.seg_seconds)
    if not segments:
        raise EmptyResult("capture too short for one segment")
    seg_len = len(segments[0])
    keep = _model_dims_check(model, seg_len)
    synth = np.concatenate([_synthesize(model, s, keep, seg_len)[1] for s in segments])
    out = RealSeries(synth, pcfg.target_rate)
    io.write_ppg(out_ppg, out)
    print(f"translate: {len(segments)} segments -> {out.duration_s:.1f} s of synthetic "
          f"PPG written to {out_ppg}")
    return out


# -------------------------------------------------------------------- main

def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "scale", None) is not None:
        cfg.scale = args.scale
    if getattr(args, "model_kind", None):
        cfg.model_kind = args.model_kind
    return cfg.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfppg",
                                     description="PPG synthesis from OFDM radio captures")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value run configuration file")
        p.add_argument("--seed", type=int, help="override the config seed")

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    add_common(p_sim)
    p_sim.add_argument("--out", required=True, help="output dataset directory")
    p_sim.add_argument("--scale", type=float, help="session duration multiplier")
    p_sim.add_argument("--raw-iq", action="store_true",
                       help="also write raw received IQ per record")

    p_pre = sub.add_parser("preprocess", help="condition a dataset into segment pairs")
    add_common(p_pre)
    p_pre.add_argument("dataset", help="dataset directory (from simulate or ingestion)")
    p_pre.add_argument("--out", required=True, help="output pair archive (.npy)")

    p_train = sub.add_parser("train", help="fit a ridge or MLP translator")
    add_common(p_train)
    p_train.add_argument("pairs", help="pair archive from preprocess")
    p_train.add_argument("--model-kind", choices=("ridge", "mlp"))
    p_train.add_argument("--out", required=True, help="output model file")
    p_train.add_argument("--history", help="per-epoch loss CSV")

    p_eval = sub.add_parser("eval", help="evaluate a model on a pair archive")
    add_common(p_eval)
    p_eval.add_argument("pairs", help="pair archive from preprocess")
    p_eval.add_argument("model", help="model file from train")
    p_eval.add_argument("--out", required=True, help="report directory")

    p_tr = sub.add_parser("translate", help="synthesize PPG from a radio capture")
    add_common(p_tr)
    p_tr.add_argument("capture", help="capture file")
    p_tr.add_argument("model", help="model file from train")
    p_tr.add_argument("--out", required=True, help="output PPG file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "simulate":
            cmd_simulate(cfg, args.out, raw_iq=args.raw_iq)
        elif args.command == "preprocess":
            cmd_preprocess(cfg, args.dataset, args.out)
        elif args.command == "train":
            cmd_train(cfg, args.pairs, args.model_kind or cfg.model_kind,
                      args.out, args.history)
        elif args.command == "eval":
            cmd_eval(cfg, args.pairs, args.model, args.out)
        elif args.command == "translate":
            cmd_translate(cfg, args.capture, args.model, args.out)
        return 0
    except (RfppgError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
