"""End-to-end experiment runs and the three-variant comparison."""

from __future__ import annotations

import contextlib
import csv
import json
import logging
import platform
import time
from pathlib import Path

import numpy as np

from .. import __version__, channel
from ..adversary import (
    AttackerKnowledge,
    AttackTrainConfig,
    SteganalyzerTrainConfig,
    make_encode_oracle,
    naive_decode,
    train_inversion_attacker,
    train_steganalyzer,
)
from ..codec import CodecModel, train_codec
from ..errors import ConfigurationError, StageError
from ..numerics import Rng, derive_seed, kernels, no_grad
from ..stego import StegoModel, highfreq_preprocess, train_stego
from .checkpoint import load_checkpoint
from .config import ExperimentConfig
from .data import load_directory, make_pairs, synth_dataset
from .metrics import batch_psnr, ssim
from .pnm import save_pnm

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
EVAL_SEED_OFFSET = 1_000_000
STEGANALYSIS_SEED_OFFSET = 3_000_000
N_SAMPLE_IMAGES = 4

# Keys of one per-seed record in a MetricsReport. Timing keys are excluded
# from determinism comparisons.
SEED_KEYS = (
    "seed", "variant", "strategy",
    "cover_psnr", "cover_ssim", "secret_psnr", "secret_ssim",
    "eve_cover_psnr", "eve_secret_psnr", "eve_secret_deficit",
    "steganalyzer_auc", "params_codec", "params_stego", "params_total",
    "secret_rate", "epochs", "batches", "train_macs",
    "codec_seconds", "stego_seconds", "sample_digest",
)
TIMING_KEYS = ("codec_seconds", "stego_seconds")
REPORT_KEYS = ("schema_version", "status", "config", "per_seed", "aggregate", "artifact_versions")

VARIANT_RUNS = (("cnn", "two-stage"), ("gan", "adversarial"), ("inn", "two-stage"))


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def artifact_versions() -> dict:
    return {
        "semsteg": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "kernel_backend": kernels.BACKEND,
        "schema": SCHEMA_VERSION,
    }


def training_images(cfg: ExperimentConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(covers, secrets) used for training under experiment seed ``seed``."""
    shape = cfg.codec.model_config().image_shape
    if cfg.dataset.source == "directory":
        return make_pairs(load_directory(cfg.dataset.path, shape))
    return make_pairs(synth_dataset(cfg.dataset.seed + seed, 2 * cfg.dataset.size, shape))


def eval_pairs(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    shape = cfg.codec.model_config().image_shape
    return make_pairs(synth_dataset(cfg.dataset.seed + EVAL_SEED_OFFSET, 2 * cfg.eval_pairs, shape))


def steganalysis_images(cfg: ExperimentConfig):
    """Disjoint image sets: covers for the cover class, pairs for the stego class."""
    shape = cfg.codec.model_config().image_shape
    n = cfg.adversary.steganalyzer_samples
    imgs = synth_dataset(cfg.dataset.seed + STEGANALYSIS_SEED_OFFSET, 3 * n, shape)
    return imgs[:n], imgs[n : 2 * n], imgs[2 * n :]


def get_codec(cfg: ExperimentConfig, seed: int, covers: np.ndarray) -> tuple[CodecModel, float]:
    start = time.perf_counter()
    if cfg.codec.checkpoint:
        codec = load_checkpoint(cfg.codec.checkpoint, expect_config={"codec": vars(cfg.codec)})
        if not isinstance(codec, CodecModel):
            raise ConfigurationError(f"{cfg.codec.checkpoint} is not a codec checkpoint")
    else:
        codec, _ = train_codec(covers, cfg.codec.model_config(), Rng(derive_seed(seed, "codec")),
                               cfg.codec.train_config())
    return codec, time.perf_counter() - start


def fit_stego(cfg: ExperimentConfig, codec: CodecModel, covers, secrets, seed: int,
              variant: str | None = None, strategy: str | None = None) -> StegoModel:
    model, _ = train_stego(
        variant or cfg.stego.variant,
        strategy or cfg.stego.strategy,
        codec, covers, secrets,
        weights=cfg.stego.weights(),
        channel_config=cfg.channel_config(),
        rng=Rng(derive_seed(seed, "stego")),
        config=cfg.stego.model_config(),
        train=cfg.stego.train_config(),
        dwt_preprocess=cfg.stego.dwt_preprocess,
    )
    return model


def transmit_batch(model: StegoModel, covers, secrets):
    """Stego features ready for the channel (no grad)."""
    with no_grad():
        fc = model.codec.encode(covers)
        fs = model.codec.encode(secrets)
        stego, _ = model.net.embed_features(fc, fs)
    return stego.data


def evaluate(model: StegoModel, covers, secrets, channel_config: channel.ChannelConfig, rng: Rng) -> dict:
    """Legitimate and glass-box eavesdropper reconstruction quality."""
    targets = highfreq_preprocess(secrets) if model.dwt_preprocess else secrets
    stego = transmit_batch(model, covers, targets)
    legit, eve = channel.tap(stego, channel_config, rng)
    with no_grad():
        cover_f, secret_f = model.net.receive(legit, rng)
        cover_rec = model.codec.decode(cover_f).data
        secret_rec = model.codec.decode(secret_f).data
    eve_img = naive_decode(eve.data, AttackerKnowledge.glass_box(model.codec))
    eve_cover = batch_psnr(eve_img, covers)
    eve_secret = batch_psnr(eve_img, targets)
    secret_psnr = batch_psnr(secret_rec, targets)
    return {
        "cover_psnr": batch_psnr(cover_rec, covers),
        "cover_ssim": ssim(cover_rec, covers),
        "secret_psnr": secret_psnr,
        "secret_ssim": ssim(secret_rec, targets),
        "eve_cover_psnr": eve_cover,
        "eve_secret_psnr": eve_secret,
        "eve_secret_deficit": secret_psnr - eve_secret,
        "_images": {
            "cover": covers, "secret": targets, "cover_rec": cover_rec,
            "secret_rec": secret_rec, "eve": eve_img,
        },
    }


def steganalysis_auc(cfg: ExperimentConfig, model: StegoModel, seed: int) -> float:
    """Held-out AUC of a detector trained fresh against the frozen ``model``."""
    cover_imgs, pair_c, pair_s = steganalysis_images(cfg)
    if model.dwt_preprocess:
        pair_s = highfreq_preprocess(pair_s)
    with no_grad():
        cover_f = model.codec.encode(cover_imgs).data
    stego_f = transmit_batch(model, pair_c, pair_s)
    if cfg.adversary.observe == "post-channel":
        rng = Rng(derive_seed(seed, "steganalysis-channel"))
        ch = cfg.channel_config()
        cover_f = channel.transmit(cover_f, ch.eve_snr, ch, rng).data
        stego_f = channel.transmit(stego_f, ch.eve_snr, ch, rng).data
    analyzer = train_steganalyzer(
        cover_f, stego_f, Rng(derive_seed(seed, "steganalyzer")),
        SteganalyzerTrainConfig(epochs=cfg.adversary.steganalyzer_epochs),
    )
    return analyzer.test_auc


def inversion_attack(cfg: ExperimentConfig, model: StegoModel, covers, secrets, seed: int) -> dict:
    """Closed-box model inversion against unprotected and stego transmissions."""
    shape = cfg.codec.model_config().image_shape
    attacker_imgs = synth_dataset(cfg.attacker_seed, cfg.adversary.attacker_size + cfg.eval_pairs, shape)
    own, held_out = attacker_imgs[: cfg.adversary.attacker_size], attacker_imgs[cfg.adversary.attacker_size :]
    knowledge = AttackerKnowledge.closed_box(make_encode_oracle(model.codec), own)
    surrogate, _ = train_inversion_attacker(
        knowledge, rng=Rng(derive_seed(seed, "inversion")),
        train=AttackTrainConfig(epochs=cfg.adversary.attacker_epochs),
    )
    clean = surrogate.reconstruct(knowledge.oracle(held_out))
    ch = cfg.channel_config()
    targets = highfreq_preprocess(secrets) if model.dwt_preprocess else secrets
    stego = transmit_batch(model, covers, targets)
    intercepted = channel.transmit(stego, ch.eve_snr, ch, Rng(derive_seed(seed, "inversion-channel")))
    rec = surrogate.reconstruct(intercepted.data)
    return {
        "clean_psnr": batch_psnr(clean, held_out),
        "stego_vs_cover_psnr": batch_psnr(rec, covers),
        "stego_vs_secret_psnr": batch_psnr(rec, targets),
    }


def _save_samples(images: dict, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    for key, batch in images.items():
        for i in range(min(N_SAMPLE_IMAGES, len(batch))):
            ext = "pgm" if batch[i].shape[0] == 1 else "ppm"
            save_pnm(batch[i], directory / f"{i:02d}_{key}.{ext}")


def run_seed(cfg: ExperimentConfig, seed: int, variant: str | None = None, strategy: str | None = None,
             codec: CodecModel | None = None, codec_seconds: float = 0.0, sample_dir: Path | None = None) -> dict:
    """Full pipeline for one seed; returns a per-seed record (see SEED_KEYS)."""
    variant = variant or cfg.stego.variant
    strategy = strategy or cfg.stego.strategy
    with stage("data"):
        covers, secrets = training_images(cfg, seed)
        test_c, test_s = eval_pairs(cfg)
    if codec is None:
        with stage("codec"):
            codec, codec_seconds = get_codec(cfg, seed, covers)
    with stage("stego"):
        model = fit_stego(cfg, codec, covers, secrets, seed, variant, strategy)
    with stage("evaluate"):
        metrics = evaluate(model, test_c, test_s, cfg.channel_config(), Rng(derive_seed(seed, "eval")))
    with stage("steganalysis"):
        metrics["steganalyzer_auc"] = steganalysis_auc(cfg, model, seed)
    images = metrics.pop("_images")
    if sample_dir is not None:
        _save_samples(images, sample_dir)
    stats = model.train_stats
    c = codec.config.feat_channels
    record = {
        "seed": seed,
        "variant": variant,
        "strategy": strategy,
        **metrics,
        "params_codec": codec.num_parameters(),
        "params_stego": model.stego_parameter_count(),
        "params_total": codec.num_parameters() + model.stego_parameter_count(),
        "secret_rate": c / (2 * c),
        "epochs": stats["epochs"],
        "batches": stats["batches"],
        "train_macs": stats["macs"],
        "codec_seconds": codec_seconds,
        "stego_seconds": stats["seconds"],
        "sample_digest": stats["sample_digest"],
    }
    record["_model"] = model
    return record


def aggregate(records: list[dict]) -> dict:
    out = {}
    for key in SEED_KEYS:
        values = [r[key] for r in records if isinstance(r.get(key), (int, float)) and not isinstance(r.get(key), bool)]
        if key != "seed" and values and len(values) == len(records):
            out[key] = float(np.median(values))
    return out


def _write_json(path: Path, data: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True))


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Train and evaluate the configured variant for every seed.

    Writes ``report.json`` and sample images under ``output_dir`` (default
    ``cfg.output_dir``). On failure the partial report is flushed with
    ``status = "failed"`` before the error propagates.
    """
    out = Path(output_dir or cfg.output_dir)
    report = {
        "schema_version": SCHEMA_VERSION,
        "status": "running",
        "config": cfg.to_dict(),
        "per_seed": [],
        "aggregate": {},
        "artifact_versions": artifact_versions(),
    }
    channel.MONITOR.reset()
    try:
        for seed in cfg.seeds:
            record = run_seed(cfg, seed, sample_dir=out / f"seed_{seed}" / "samples")
            record.pop("_model")
            report["per_seed"].append(record)
    except StageError as exc:
        report["status"] = "failed"
        report["failed_stage"] = exc.stage
        report["error"] = str(exc.cause)
        report["aggregate"] = aggregate(report["per_seed"]) if report["per_seed"] else {}
        _write_json(out / "report.json", report)
        raise
    report["status"] = "complete"
    report["aggregate"] = aggregate(report["per_seed"])
    report["max_power_deviation"] = channel.MONITOR.max_deviation
    _write_json(out / "report.json", report)
    return report


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall-clock fields (for determinism checks)."""
    clean = json.loads(json.dumps(report))
    for rec in clean.get("per_seed", []):
        for key in TIMING_KEYS:
            rec.pop(key, None)
    for key in TIMING_KEYS:
        clean.get("aggregate", {}).pop(key, None)
    for row in clean.get("rows", []):
        for key in TIMING_KEYS + ("train_seconds",):
            row.pop(key, None)
    return clean


# -- three-variant comparison ---------------------------------------------

TABLE_COLUMNS = (
    "variant", "strategy", "train_seconds", "train_macs", "epochs", "batches", "params_stego",
    "params_total", "secret_rate", "secret_psnr", "cover_psnr", "steganalyzer_auc", "eve_secret_deficit",
)


def _orderings(rows: dict) -> dict:
    p = {v: rows[v]["params_stego"] for v in rows}
    s = {v: rows[v]["secret_psnr"] for v in rows}
    a = {v: rows[v]["steganalyzer_auc"] for v in rows}
    m = {v: rows[v]["train_macs"] for v in rows}
    return {
        "params_cnn_lt_inn_lt_gan": bool(p["cnn"] < p["inn"] < p["gan"]),
        "secret_psnr_highest_inn": bool(s["inn"] > max(s["cnn"], s["gan"])),
        "steganalyzer_auc_lowest_gan": bool(a["gan"] < min(a["cnn"], a["inn"])),
        "training_cost_lowest_cnn": bool(m["cnn"] < min(m["gan"], m["inn"])),
    }


def compare(cfg: ExperimentConfig, output_dir=None) -> dict:
    """Run CNN (two-stage), GAN (adversarial) and INN (two-stage) under matched budgets.

    Each seed trains one codec shared by the three variants; every variant
    sees the same training-sample sequence. Writes ``table2.json`` and
    ``table2.csv``.
    """
    out = Path(output_dir or cfg.output_dir)
    per_seed = {v: [] for v, _ in VARIANT_RUNS}
    channel.MONITOR.reset()
    for seed in cfg.seeds:
        with stage("data"):
            covers, _ = training_images(cfg, seed)
        with stage("codec"):
            codec, codec_seconds = get_codec(cfg, seed, covers)
        digests = set()
        for variant, strategy in VARIANT_RUNS:
            rec = run_seed(cfg, seed, variant, strategy, codec=codec, codec_seconds=codec_seconds,
                           sample_dir=out / variant / f"seed_{seed}" / "samples")
            rec.pop("_model")
            digests.add(rec["sample_digest"])
            per_seed[variant].append(rec)
        if len(digests) != 1:
            raise StageError("compare", ConfigurationError(f"seed {seed}: variants saw different sample sequences"))

    rows = {}
    for variant, strategy in VARIANT_RUNS:
        agg = aggregate(per_seed[variant])
        row = {"variant": variant, "strategy": strategy}
        for col in TABLE_COLUMNS[2:]:
            row[col] = agg["stego_seconds"] if col == "train_seconds" else agg[col]
        rows[variant] = row
    table = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "seeds": list(cfg.seeds),
        "rows": [rows[v] for v, _ in VARIANT_RUNS],
        "orderings": _orderings(rows),
        "per_seed": {v: per_seed[v] for v in per_seed},
        "max_power_deviation": channel.MONITOR.max_deviation,
        "anti_eavesdropping_mapping": "steganalyzer AUC (lower is better) and eve secret-PSNR deficit (higher is better)",
        "capacity_definition": "secret_rate = secret channels / total channels; secret_psnr at that rate",
        "artifact_versions": artifact_versions(),
    }
    table["all_orderings_hold"] = all(table["orderings"].values())
    _write_json(out / "table2.json", table)
    with open(out / "table2.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS)
        writer.writeheader()
        for row in table["rows"]:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return table
