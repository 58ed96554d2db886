import json

import numpy as np
import pytest

from helpers import TINY_CONFIG
from semsteg import channel
from semsteg.errors import StageError
from semsteg.harness import config_from_dict
from semsteg.harness.experiment import (
    REPORT_KEYS,
    SEED_KEYS,
    compare,
    eval_pairs,
    run_experiment,
    strip_timing,
    training_images,
)


def tiny(tmp_path, **overrides):
    data = json.loads(json.dumps(TINY_CONFIG))
    data.update(overrides)
    data["output_dir"] = str(tmp_path)
    return config_from_dict(data, env={})


def test_report_schema_and_ranges(tmp_path):
    report = run_experiment(tiny(tmp_path))
    assert set(REPORT_KEYS) <= set(report)
    assert report["status"] == "complete"
    rec = report["per_seed"][0]
    assert set(SEED_KEYS) == set(rec)
    for key in ("cover_psnr", "secret_psnr", "eve_cover_psnr", "eve_secret_psnr"):
        assert np.isfinite(rec[key]) and rec[key] <= 100.0
    assert -1 <= rec["cover_ssim"] <= 1 and -1 <= rec["secret_ssim"] <= 1
    assert 0 <= rec["steganalyzer_auc"] <= 1
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["per_seed"][0]["secret_psnr"] == rec["secret_psnr"]
    samples = sorted(p.name for p in (tmp_path / "seed_1" / "samples").iterdir())
    assert "00_cover.pgm" in samples and len(samples) == 4 * 5


def test_identical_configs_give_identical_reports(tmp_path):
    a = run_experiment(tiny(tmp_path / "a"))
    b = run_experiment(tiny(tmp_path / "b"))
    for r in (a, b):
        r["config"].pop("output_dir")
    assert strip_timing(a) == strip_timing(b)


def test_power_contract_holds_inline(tmp_path):
    report = run_experiment(tiny(tmp_path, channel={"kind": "rayleigh", "snr_db": 5.0}))
    assert channel.MONITOR.transmissions > 0
    assert report["max_power_deviation"] < 1e-6


def test_stage_failure_flushes_partial_report(tmp_path):
    cfg = tiny(tmp_path, seeds=[1, 2])
    cfg.codec.checkpoint = str(tmp_path / "missing.ckpt")
    with pytest.raises(StageError) as info:
        run_experiment(cfg)
    assert info.value.stage == "codec"
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "failed" and report["failed_stage"] == "codec"


def test_data_seeds_are_separate(tmp_path):
    cfg = tiny(tmp_path)
    train_c, _ = training_images(cfg, 1)
    test_c, _ = eval_pairs(cfg)
    assert len(test_c) == cfg.eval_pairs
    assert not any(np.array_equal(t, x) for t in test_c for x in train_c)


def test_compare_writes_table(tmp_path):
    table = compare(tiny(tmp_path))
    assert [r["variant"] for r in table["rows"]] == ["cnn", "gan", "inn"]
    assert set(table["orderings"]) == {
        "params_cnn_lt_inn_lt_gan", "secret_psnr_highest_inn",
        "steganalyzer_auc_lowest_gan", "training_cost_lowest_cnn",
    }
    assert table["orderings"]["params_cnn_lt_inn_lt_gan"]
    assert (tmp_path / "table2.json").is_file() and (tmp_path / "table2.csv").is_file()
    batches = {r["batches"] for r in table["rows"]}
    assert len(batches) == 1
