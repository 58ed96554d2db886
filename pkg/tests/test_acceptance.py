"""Acceptance criteria 1-10.

Each test records one PASS/FAIL line (shown in the terminal summary and
printed with ``-s``) before asserting. The long training runs share
module-scoped fixtures.
"""

import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS
from helpers import TINY_CONFIG, brute_force_auc, gradient_errors, layer_cases
from semsteg import channel
from semsteg.adversary import auc
from semsteg.channel import awgn, empirical_snr_db, rayleigh
from semsteg.harness import config_from_dict, load_checkpoint, load_pnm, save_checkpoint, save_pnm
from semsteg.harness.cli import EXIT_OK, cli
from semsteg.harness.experiment import eval_pairs, inversion_attack, run_experiment, run_seed, strip_timing
from semsteg.numerics import Rng
from semsteg.stego import InnStego, haar_dwt, inverse_haar

pytestmark = pytest.mark.slow


def record(n, ok, detail):
    ACCEPTANCE_RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {n}: {detail}"


@pytest.fixture(scope="module")
def inn_seed42(tmp_path_factory):
    """Default INN config, seed 42, synthetic data, 10 dB AWGN."""
    out = tmp_path_factory.mktemp("inn42")
    cfg = config_from_dict({"seeds": [42], "output_dir": str(out)}, env={})
    channel.MONITOR.reset()
    start = time.perf_counter()
    rec = run_seed(cfg, 42, sample_dir=out / "samples")
    return cfg, rec, time.perf_counter() - start, channel.MONITOR.max_deviation, channel.MONITOR.transmissions


@pytest.fixture(scope="module")
def table2(tmp_path_factory):
    """``compare`` on the default config, seeds 1, 2, 3, through the CLI."""
    work = tmp_path_factory.mktemp("compare")
    cfg_path = work / "cfg.json"
    cfg_path.write_text(json.dumps({"seeds": [1, 2, 3], "output_dir": str(work / "out")}))
    start = time.perf_counter()
    code = cli(["compare", "--config", str(cfg_path)])
    elapsed = time.perf_counter() - start
    return code, work / "out", elapsed


def test_criterion_01_gradients():
    start = time.perf_counter()
    worst, where = 0.0, ""
    for seed in range(10):
        for name, fn, arrays, params in layer_cases(seed):
            err = gradient_errors(fn, arrays, params, seed=seed, max_entries=20)
            if err > worst:
                worst, where = err, f"{name} seed {seed}"
    elapsed = time.perf_counter() - start
    record(1, worst < 1e-3 and elapsed < 30,
           f"max rel err {worst:.2e} ({where}) over 17 layer types x 10 seeds, {elapsed:.1f}s")


def test_criterion_02_inn_invertibility():
    start = time.perf_counter()
    worst = 0.0
    for draw in range(100):
        inn = InnStego((8, 8, 8), rng=Rng(draw))
        g = np.random.default_rng(draw)
        for p in inn.parameters():
            p.data = g.standard_normal(p.shape) * 0.2
        c, s = g.standard_normal((8, 8, 8)), g.standard_normal((8, 8, 8))
        stego, aux = inn.forward(c, s)
        rc, rs = inn.inverse(stego.data, aux.data)
        worst = max(worst, np.max(np.abs(rc.data - c)), np.max(np.abs(rs.data - s)))
    elapsed = time.perf_counter() - start
    record(2, worst < 1e-6 and elapsed < 5, f"max |inverse(forward(u)) - u| = {worst:.2e} over 100 draws, {elapsed:.2f}s")


def test_criterion_03_channel_calibration():
    start = time.perf_counter()
    errors = {}
    for snr in (0.0, 5.0, 10.0, 20.0):
        x = np.random.default_rng(int(snr)).standard_normal(100_000)
        x /= np.sqrt(np.mean(x**2))
        errors[("awgn", snr)] = empirical_snr_db(x, awgn(x, snr, Rng(int(snr))).data) - snr
        # 12500 transmissions of 8 symbols, SNR measured before equalization
        xb = np.random.default_rng(100 + int(snr)).standard_normal((12_500, 2, 2, 2))
        xb /= np.sqrt(np.mean(xb**2, axis=(1, 2, 3), keepdims=True))
        y, h = rayleigh(xb, snr, False, Rng(100 + int(snr)))
        errors[("rayleigh", snr)] = empirical_snr_db(xb * h.reshape(-1, 1, 1, 1), y.data) - snr
    _, h = rayleigh(np.ones((1_000_000, 1, 1, 1)), 10.0, True, Rng(7))
    eh2 = float(np.mean(h**2))
    worst = max(abs(e) for e in errors.values())
    elapsed = time.perf_counter() - start
    record(3, worst <= 0.2 and 0.99 <= eh2 <= 1.01 and elapsed < 30,
           f"max SNR error {worst:.3f} dB (awgn+rayleigh, 0/5/10/20 dB), E[h^2] = {eh2:.4f}, {elapsed:.1f}s")


def test_criterion_04_power_constraint(inn_seed42):
    *_, deviation, count = inn_seed42
    record(4, count > 0 and deviation <= 1e-6,
           f"{count} transmitted tensors in a full pipeline run, max |mean square - 1| = {deviation:.1e}")


def test_criterion_05_haar():
    start = time.perf_counter()
    rec_err = energy_err = 0.0
    g = np.random.default_rng(5)
    for _ in range(100):
        x = g.uniform(size=(1, 32, 32))
        bands = haar_dwt(x)
        rec_err = max(rec_err, np.max(np.abs(inverse_haar(*bands) - x)))
        energy_err = max(energy_err, abs(sum(np.sum(b**2) for b in bands) - np.sum(x**2)))
    elapsed = time.perf_counter() - start
    record(5, rec_err < 1e-12 and energy_err < 1e-9 and elapsed < 5,
           f"reconstruction {rec_err:.1e}, energy {energy_err:.1e} over 100 images, {elapsed:.2f}s")


def test_criterion_06_security_outcome(inn_seed42):
    _, rec, elapsed, *_ = inn_seed42
    deficit = rec["secret_psnr"] - rec["eve_secret_psnr"]
    cover_bias = rec["eve_cover_psnr"] - rec["eve_secret_psnr"]
    record(6, deficit > 5 and cover_bias > 3 and elapsed < 600,
           f"(a) legit-eve secret PSNR {deficit:.2f} dB, (b) eve cover-secret PSNR {cover_bias:.2f} dB, {elapsed:.0f}s")


def test_criterion_07_model_inversion(inn_seed42):
    cfg, rec, *_ = inn_seed42
    covers, secrets = eval_pairs(cfg)
    start = time.perf_counter()
    r = inversion_attack(cfg, rec["_model"], covers, secrets, 42)
    elapsed = time.perf_counter() - start
    bias = r["stego_vs_cover_psnr"] - r["stego_vs_secret_psnr"]
    record(7, r["clean_psnr"] >= 15 and bias > 3 and elapsed < 300,
           f"surrogate on clean features {r['clean_psnr']:.2f} dB, on INN stego cover-secret {bias:.2f} dB, "
           f"{elapsed:.0f}s")


def test_criterion_08_table2_orderings(table2):
    code, out, elapsed = table2
    table = json.loads((out / "table2.json").read_text())
    flags = table["orderings"]
    detail = ", ".join(f"{k}={'ok' if v else 'no'}" for k, v in flags.items())
    record(8, code == EXIT_OK and all(flags.values()) and (out / "table2.csv").is_file() and elapsed < 1200,
           f"{detail}, {elapsed:.0f}s")


def test_criterion_09_auc_oracle():
    start = time.perf_counter()
    g = np.random.default_rng(9)
    worst = 0.0
    for i in range(1000):
        pos = g.uniform(size=g.integers(1, 30))
        neg = g.uniform(size=g.integers(1, 30))
        if i % 2:  # coarse values force ties
            pos, neg = np.round(pos, 1), np.round(neg, 1)
        worst = max(worst, abs(auc(pos, neg) - brute_force_auc(pos, neg)))
    elapsed = time.perf_counter() - start
    record(9, worst <= 1e-12 and elapsed < 5, f"max |rank AUC - pair count| = {worst:.1e} over 1000 sets, {elapsed:.2f}s")


def test_criterion_10_determinism_and_persistence(tmp_path, inn_seed42):
    start = time.perf_counter()
    reports = []
    for name in ("a", "b"):
        data = json.loads(json.dumps(TINY_CONFIG))
        data["output_dir"] = str(tmp_path / name)
        report = run_experiment(config_from_dict(data, env={}))
        report["config"].pop("output_dir")
        reports.append(strip_timing(report))
    same_report = reports[0] == reports[1]

    model = inn_seed42[1]["_model"]
    save_checkpoint(model, tmp_path / "inn.ckpt")
    loaded = load_checkpoint(tmp_path / "inn.ckpt")
    before, after = model.state_dict(), loaded.state_dict()
    bit_exact = before.keys() == after.keys() and all(before[k].tobytes() == after[k].tobytes() for k in before)

    img = np.random.default_rng(10).uniform(size=(3, 32, 32))
    save_pnm(img, tmp_path / "x.ppm")
    pnm_err = float(np.max(np.abs(load_pnm(tmp_path / "x.ppm") - img)))
    elapsed = time.perf_counter() - start
    record(10, same_report and bit_exact and pnm_err <= 1 / 510 and elapsed < 30,
           f"reports identical={same_report}, checkpoint bit-exact={bit_exact}, "
           f"NetPBM err {pnm_err:.5f} <= {1 / 510:.5f}, {elapsed:.1f}s")
