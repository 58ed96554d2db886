"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 diverged
training.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import (
    ContractViolation,
    DivergedTrainingError,
    FormatError,
    KnowledgeError,
    SemstegError,
    StageError,
    UsageError,
)
from ..numerics import Rng, derive_seed
from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_config
from .data import synth_dataset
from .pnm import save_pnm

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

log = logging.getLogger("semsteg")


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semsteg", description="Image-steganography semantic communication simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="write synthetic NetPBM images")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--shape", type=int, nargs=3, default=(1, 32, 32), metavar=("C", "H", "W"))

    t = sub.add_parser("train-codec", help="train the semantic codec")
    t.add_argument("--config", required=True)
    t.add_argument("--out", help="checkpoint path (default OUTPUT_DIR/codec.ckpt)")

    s = sub.add_parser("train-stego", help="train a steganography module")
    s.add_argument("--config", required=True)
    s.add_argument("--variant", choices=("cnn", "gan", "inn"), required=True)
    s.add_argument("--strategy", choices=("two-stage", "joint", "adversarial"), required=True)
    s.add_argument("--dwt", action="store_true", help="high-frequency preprocessing of secrets")
    s.add_argument("--codec", help="codec checkpoint (otherwise trained from the config)")
    s.add_argument("--out", help="checkpoint path (default OUTPUT_DIR/stego.ckpt)")

    e = sub.add_parser("eval", help="evaluate a trained stego checkpoint")
    e.add_argument("--config", required=True)
    e.add_argument("--checkpoint", required=True)

    a = sub.add_parser("attack", help="run an eavesdropper or steganalyzer")
    a.add_argument("--mode", choices=("naive", "inversion", "steganalyzer"), required=True)
    a.add_argument("--config", required=True)
    a.add_argument("--checkpoint", help="stego checkpoint (otherwise trained from the config)")

    c = sub.add_parser("compare", help="CNN vs GAN vs INN comparison table")
    c.add_argument("--config", required=True)

    r = sub.add_parser("run", help="full experiment for the configured variant")
    r.add_argument("--config", required=True)

    rep = sub.add_parser("report", help="print a report as JSON or CSV")
    rep.add_argument("--in", dest="indir", required=True)
    rep.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _print_json(data):
    print(json.dumps(data, indent=2, sort_keys=True, default=str))


def _stego_from(args, cfg, seed):
    from . import experiment

    if getattr(args, "checkpoint", None):
        return load_checkpoint(args.checkpoint, expect_config={"codec": vars(cfg.codec)})
    covers, secrets = experiment.training_images(cfg, seed)
    codec, _ = experiment.get_codec(cfg, seed, covers)
    return experiment.fit_stego(cfg, codec, covers, secrets, seed)


def cmd_gen_data(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    images = synth_dataset(args.seed, args.n, tuple(args.shape))
    ext = "pgm" if args.shape[0] == 1 else "ppm"
    for i, img in enumerate(images):
        save_pnm(img, out / f"img_{i:05d}.{ext}")
    print(f"wrote {len(images)} images to {out}")


def cmd_train_codec(args):
    from . import experiment

    cfg = load_config(args.config)
    seed = cfg.seeds[0]
    covers, _ = experiment.training_images(cfg, seed)
    codec, seconds = experiment.get_codec(cfg, seed, covers)
    path = Path(args.out or Path(cfg.output_dir) / "codec.ckpt")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(codec, path)
    print(f"codec trained in {seconds:.1f}s -> {path}")


def cmd_train_stego(args):
    from . import experiment

    cfg = load_config(args.config)
    cfg.stego.variant, cfg.stego.strategy = args.variant, args.strategy
    cfg.stego.dwt_preprocess = cfg.stego.dwt_preprocess or args.dwt
    if args.codec:
        cfg.codec.checkpoint = args.codec
    seed = cfg.seeds[0]
    covers, secrets = experiment.training_images(cfg, seed)
    codec, _ = experiment.get_codec(cfg, seed, covers)
    model = experiment.fit_stego(cfg, codec, covers, secrets, seed)
    path = Path(args.out or Path(cfg.output_dir) / "stego.ckpt")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, path)
    print(f"{args.variant}/{args.strategy} trained ({model.train_stats['batches']} batches) -> {path}")


def cmd_eval(args):
    from . import experiment

    cfg = load_config(args.config)
    seed = cfg.seeds[0]
    model = load_checkpoint(args.checkpoint, expect_config={"codec": vars(cfg.codec)})
    test_c, test_s = experiment.eval_pairs(cfg)
    result = experiment.evaluate(model, test_c, test_s, cfg.channel_config(), Rng(derive_seed(seed, "eval")))
    result.pop("_images")
    result["steganalyzer_auc"] = experiment.steganalysis_auc(cfg, model, seed)
    result.update(variant=model.variant, strategy=model.strategy, checkpoint=str(args.checkpoint))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval.json").write_text(json.dumps(result, indent=2, sort_keys=True))
    _print_json(result)


def cmd_attack(args):
    from . import experiment

    cfg = load_config(args.config)
    seed = cfg.seeds[0]
    model = _stego_from(args, cfg, seed)
    test_c, test_s = experiment.eval_pairs(cfg)
    if args.mode == "naive":
        r = experiment.evaluate(model, test_c, test_s, cfg.channel_config(), Rng(derive_seed(seed, "eval")))
        result = {k: r[k] for k in ("eve_cover_psnr", "eve_secret_psnr", "eve_secret_deficit", "secret_psnr")}
    elif args.mode == "inversion":
        result = experiment.inversion_attack(cfg, model, test_c, test_s, seed)
    else:
        result = {"steganalyzer_auc": experiment.steganalysis_auc(cfg, model, seed)}
    result["mode"] = args.mode
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"attack_{args.mode}.json").write_text(json.dumps(result, indent=2, sort_keys=True))
    _print_json(result)


def cmd_compare(args):
    from . import experiment

    cfg = load_config(args.config)
    table = experiment.compare(cfg)
    for row in table["rows"]:
        print(
            f"{row['variant']:>4} {row['strategy']:<12} params={row['params_stego']:>8.0f} "
            f"macs={row['train_macs']:.3g} secret_psnr={row['secret_psnr']:.2f} "
            f"auc={row['steganalyzer_auc']:.3f} deficit={row['eve_secret_deficit']:.2f}"
        )
    for name, ok in table["orderings"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {Path(cfg.output_dir) / 'table2.json'} and table2.csv")


def cmd_run(args):
    from . import experiment

    cfg = load_config(args.config)
    report = experiment.run_experiment(cfg)
    _print_json(report["aggregate"])


def cmd_report(args):
    sys.stdout.write(__import__("semsteg.harness.report", fromlist=["render"]).render(args.indir, args.format))
    sys.stdout.write("\n")


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-codec": cmd_train_codec,
    "train-stego": cmd_train_stego,
    "eval": cmd_eval,
    "attack": cmd_attack,
    "compare": cmd_compare,
    "run": cmd_run,
    "report": cmd_report,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except StageError as exc:
        return _exit_for(exc.cause, f"{exc}")
    except (SemstegError, OSError) as exc:
        return _exit_for(exc, str(exc))
    return EXIT_OK


def _exit_for(exc, message) -> int:
    print(f"semsteg: error: {message}", file=sys.stderr)
    if isinstance(exc, DivergedTrainingError):
        return EXIT_DIVERGED
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, (FormatError, KnowledgeError, ContractViolation, SemstegError, OSError)):
        return EXIT_DATA
    raise exc


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
