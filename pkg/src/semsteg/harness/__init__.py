"""Data, metrics, persistence, experiment orchestration and the CLI."""

from .checkpoint import MAGIC, load_checkpoint, read_checkpoint, save_checkpoint
from .config import ExperimentConfig, config_from_dict, default_config_dict, load_config
from .data import load_directory, make_pairs, synth_dataset
from .metrics import batch_psnr, psnr, ssim
from .pnm import load_pnm, save_pnm
from .report import csv_to_rows, report_rows, rows_to_csv

__all__ = [
    "MAGIC", "load_checkpoint", "read_checkpoint", "save_checkpoint",
    "ExperimentConfig", "config_from_dict", "default_config_dict", "load_config",
    "load_directory", "make_pairs", "synth_dataset",
    "batch_psnr", "psnr", "ssim",
    "load_pnm", "save_pnm",
    "csv_to_rows", "report_rows", "rows_to_csv",
]
