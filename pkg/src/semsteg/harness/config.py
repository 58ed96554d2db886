"""Experiment configuration: strict JSON with a default for every field.

Unknown keys anywhere in the file are rejected. ``SEMSTEG_SEED`` in the
environment replaces the ``seeds`` list (comma-separated integers).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..channel import ChannelConfig
from ..codec import CodecConfig, CodecTrainConfig
from ..errors import ConfigurationError
from ..stego.losses import StegoLossWeights
from ..stego.models import VARIANTS, StegoConfig
from ..stego.training import STRATEGIES, StegoTrainConfig

SEED_ENV = "SEMSTEG_SEED"


@dataclass
class CodecSection:
    channels: int = 1
    height: int = 32
    width: int = 32
    feat_channels: int = 8
    hidden1: int = 16
    hidden2: int = 32
    train_snr_db: float = 10.0
    epochs: int = 30
    lr: float = 2e-3
    batch_size: int = 16
    checkpoint: str | None = None

    def model_config(self) -> CodecConfig:
        return CodecConfig(self.channels, self.height, self.width, self.feat_channels, self.hidden1, self.hidden2)

    def train_config(self) -> CodecTrainConfig:
        return CodecTrainConfig(self.epochs, self.batch_size, self.lr, self.train_snr_db)


@dataclass
class StegoSection:
    variant: str = "inn"
    strategy: str = "two-stage"
    conceal: float = 1.0
    reveal: float = 1.0
    privacy: float = 1.0
    adv: float = 0.1
    n_blocks: int = 3
    width: int = 16
    disc_width: int = 24
    dwt_preprocess: bool = False
    epochs: int = 20
    lr: float = 1e-3
    disc_lr: float = 2e-3
    batch_size: int = 16
    aux_weight: float = 0.1
    adv_beta1: float = 0.5

    def weights(self) -> StegoLossWeights:
        return StegoLossWeights(self.conceal, self.reveal, self.privacy, self.adv)

    def model_config(self) -> StegoConfig:
        return StegoConfig(self.width, self.n_blocks, self.disc_width)

    def train_config(self) -> StegoTrainConfig:
        return StegoTrainConfig(self.epochs, self.batch_size, self.lr, self.disc_lr, self.aux_weight, self.adv_beta1)


@dataclass
class ChannelSection:
    kind: str = "awgn"
    snr_db: float = 10.0
    equalize: bool = True


@dataclass
class AdversarySection:
    eve_snr_db: float | None = None
    attacker_seed: int | None = None
    attacker_size: int = 400
    attacker_epochs: int = 20
    steganalyzer_samples: int = 256
    steganalyzer_epochs: int = 15
    observe: str = "post-channel"


@dataclass
class DatasetSection:
    source: str = "synthetic"
    size: int = 400
    seed: int = 0
    path: str | None = None


@dataclass
class ExperimentConfig:
    codec: CodecSection = field(default_factory=CodecSection)
    stego: StegoSection = field(default_factory=StegoSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    adversary: AdversarySection = field(default_factory=AdversarySection)
    dataset: DatasetSection = field(default_factory=DatasetSection)
    seeds: list = field(default_factory=lambda: [42])
    eval_pairs: int = 64
    output_dir: str = "runs/default"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.seeds:
            raise ConfigurationError("seeds must be nonempty")
        if self.stego.variant not in VARIANTS:
            raise ConfigurationError(f"stego.variant must be one of {VARIANTS}")
        if self.stego.strategy not in STRATEGIES:
            raise ConfigurationError(f"stego.strategy must be one of {STRATEGIES}")
        if self.dataset.source not in ("synthetic", "directory"):
            raise ConfigurationError("dataset.source must be 'synthetic' or 'directory'")
        if self.dataset.source == "directory" and not self.dataset.path:
            raise ConfigurationError("dataset.path is required for directory datasets")
        if self.adversary.observe not in ("post-channel", "pre-channel"):
            raise ConfigurationError("adversary.observe must be 'post-channel' or 'pre-channel'")
        if self.dataset.size < 2 or self.eval_pairs < 1:
            raise ConfigurationError("dataset.size must be >= 2 and eval_pairs >= 1")
        self.codec.model_config()
        self.stego.weights()
        self.channel_config()

    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(self.channel.kind, self.channel.snr_db, self.adversary.eve_snr_db, self.channel.equalize)

    @property
    def attacker_seed(self) -> int:
        a = self.adversary.attacker_seed
        return self.dataset.seed + 2_000_000 if a is None else a

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where or 'config'} must be a JSON object")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{where}.{name}" if where else name)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict, env: dict | None = None) -> ExperimentConfig:
    cfg = _build(ExperimentConfig, dict(data), "")
    env = os.environ if env is None else env
    override = env.get(SEED_ENV)
    if override:
        try:
            cfg.seeds = [int(s) for s in override.split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"{SEED_ENV} must be comma-separated integers") from exc
        cfg.validate()
    return cfg


def load_config(path, env: dict | None = None) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data, env)


def default_config_dict() -> dict:
    return ExperimentConfig().to_dict()
