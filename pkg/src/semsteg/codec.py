"""JSCC semantic encoder/decoder and its training loop."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import channel
from .errors import ConfigurationError, DivergedTrainingError, ShapeError
from .numerics import (
    Adam,
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    Module,
    Rng,
    Sequential,
    Sigmoid,
    Tensor,
    as_tensor,
    mse,
    no_grad,
    power_normalize,
)


@dataclass(frozen=True)
class CodecConfig:
    channels: int = 1
    height: int = 32
    width: int = 32
    feat_channels: int = 8
    hidden1: int = 16
    hidden2: int = 32

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ConfigurationError("images must have 1 or 3 channels")
        if self.height % 4 or self.width % 4:
            raise ConfigurationError("image height and width must be divisible by 4")

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self.channels, self.height, self.width)

    @property
    def feature_shape(self) -> tuple[int, int, int]:
        return (self.feat_channels, self.height // 4, self.width // 4)


@dataclass(frozen=True)
class CodecTrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 2e-3
    snr_db: float = 10.0


def _check_shape(x: Tensor, expected: tuple, what: str):
    got = x.shape[-3:] if x.ndim in (3, 4) else x.shape
    if x.ndim not in (3, 4) or tuple(got) != tuple(expected):
        raise ShapeError(f"{what} shape {x.shape} does not match configured {expected}")


class CodecModel(Module):
    """Encoder: two stride-2 conv stages then a stride-1 projection, power-normalized.
    Decoder mirrors it with transposed convolutions and a sigmoid output."""

    kind = "codec"

    def __init__(self, config: CodecConfig = CodecConfig(), *, rng: Rng):
        self.config = config
        c_img, c_feat = config.channels, config.feat_channels
        w1, w2 = config.hidden1, config.hidden2
        self.encoder = Sequential(
            Conv2d(c_img, w1, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Conv2d(w1, w2, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Conv2d(w2, c_feat, 3, 1, rng=rng),
        )
        self.decoder = Sequential(
            ConvTranspose2d(c_feat, w2, 3, 1, rng=rng),
            LeakyReLU(0.2),
            ConvTranspose2d(w2, w1, 3, 2, rng=rng),
            LeakyReLU(0.2),
            ConvTranspose2d(w1, c_img, 3, 2, rng=rng),
            Sigmoid(),
        )

    def encode(self, image) -> Tensor:
        image = as_tensor(image)
        _check_shape(image, self.config.image_shape, "image")
        return power_normalize(self.encoder(image))

    def decode(self, features) -> Tensor:
        features = as_tensor(features)
        _check_shape(features, self.config.feature_shape, "feature")
        return self.decoder(features)

    def config_dict(self) -> dict:
        return {"kind": self.kind, "codec": asdict(self.config)}

    @classmethod
    def from_config_dict(cls, cfg: dict) -> "CodecModel":
        return cls(CodecConfig(**cfg["codec"]), rng=Rng(0))


def encode(model: CodecModel, image) -> np.ndarray:
    with no_grad():
        return model.encode(image).data


def decode(model: CodecModel, features) -> np.ndarray:
    with no_grad():
        return model.decode(features).data


def iterate_minibatches(n: int, batch_size: int, rng: Rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def train_codec(dataset, config: CodecConfig = CodecConfig(), rng: Rng | None = None,
                train: CodecTrainConfig = CodecTrainConfig(), model: CodecModel | None = None):
    """Fit the codec end to end through an AWGN noise layer.

    Returns ``(model, history)`` where ``history`` holds the mean training
    loss of every epoch.
    """
    images = np.asarray(dataset, dtype=np.float64)
    if images.ndim != 4 or len(images) == 0:
        raise ConfigurationError("codec training needs a nonempty (N, C, H, W) dataset")
    if images.shape[1:] != config.image_shape:
        raise ConfigurationError(f"dataset images {images.shape[1:]} do not match {config.image_shape}")
    rng = rng or Rng(0)
    if model is None:
        model = CodecModel(config, rng=rng.spawn("init"))
    shuffle_rng = rng.spawn("shuffle")
    noise_rng = rng.spawn("noise")
    opt = Adam(model.parameters(), lr=train.lr)
    history = []
    for epoch in range(train.epochs):
        total, count = 0.0, 0
        for idx in iterate_minibatches(len(images), train.batch_size, shuffle_rng):
            x = Tensor(images[idx])
            z = model.encode(x)
            y = channel.awgn(z, train.snr_db, noise_rng)
            loss = mse(model.decode(y), x)
            if not np.isfinite(loss.item()):
                raise DivergedTrainingError(f"codec loss diverged in epoch {epoch}", epoch=epoch)
            opt.zero_grad()
            loss.backward()
            try:
                opt.step()
            except DivergedTrainingError as exc:
                raise DivergedTrainingError(f"codec training diverged in epoch {epoch}: {exc}", epoch=epoch)
            total += loss.item() * len(idx)
            count += len(idx)
        history.append(total / count)
    return model, history
