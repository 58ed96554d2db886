"""Eavesdroppers and steganalysis.

Two knowledge models are supported. A glass-box attacker holds the
legitimate codec and decodes intercepted features directly. A closed-box
attacker only has an encode oracle (image in, features out) and its own
images, and trains a surrogate decoder from them (model inversion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .codec import CodecModel, iterate_minibatches
from .errors import ConfigurationError, DivergedTrainingError, KnowledgeError
from .numerics import (
    Adam,
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
)
from .stego.losses import binary_cross_entropy
from .stego.models import FeatureDiscriminator

GLASS_BOX = "glass-box"
CLOSED_BOX = "closed-box"


def make_encode_oracle(codec: CodecModel) -> Callable[[np.ndarray], np.ndarray]:
    """Query-only access to the legitimate encoder."""

    def oracle(images):
        with no_grad():
            return codec.encode(np.asarray(images, dtype=np.float64)).data.copy()

    return oracle


class AttackerKnowledge:
    """What an eavesdropper has. Build with :meth:`glass_box` or :meth:`closed_box`."""

    def __init__(self, mode, codec=None, oracle=None, dataset=None):
        if mode not in (GLASS_BOX, CLOSED_BOX):
            raise ConfigurationError(f"unknown attacker mode {mode!r}")
        self.mode = mode
        self._codec = codec
        self.oracle = oracle
        self.dataset = dataset

    @classmethod
    def glass_box(cls, codec: CodecModel) -> "AttackerKnowledge":
        return cls(GLASS_BOX, codec=codec)

    @classmethod
    def closed_box(cls, oracle: Callable, dataset) -> "AttackerKnowledge":
        if isinstance(oracle, Module):
            raise KnowledgeError("closed-box attackers receive an encode oracle, not a model")
        return cls(CLOSED_BOX, oracle=oracle, dataset=np.asarray(dataset, dtype=np.float64))

    @property
    def codec(self) -> CodecModel:
        if self.mode != GLASS_BOX:
            raise KnowledgeError("closed-box attacker has no access to the codec")
        return self._codec


def naive_decode(intercepted, knowledge: AttackerKnowledge) -> np.ndarray:
    """Decode intercepted features with the stolen legitimate decoder."""
    codec = knowledge.codec
    with no_grad():
        return codec.decode(as_tensor(intercepted)).data


class SurrogateDecoder(Module):
    """Attacker's decoder; same layer menu as the legitimate one."""

    def __init__(self, feature_shape, image_shape, width=16, *, rng: Rng):
        c_feat = feature_shape[0]
        c_img = image_shape[0]
        self.feature_shape = tuple(feature_shape)
        self.image_shape = tuple(image_shape)
        self.net = Sequential(
            ConvTranspose2d(c_feat, 2 * width, 3, 1, rng=rng),
            LeakyReLU(0.2),
            ConvTranspose2d(2 * width, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            ConvTranspose2d(width, c_img, 3, 2, rng=rng),
            Sigmoid(),
        )

    def forward(self, features) -> Tensor:
        return self.net(as_tensor(features))

    def reconstruct(self, features) -> np.ndarray:
        with no_grad():
            return self.forward(features).data


@dataclass(frozen=True)
class AttackTrainConfig:
    epochs: int = 20
    batch_size: int = 16
    lr: float = 2e-3
    width: int = 16


def train_inversion_attacker(knowledge: AttackerKnowledge, attacker_dataset=None, rng: Rng | None = None,
                             train: AttackTrainConfig = AttackTrainConfig()):
    """Model-inversion attack: learn a decoder from oracle queries.

    Returns ``(surrogate, history)``.
    """
    if knowledge.mode != CLOSED_BOX:
        raise KnowledgeError("model inversion is modelled for closed-box attackers")
    images = knowledge.dataset if attacker_dataset is None else np.asarray(attacker_dataset, dtype=np.float64)
    if images is None or len(images) == 0:
        raise ConfigurationError("attacker dataset is empty")
    rng = rng or Rng(0)
    features = knowledge.oracle(images)
    surrogate = SurrogateDecoder(features.shape[1:], images.shape[1:], train.width, rng=rng.spawn("init"))
    opt = Adam(surrogate.parameters(), lr=train.lr)
    shuffle = rng.spawn("shuffle")
    history = []
    for epoch in range(train.epochs):
        total = 0.0
        for idx in iterate_minibatches(len(images), train.batch_size, shuffle):
            loss = mse(surrogate(Tensor(features[idx])), Tensor(images[idx]))
            if not np.isfinite(loss.item()):
                raise DivergedTrainingError(f"inversion attacker diverged in epoch {epoch}", epoch=epoch)
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        history.append(total / len(images))
    return surrogate, history


def auc(scores_positive, scores_negative) -> float:
    """Mann-Whitney AUC: P(pos > neg) with ties counted as one half."""
    pos = np.asarray(scores_positive, dtype=np.float64).ravel()
    neg = np.asarray(scores_negative, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ConfigurationError("AUC needs nonempty positive and negative score lists")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


class Steganalyzer(FeatureDiscriminator):
    """Feature-space stego detector; output is P(stego)."""

    test_auc: float | None = None

    def score(self, features) -> np.ndarray:
        with no_grad():
            return self.forward(features).data


@dataclass(frozen=True)
class SteganalyzerTrainConfig:
    epochs: int = 15
    batch_size: int = 32
    lr: float = 1e-3
    width: int = 16


def train_steganalyzer(cover_features, stego_features, rng: Rng | None = None,
                       train: SteganalyzerTrainConfig = SteganalyzerTrainConfig()) -> Steganalyzer:
    """Binary cross-entropy detector (1 = stego, 0 = cover).

    After a seeded shuffle, every fifth sample goes to the test split; the
    held-out AUC is stored on ``test_auc``.
    """
    cover = np.asarray(cover_features, dtype=np.float64)
    stego = np.asarray(stego_features, dtype=np.float64)
    if len(cover) == 0 or len(stego) == 0:
        raise ConfigurationError("steganalyzer needs nonempty cover and stego sets")
    if cover.shape[1:] != stego.shape[1:]:
        raise ConfigurationError(f"feature shapes differ: {cover.shape[1:]} vs {stego.shape[1:]}")
    ratio = max(len(cover), len(stego)) / min(len(cover), len(stego))
    if ratio > 10:
        raise ConfigurationError(f"class imbalance {ratio:.1f}:1 exceeds 10:1")
    rng = rng or Rng(0)
    x = np.concatenate([cover, stego])
    labels = np.concatenate([np.zeros(len(cover)), np.ones(len(stego))])
    order = rng.spawn("split").permutation(len(x))
    test_idx = order[4::5]
    train_idx = np.delete(order, np.arange(4, len(order), 5))

    model = Steganalyzer(cover.shape[1:], train.width, rng=rng.spawn("init"))
    opt = Adam(model.parameters(), lr=train.lr)
    shuffle = rng.spawn("shuffle")
    xt, yt = x[train_idx], labels[train_idx]
    for epoch in range(train.epochs):
        for idx in iterate_minibatches(len(xt), train.batch_size, shuffle):
            loss = binary_cross_entropy(model(Tensor(xt[idx])), yt[idx])
            if not np.isfinite(loss.item()):
                raise DivergedTrainingError(f"steganalyzer diverged in epoch {epoch}", epoch=epoch)
            opt.zero_grad()
            loss.backward()
            opt.step()
    scores = model.score(x[test_idx])
    ytest = labels[test_idx]
    if ytest.min() == ytest.max():
        model.test_auc = float("nan")
    else:
        model.test_auc = auc(scores[ytest == 1], scores[ytest == 0])
    return model
