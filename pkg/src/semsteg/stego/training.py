"""Training driver for the steganography variants.

Strategies:

* ``two-stage``: the codec is frozen, only the steganography module learns;
* ``joint``: a copy of the codec is fine-tuned together with the module;
* ``adversarial``: two-stage plus discriminator(s) updated once per
  generator step. CNN and INN variants get a feature-space detector of the
  same design as the GAN's first discriminator.
"""

from __future__ import annotations

import copy
import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .. import channel
from ..codec import CodecModel, iterate_minibatches
from ..errors import ConfigurationError, DivergedTrainingError
from ..numerics import Adam, Rng, Tensor, concat, count_macs, no_grad
from .haar import highfreq_preprocess
from .losses import StegoLossWeights, adversarial_losses, gaussian_match_penalty, generator_loss, stego_loss
from .models import VARIANTS, GanStego, StegoConfig, StegoModel

STRATEGIES = ("two-stage", "joint", "adversarial")


@dataclass(frozen=True)
class StegoTrainConfig:
    epochs: int = 20
    batch_size: int = 16
    lr: float = 1e-3
    disc_lr: float = 2e-3
    aux_weight: float = 0.1
    adv_beta1: float = 0.5


def _split_batch(x: Tensor, b: int):
    return x[0:b], x[b : 2 * b], x[2 * b : 3 * b]


def train_stego(variant: str, strategy: str, codec: CodecModel, covers, secrets,
                weights: StegoLossWeights = StegoLossWeights(),
                channel_config: channel.ChannelConfig = channel.ChannelConfig(),
                rng: Rng | None = None, config: StegoConfig = StegoConfig(),
                train: StegoTrainConfig = StegoTrainConfig(), dwt_preprocess: bool = False):
    """Train one steganography module; returns ``(StegoModel, history)``.

    ``history`` is the mean total loss per epoch. Training statistics
    (batches, MACs, wall-clock, digest of the sample order) are left on
    ``model.train_stats``.
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}")
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}")
    covers = np.asarray(covers, dtype=np.float64)
    secrets = np.asarray(secrets, dtype=np.float64)
    if len(covers) == 0 or covers.shape != secrets.shape:
        raise ConfigurationError("need a nonempty set of equally shaped (cover, secret) pairs")
    rng = rng or Rng(0)
    if dwt_preprocess:
        secrets = highfreq_preprocess(secrets)

    frozen = strategy in ("two-stage", "adversarial")
    if not frozen:
        codec = copy.deepcopy(codec)
    model = StegoModel(variant, codec, config, rng=rng.spawn("init", variant), strategy=strategy,
                       dwt_preprocess=dwt_preprocess)
    net = model.net
    adversarial = strategy == "adversarial"
    if isinstance(net, GanStego):
        gen_params = net.generator_parameters()
        disc_modules = [net.disc_feature, net.disc_image] if adversarial else []
        feature_disc = net.disc_feature
    else:
        gen_params = net.parameters()
        disc_modules = [model.detector] if adversarial else []
        feature_disc = model.detector
    image_disc = net.disc_image if (adversarial and isinstance(net, GanStego)) else None
    disc_params = [p for m in disc_modules for p in m.parameters()]

    codec.set_trainable(not frozen)
    if not frozen:
        gen_params = gen_params + codec.parameters()
    beta1 = train.adv_beta1 if adversarial else 0.9
    opt_g = Adam(gen_params, lr=train.lr, beta1=beta1)
    opt_d = Adam(disc_params, lr=train.disc_lr, beta1=beta1) if disc_params else None

    if frozen:
        with no_grad():
            cover_feats = codec.encode(covers).data
            secret_feats = codec.encode(secrets).data

    shuffle_rng = rng.spawn("shuffle")
    noise_rng = rng.spawn("noise")
    aux_rng = rng.spawn("aux")
    digest = hashlib.sha256()
    history, batches = [], 0
    start = time.perf_counter()
    with count_macs() as macs:
        for epoch in range(train.epochs):
            total, count = 0.0, 0
            for idx in iterate_minibatches(len(covers), train.batch_size, shuffle_rng):
                digest.update(np.asarray(idx, dtype=np.int64).tobytes())
                b = len(idx)
                xc, xs = Tensor(covers[idx]), Tensor(secrets[idx])
                if frozen:
                    fc, fs = Tensor(cover_feats[idx]), Tensor(secret_feats[idx])
                else:
                    fc, fs = codec.encode(xc), codec.encode(xs)

                for m in disc_modules:
                    m.set_trainable(False)
                stego, aux = net.embed_features(fc, fs)
                noisy = channel.transmit(stego, channel_config.snr_db, channel_config, noise_rng)
                cover_rec, secret_rec = net.receive(noisy, aux_rng)
                images = codec.decode(concat([cover_rec, secret_rec, noisy], axis=0))
                cover_img, secret_img, eve_img = _split_batch(images, b)

                adv_term = 0.0
                if adversarial:
                    adv_term = generator_loss(feature_disc(noisy))
                    if image_disc is not None:
                        adv_term = adv_term + generator_loss(image_disc(eve_img))
                loss = stego_loss(xc, xs, cover_img, secret_img, eve_img, weights, adv_term)
                if aux is not None and train.aux_weight:
                    loss = loss + train.aux_weight * gaussian_match_penalty(aux)
                value = loss.item()
                if not np.isfinite(value):
                    raise DivergedTrainingError(f"stego loss diverged in epoch {epoch}", epoch=epoch)
                opt_g.zero_grad()
                loss.backward()
                try:
                    opt_g.step()
                except DivergedTrainingError as exc:
                    raise DivergedTrainingError(f"stego training diverged in epoch {epoch}: {exc}", epoch=epoch)

                if adversarial:
                    for m in disc_modules:
                        m.set_trainable(True)
                    with no_grad():
                        noisy_cover = channel.transmit(Tensor(fc.data), channel_config.snr_db, channel_config, noise_rng)
                    d_real = feature_disc(noisy_cover)
                    d_fake = feature_disc(noisy.detach())
                    loss_d, _ = adversarial_losses(d_real, d_fake)
                    if image_disc is not None:
                        with no_grad():
                            clean_img = codec.decode(noisy_cover)
                        l2, _ = adversarial_losses(image_disc(clean_img), image_disc(eve_img.detach()))
                        loss_d = loss_d + l2
                    opt_d.zero_grad()
                    loss_d.backward()
                    opt_d.step()

                total += value * b
                count += b
                batches += 1
            history.append(total / count)
    codec.set_trainable(True)
    for m in disc_modules:
        m.set_trainable(True)
    model.train_stats = {
        "epochs": train.epochs,
        "batches": batches,
        "macs": macs.count,
        "seconds": time.perf_counter() - start,
        "sample_digest": digest.hexdigest(),
    }
    return model, history
