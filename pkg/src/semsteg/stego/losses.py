"""Training objectives for the steganography modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..numerics import Tensor, as_tensor, mse

CLAMP = 1e-7


@dataclass(frozen=True)
class StegoLossWeights:
    conceal: float = 1.0
    reveal: float = 1.0
    privacy: float = 1.0
    adv: float = 0.0

    def __post_init__(self):
        values = (self.conceal, self.reveal, self.privacy, self.adv)
        if any(v < 0 for v in values):
            raise ConfigurationError(f"loss weights must be non-negative, got {values}")
        if not any(v > 0 for v in values):
            raise ConfigurationError("at least one loss weight must be positive")

    def scaled(self, factor: float) -> "StegoLossWeights":
        return StegoLossWeights(*(factor * v for v in (self.conceal, self.reveal, self.privacy, self.adv)))


def _log_clamped(p: Tensor) -> Tensor:
    return p.clip(CLAMP, 1.0 - CLAMP).log()


def adversarial_losses(d_scores_real, d_scores_fake) -> tuple[Tensor, Tensor]:
    """Discriminator BCE and non-saturating generator loss.

    loss_D = -mean(log D(real)) - mean(log(1 - D(fake)))
    loss_G = -mean(log D(fake))
    """
    real = as_tensor(d_scores_real)
    fake = as_tensor(d_scores_fake)
    loss_d = -_log_clamped(real).mean() - _log_clamped(1.0 - fake).mean()
    loss_g = -_log_clamped(fake).mean()
    return loss_d, loss_g


def binary_cross_entropy(scores, labels) -> Tensor:
    """Mean BCE of probabilities ``scores`` against 0/1 ``labels``."""
    scores = as_tensor(scores)
    y = np.asarray(labels, dtype=np.float64)
    return -(_log_clamped(scores) * y + _log_clamped(1.0 - scores) * (1.0 - y)).mean()


def generator_loss(d_scores_fake) -> Tensor:
    return -_log_clamped(as_tensor(d_scores_fake)).mean()


def stego_loss(cover_img, secret_img, cover_rec_img, secret_rec_img, eve_img,
               weights: StegoLossWeights, adv_term=0.0) -> Tensor:
    """Weighted sum of conceal, reveal, privacy and adversarial terms.

    The privacy term pulls the eavesdropper's naive reconstruction toward the
    cover image.
    """
    adv = as_tensor(adv_term)
    if not np.all(np.isfinite(adv.data)):
        raise ConfigurationError("adversarial term must be finite")
    loss = (
        weights.conceal * mse(cover_rec_img, cover_img)
        + weights.reveal * mse(secret_rec_img, secret_img)
        + weights.privacy * mse(eve_img, cover_img)
    )
    if weights.adv:
        loss = loss + weights.adv * adv
    return loss


def gaussian_match_penalty(aux) -> Tensor:
    """mean(aux)^2 + (var(aux) - 1)^2 over all entries."""
    aux = as_tensor(aux)
    mu = aux.mean()
    var = (aux - mu).square().mean()
    return mu.square() + (var - 1.0).square()
