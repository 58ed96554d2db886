"""Semantic steganography: CNN, GAN and INN embedders plus Haar preprocessing."""

from .haar import haar_dwt, highfreq_preprocess, inverse_haar, rescale_unit
from .losses import StegoLossWeights, adversarial_losses, binary_cross_entropy, gaussian_match_penalty, generator_loss, stego_loss
from .models import (
    VARIANTS,
    CnnStego,
    FeatureDiscriminator,
    GanStego,
    ImageDiscriminator,
    InnStego,
    StegoConfig,
    StegoModel,
    build_stego_net,
    cnn_embed,
    cnn_extract,
    gan_discriminate,
    inn_forward,
    inn_inverse,
)
from .training import STRATEGIES, StegoTrainConfig, train_stego

__all__ = [
    "STRATEGIES", "VARIANTS", "CnnStego", "FeatureDiscriminator", "GanStego", "ImageDiscriminator",
    "InnStego", "StegoConfig", "StegoLossWeights", "StegoModel", "StegoTrainConfig",
    "adversarial_losses", "binary_cross_entropy", "build_stego_net", "cnn_embed", "cnn_extract", "gan_discriminate",
    "gaussian_match_penalty", "generator_loss", "haar_dwt", "highfreq_preprocess", "inn_forward",
    "inn_inverse", "inverse_haar", "rescale_unit", "stego_loss", "train_stego",
]
