"""CNN, GAN and INN steganography modules operating on semantic features.

All three expose the same two halves used by the pipeline:

* ``embed_features(cover, secret)`` -> ``(stego, aux)`` where ``stego`` is
  power-normalized and ready for the channel, and ``aux`` is the INN's
  untransmitted half (``None`` for the other variants);
* ``receive(noisy_stego, rng)`` -> ``(cover_rec, secret_rec)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..codec import CodecConfig, CodecModel
from ..errors import ConfigurationError, ShapeError
from ..numerics import (
    Conv2d,
    Dense,
    Flatten,
    LeakyReLU,
    Module,
    Rng,
    Sequential,
    Sigmoid,
    Tensor,
    as_tensor,
    concat,
    power_normalize,
    split,
)

VARIANTS = ("cnn", "gan", "inn")


@dataclass(frozen=True)
class StegoConfig:
    width: int = 16
    n_blocks: int = 3
    disc_width: int = 24


def _check_features(x: Tensor, shape, what="feature"):
    if x.ndim not in (3, 4) or tuple(x.shape[-3:]) != tuple(shape):
        raise ShapeError(f"{what} shape {x.shape} does not match configured {tuple(shape)}")


def conv_stack(c_in, c_out, width, depth, *, rng, zero_last=True) -> Sequential:
    layers = [Conv2d(c_in, width, 3, rng=rng), LeakyReLU(0.2)]
    for _ in range(depth - 2):
        layers += [Conv2d(width, width, 3, rng=rng), LeakyReLU(0.2)]
    layers.append(Conv2d(width, c_out, 3, rng=rng, zero_init=zero_last))
    return Sequential(*layers)


class FeatureDiscriminator(Module):
    """Feature-space classifier: two stride-2 convs, dense head, sigmoid."""

    def __init__(self, feature_shape, width, *, rng):
        c, h, w = feature_shape
        h2, w2 = (h + 1) // 2, (w + 1) // 2
        h4, w4 = (h2 + 1) // 2, (w2 + 1) // 2
        self.net = Sequential(
            Conv2d(c, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Conv2d(width, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Flatten(),
            Dense(width * h4 * w4, 1, rng=rng),
            Sigmoid(),
        )
        self.input_shape = tuple(feature_shape)

    def forward(self, x) -> Tensor:
        x = as_tensor(x)
        _check_features(x, self.input_shape, "discriminator input")
        if x.ndim == 3:
            x = x.reshape((1,) + x.shape)
        out = self.net(x)
        return out.reshape(out.shape[0])


class ImageDiscriminator(Module):
    """Image-space classifier: three stride-2 convs, dense head, sigmoid."""

    def __init__(self, image_shape, width, *, rng):
        c, h, w = image_shape
        for _ in range(3):
            h, w = (h + 1) // 2, (w + 1) // 2
        self.net = Sequential(
            Conv2d(c, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Conv2d(width, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Conv2d(width, width, 3, 2, rng=rng),
            LeakyReLU(0.2),
            Flatten(),
            Dense(width * h * w, 1, rng=rng),
            Sigmoid(),
        )
        self.input_shape = tuple(image_shape)

    def forward(self, x) -> Tensor:
        x = as_tensor(x)
        _check_features(x, self.input_shape, "image discriminator input")
        if x.ndim == 3:
            x = x.reshape((1,) + x.shape)
        out = self.net(x)
        return out.reshape(out.shape[0])


class CnnStego(Module):
    """Residual conv embedder (2c -> c) and conv extractor (c -> 2c)."""

    variant = "cnn"

    def __init__(self, feature_shape, config: StegoConfig = StegoConfig(), *, rng: Rng):
        c = feature_shape[0]
        self.feature_shape = tuple(feature_shape)
        self.embed_net = conv_stack(2 * c, c, config.width, 3, rng=rng, zero_last=True)
        self.extract_net = conv_stack(c, 2 * c, config.width, 3, rng=rng, zero_last=False)

    def embed_raw(self, cover, secret) -> Tensor:
        cover, secret = as_tensor(cover), as_tensor(secret)
        _check_features(cover, self.feature_shape, "cover feature")
        _check_features(secret, self.feature_shape, "secret feature")
        axis = cover.ndim - 3
        return cover + self.embed_net(concat([cover, secret], axis=axis))

    def embed(self, cover, secret) -> Tensor:
        return power_normalize(self.embed_raw(cover, secret))

    def embed_features(self, cover, secret):
        return self.embed(cover, secret), None

    def extract(self, noisy) -> tuple[Tensor, Tensor]:
        noisy = as_tensor(noisy)
        _check_features(noisy, self.feature_shape)
        out = self.extract_net(noisy)
        return split(out, self.feature_shape[0], axis=out.ndim - 3)

    def receive(self, noisy, rng=None):
        return self.extract(noisy)


class GanStego(CnnStego):
    """CNN generator/extractor plus a feature-space and an image-space discriminator."""

    variant = "gan"

    def __init__(self, feature_shape, image_shape, config: StegoConfig = StegoConfig(), *, rng: Rng):
        super().__init__(feature_shape, config, rng=rng)
        self.image_shape = tuple(image_shape)
        self.disc_feature = FeatureDiscriminator(feature_shape, config.disc_width, rng=rng)
        self.disc_image = ImageDiscriminator(image_shape, config.disc_width, rng=rng)

    def generator_parameters(self):
        return self.embed_net.parameters() + self.extract_net.parameters()

    def discriminator_parameters(self):
        return self.disc_feature.parameters() + self.disc_image.parameters()

    def discriminate(self, which: str, sample) -> Tensor:
        if which == "feature":
            return self.disc_feature(sample)
        if which == "image":
            return self.disc_image(sample)
        raise ConfigurationError(f"unknown discriminator {which!r}")


class InnStego(Module):
    """Additive coupling blocks over the 2c-channel state concat(cover, secret).

    Forward, per block: ``p1 += phi(p2)``, then ``p2 += psi(p1)``. The first
    c output channels are the stego features and the rest is the auxiliary
    half, which is never transmitted.
    """

    variant = "inn"

    def __init__(self, feature_shape, config: StegoConfig = StegoConfig(), *, rng: Rng | None = None,
                 subnets=None):
        self.feature_shape = tuple(feature_shape)
        c = feature_shape[0]
        if subnets is None:
            if rng is None:
                raise ConfigurationError("rng required to initialize subnets")
            subnets = [
                (conv_stack(c, c, config.width, 2, rng=rng), conv_stack(c, c, config.width, 2, rng=rng))
                for _ in range(config.n_blocks)
            ]
        self.phi = [p for p, _ in subnets]
        self.psi = [q for _, q in subnets]

    @classmethod
    def from_subnets(cls, feature_shape, subnets) -> "InnStego":
        """Build from explicit ``(phi, psi)`` callables, e.g. for hand checks."""
        return cls(feature_shape, subnets=list(subnets))

    @property
    def n_blocks(self) -> int:
        return len(self.phi)

    def _check(self, a, b):
        a, b = as_tensor(a), as_tensor(b)
        _check_features(a, self.feature_shape)
        _check_features(b, self.feature_shape)
        if a.shape != b.shape:
            raise ShapeError(f"inputs differ in shape: {a.shape} vs {b.shape}")
        return a, b

    def forward(self, cover, secret) -> tuple[Tensor, Tensor]:
        """Raw (pre-normalization) stego features and auxiliary half."""
        p1, p2 = self._check(cover, secret)
        for phi, psi in zip(self.phi, self.psi):
            p1 = p1 + phi(p2)
            p2 = p2 + psi(p1)
        return p1, p2

    def inverse(self, stego, aux) -> tuple[Tensor, Tensor]:
        p1, p2 = self._check(stego, aux)
        for phi, psi in zip(reversed(self.phi), reversed(self.psi)):
            p2 = p2 - psi(p1)
            p1 = p1 - phi(p2)
        return p1, p2

    def embed_features(self, cover, secret):
        stego, aux = self.forward(cover, secret)
        return power_normalize(stego), aux

    def embed(self, cover, secret) -> Tensor:
        return self.embed_features(cover, secret)[0]

    def receive(self, noisy, rng: Rng):
        noisy = as_tensor(noisy)
        aux = Tensor(rng.normal(noisy.shape))
        return self.inverse(noisy, aux)


def inn_forward(model: InnStego, cover_feat, secret_feat):
    return model.forward(cover_feat, secret_feat)


def inn_inverse(model: InnStego, received_stego, aux_sample):
    return model.inverse(received_stego, aux_sample)


def cnn_embed(model: CnnStego, cover_feat, secret_feat) -> Tensor:
    return model.embed(cover_feat, secret_feat)


def cnn_extract(model: CnnStego, noisy_stego):
    return model.extract(noisy_stego)


def gan_discriminate(model: GanStego, which: str, sample) -> Tensor:
    return model.discriminate(which, sample)


def build_stego_net(variant: str, codec_config: CodecConfig, config: StegoConfig = StegoConfig(), *, rng: Rng):
    fshape = codec_config.feature_shape
    if variant == "cnn":
        return CnnStego(fshape, config, rng=rng)
    if variant == "gan":
        return GanStego(fshape, codec_config.image_shape, config, rng=rng)
    if variant == "inn":
        return InnStego(fshape, config, rng=rng)
    raise ConfigurationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


class StegoModel(Module):
    """A steganography module bundled with the codec it was trained against.

    ``detector`` is the feature discriminator attached when a CNN or INN
    variant is trained adversarially; it is ``None`` otherwise.
    """

    kind = "stego"

    def __init__(self, variant: str, codec: CodecModel, config: StegoConfig = StegoConfig(), *,
                 rng: Rng, strategy: str = "two-stage", dwt_preprocess: bool = False):
        self.variant = variant
        self.strategy = strategy
        self.dwt_preprocess = dwt_preprocess
        self.stego_config = config
        self.codec = codec
        self.net = build_stego_net(variant, codec.config, config, rng=rng)
        self.detector = None
        if strategy == "adversarial" and variant != "gan":
            self.detector = FeatureDiscriminator(codec.config.feature_shape, config.disc_width, rng=rng)

    def stego_parameter_count(self) -> int:
        return self.net.num_parameters() + (self.detector.num_parameters() if self.detector else 0)

    def config_dict(self) -> dict:
        return {
            "kind": self.kind,
            "variant": self.variant,
            "strategy": self.strategy,
            "dwt_preprocess": self.dwt_preprocess,
            "codec": asdict(self.codec.config),
            "stego": asdict(self.stego_config),
        }

    @classmethod
    def from_config_dict(cls, cfg: dict) -> "StegoModel":
        codec = CodecModel(CodecConfig(**cfg["codec"]), rng=Rng(0))
        return cls(cfg["variant"], codec, StegoConfig(**cfg["stego"]), rng=Rng(0),
                   strategy=cfg.get("strategy", "two-stage"), dwt_preprocess=cfg.get("dwt_preprocess", False))
