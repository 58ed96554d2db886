"""Real-valued AWGN and flat Rayleigh fading channels.

The same functions serve as the training noise layer and at evaluation time.
Noise and fading gains are constants of each realization, so gradients pass
through the additive noise unchanged and through equalization as a fixed
scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation
from .numerics import Rng, Tensor, as_tensor

log = logging.getLogger(__name__)

POWER_TOLERANCE = 1e-3
DEEP_FADE = 1e-6


class PowerMonitor:
    """Records the transmit power of everything handed to the channel."""

    def __init__(self):
        self.reset()

    def reset(self):
        self.transmissions = 0
        self.max_deviation = 0.0
        self.deep_fades = 0

    def observe(self, power: np.ndarray):
        self.transmissions += power.size
        self.max_deviation = max(self.max_deviation, float(np.max(np.abs(power - 1.0))))


MONITOR = PowerMonitor()


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "awgn"
    snr_db: float = 10.0
    eve_snr_db: float | None = None
    equalize: bool = True

    def __post_init__(self):
        if self.kind not in ("awgn", "rayleigh"):
            raise ConfigurationError(f"unknown channel kind {self.kind!r}")
        if not np.isfinite(self.snr_db):
            raise ConfigurationError("snr_db must be finite")
        if self.eve_snr_db is not None and not np.isfinite(self.eve_snr_db):
            raise ConfigurationError("eve_snr_db must be finite")

    @property
    def eve_snr(self) -> float:
        return self.snr_db if self.eve_snr_db is None else self.eve_snr_db


def noise_variance(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def _sample_power(x: np.ndarray) -> np.ndarray:
    if x.ndim <= 3:
        return np.array([np.mean(x * x)])
    return np.mean(x * x, axis=tuple(range(1, x.ndim)))


def _check_power(x: Tensor):
    power = _sample_power(x.data)
    MONITOR.observe(power)
    if np.any(np.abs(power - 1.0) > POWER_TOLERANCE):
        raise ContractViolation(
            f"channel input is not power-normalized (mean square {float(power.max()):.6g})"
        )


def awgn(x, snr_db: float, rng: Rng) -> Tensor:
    """``x + n`` with ``n ~ N(0, 10^(-snr_db/10))`` i.i.d."""
    x = as_tensor(x)
    _check_power(x)
    sigma = np.sqrt(noise_variance(snr_db))
    return x + rng.normal(x.shape) * sigma


def rayleigh(x, snr_db: float, equalize: bool, rng: Rng):
    """Flat fading with one real gain per transmission.

    Returns ``(y, h)``; ``h`` is a float for a single sample and an array of
    per-sample gains for a batch.
    """
    x = as_tensor(x)
    _check_power(x)
    batched = x.ndim == 4
    n = x.shape[0] if batched else 1
    g = rng.normal((n, 2))
    h = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2) / np.sqrt(2.0)
    if np.any(h < DEEP_FADE):
        MONITOR.deep_fades += int(np.sum(h < DEEP_FADE))
        log.warning("deep fade: channel gain %.3g below %.0e", float(h.min()), DEEP_FADE)
    scale = h.reshape((n, 1, 1, 1)) if batched else h[0]
    sigma = np.sqrt(noise_variance(snr_db))
    y = x * scale + rng.normal(x.shape) * sigma
    if equalize:
        y = y * (1.0 / np.maximum(scale, np.finfo(float).tiny))
    return y, (h if batched else float(h[0]))


def transmit(x, snr_db: float, config: ChannelConfig, rng: Rng) -> Tensor:
    """One pass through the configured channel kind at ``snr_db``."""
    if config.kind == "awgn":
        return awgn(x, snr_db, rng)
    y, _ = rayleigh(x, snr_db, config.equalize, rng)
    return y


def tap(x, config: ChannelConfig, rng: Rng) -> tuple[Tensor, Tensor]:
    """Independent legitimate and eavesdropper realizations of the same ``x``."""
    legit = transmit(x, config.snr_db, config, rng)
    eve = transmit(x, config.eve_snr, config, rng)
    return legit, eve


def empirical_snr_db(clean: np.ndarray, received: np.ndarray) -> float:
    signal = float(np.mean(np.asarray(clean) ** 2))
    noise = float(np.mean((np.asarray(received) - np.asarray(clean)) ** 2))
    return 10.0 * np.log10(signal / noise)
