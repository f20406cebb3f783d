"""BPSK over AWGN and the matching LLR front end."""

from dataclasses import dataclass

import numpy as np

from .polar import saturate


def ebn0_to_sigma2(ebn0_db, rate):
    """Noise variance for unit-energy BPSK at a given Eb/N0 and code rate."""
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def modulate(bits):
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def add_noise(symbols, sigma2, rng):
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    return symbols + rng.normal(0.0, np.sqrt(sigma2), size=np.shape(symbols))


def to_llr(received, sigma2):
    """Channel LLR log P(b=0|y)/P(b=1|y) = 2y/sigma^2, saturated."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    return saturate(2.0 * np.asarray(received, dtype=np.float64) / sigma2)


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    effective_rate: float
    noise_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.effective_rate <= 1.0:
            raise ValueError("effective_rate must be in (0, 1]")

    @property
    def sigma2(self):
        return ebn0_to_sigma2(self.ebn0_db, self.effective_rate)


class Channel:
    """Transmit hard bits, return channel LLRs."""

    def __init__(self, cfg: ChannelConfig, rng=None):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.noise_seed) if rng is None else rng

    def transmit(self, bits):
        y = add_noise(modulate(bits), self.cfg.sigma2, self.rng)
        return to_llr(y, self.cfg.sigma2)
