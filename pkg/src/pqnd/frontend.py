"""One-bit quantisation against fixed complex thresholds, and PRQ threshold design."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .numerics import complex_normal

MODES = ("ztq", "prq")


@dataclass(frozen=True)
class ThresholdConfig:
    """Per-antenna thresholds, identical for every time sample of a frame."""

    mode: str
    sigma_tau_sq: float
    tau: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown quantisation mode {self.mode!r}")
        if self.sigma_tau_sq < 0:
            raise ConfigError("threshold variance must be >= 0")
        if self.mode == "ztq" and (self.sigma_tau_sq != 0 or np.any(self.tau != 0)):
            raise ConfigError("zero-threshold quantisation needs tau = 0")

    @classmethod
    def zero(cls, N):
        return cls("ztq", 0.0, np.zeros(N, dtype=complex))


@dataclass(frozen=True)
class QuantizedFrame:
    r: np.ndarray = field(repr=False)
    thresholds: ThresholdConfig

    @property
    def tau(self):
        return self.thresholds.tau


def threshold_snr_db(K, N, L_s):
    """SNR (dB) above which non-zero thresholds are switched on."""
    if K < 1 or N < 1 or L_s < 1:
        raise ConfigError("K, N and L_s must be >= 1")
    return 0.15 * K**2 + L_s - 2.50 * np.log2(N) + 14.0


def threshold_variance(rho_t_db, N0):
    """Ramp rule ``max(0, 1/rho_t - N0)`` with ``rho_t`` converted to linear."""
    if N0 <= 0:
        raise ConfigError("N0 must be positive")
    return max(0.0, 10.0 ** (-rho_t_db / 10.0) - N0)


def gen_thresholds(sigma_tau_sq, N, rng):
    """``tau ~ CN(0, sigma_tau_sq I_N)``; all zeros when the variance is zero."""
    if sigma_tau_sq < 0:
        raise ConfigError("threshold variance must be >= 0")
    if sigma_tau_sq == 0:
        return np.zeros(N, dtype=complex)
    return complex_normal(rng, N, sigma_tau_sq)


def design_thresholds(mode, K, N, L_s, N0, rng, sigma_tau_sq=None):
    """Full threshold pipeline for one frame.

    ``sigma_tau_sq`` overrides the ramp rule (PRQ only).
    """
    if mode == "ztq":
        return ThresholdConfig.zero(N)
    if mode != "prq":
        raise ConfigError(f"unknown quantisation mode {mode!r}")
    if sigma_tau_sq is None:
        sigma_tau_sq = threshold_variance(threshold_snr_db(K, N, L_s), N0)
    return ThresholdConfig("prq", float(sigma_tau_sq), gen_thresholds(sigma_tau_sq, N, rng))


def one_bit(z):
    """Rail-wise sign with sign(0) = +1."""
    re = np.where(z.real >= 0, 1.0, -1.0)
    im = np.where(z.imag >= 0, 1.0, -1.0)
    return re + 1j * im


def quantize(y, tau, sigma_tau_sq=None):
    """``r = sign(Re(y - tau)) + j sign(Im(y - tau))``; ``tau`` broadcast over time.

    ``tau`` may be a :class:`ThresholdConfig` or a bare vector; for a bare
    non-zero vector the variance recorded in the frame is ``sigma_tau_sq``,
    or the sample power of ``tau`` if that is not given.
    """
    if isinstance(tau, ThresholdConfig):
        thresholds = tau
    else:
        tau = np.asarray(tau, dtype=complex)
        if np.any(tau != 0):
            if sigma_tau_sq is None:
                sigma_tau_sq = float(np.mean(np.abs(tau) ** 2))
            thresholds = ThresholdConfig("prq", float(sigma_tau_sq), tau)
        else:
            thresholds = ThresholdConfig.zero(tau.size)
    y = np.asarray(y)
    if y.shape[-1] != thresholds.tau.shape[-1]:
        raise ConfigError(f"threshold length {thresholds.tau.shape[-1]} != antennas {y.shape[-1]}")
    return QuantizedFrame(one_bit(y - thresholds.tau), thresholds)
