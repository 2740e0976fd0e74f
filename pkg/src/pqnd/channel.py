"""Frequency-selective Rayleigh channels and the circular OFDM link.

Array conventions used throughout the package:

* time-domain taps ``H``: ``(L, N, K)``
* per-subcarrier responses ``Lambda``: ``(V, N, K)``
* frequency-domain symbols ``x``: ``(V, K)``
* time-domain received samples ``y``: ``(V, N)`` (row ``m`` is ``y[m]``)

The cyclic prefix is never materialised; the link is the post-CP-removal
circular model, so ``y = IDFT(Lambda x) + w`` with a unitary IDFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError
from .numerics import complex_normal, dft_matrix

# strong-tap counts reported for the two built-in profiles; the uniform-PDP
# rule reproduces 7 for TDL-A but yields 2 for the 8-tap exponential profile
SDS_STRONG_TAPS = 3
LDS_STRONG_TAPS = 7


@dataclass(frozen=True)
class PowerDelayProfile:
    label: str
    powers: np.ndarray = field(repr=False)
    strong_taps: int
    decay: float | None = None

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ConfigError("power profile must be a non-empty vector")
        if np.any(p < 0):
            raise ConfigError("tap powers must be non-negative")
        if not 1 <= self.strong_taps <= p.size:
            raise ConfigError(f"strong tap count {self.strong_taps} outside [1, {p.size}]")
        object.__setattr__(self, "powers", p)

    @property
    def L(self):
        return self.powers.size


def strong_tap_count(powers):
    """Number of taps stronger than a uniform profile of the same length."""
    powers = np.asarray(powers, dtype=float)
    p = powers / powers.sum()
    return max(1, int(np.count_nonzero(p > 1.0 / p.size)))


def exponential_pdp(L, mu, label=None, strong_taps=None):
    """Exponentially decaying profile ``p[l] ∝ exp(-mu l)``, unit total power."""
    if L < 1:
        raise ConfigError(f"tap count must be >= 1, got {L}")
    if mu <= 0:
        raise ConfigError(f"decay rate must be positive, got {mu}")
    w = np.exp(-mu * np.arange(L))
    p = w / w.sum()
    if strong_taps is None:
        strong_taps = strong_tap_count(p)
    return PowerDelayProfile(label or f"exp(L={L},mu={mu:g})", p, strong_taps, decay=float(mu))


def sds_profile():
    """Small delay spread: 8-tap exponential profile with unit decay."""
    return exponential_pdp(8, 1.0, label="sds", strong_taps=SDS_STRONG_TAPS)


def _parse_pdp_lines(lines, label):
    entries = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'tap power', got {raw.strip()!r}", lineno)
        try:
            tap = int(parts[0])
            power = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric entry {raw.strip()!r}", lineno) from None
        if tap < 0:
            raise ParseError(f"negative tap index {tap}", lineno)
        if not np.isfinite(power) or power < 0:
            raise ParseError(f"tap power must be finite and >= 0, got {power}", lineno)
        if tap in entries:
            raise ParseError(f"duplicate tap index {tap}", lineno)
        entries[tap] = power
    if not entries:
        raise ParseError("no taps found", None)
    L = max(entries) + 1
    p = np.zeros(L)
    for tap, power in entries.items():
        p[tap] = power
    if p.sum() <= 0:
        raise ParseError("total tap power is zero", None)
    p = p / p.sum()
    return PowerDelayProfile(label, p, strong_tap_count(p))


def load_pdp(path):
    """Read a ``tap linear_power`` text file; powers renormalised to unit sum."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return _parse_pdp_lines(fh, path.stem)


def lds_profile():
    """Large delay spread: the shipped 23-tap TDL-A profile."""
    text = resources.files("pqnd").joinpath("data/tdl_a.txt").read_text(encoding="utf-8")
    pdp = _parse_pdp_lines(text.splitlines(), "lds")
    if pdp.strong_taps != LDS_STRONG_TAPS:
        raise ConfigError(f"TDL-A strong tap count {pdp.strong_taps} != {LDS_STRONG_TAPS}")
    return pdp


def resolve_pdp(selector):
    """``'sds'``, ``'lds'``, ``'exp:L:mu'`` or a path to a profile file."""
    if isinstance(selector, PowerDelayProfile):
        return selector
    key = str(selector).strip()
    if key.lower() == "sds":
        return sds_profile()
    if key.lower() in ("lds", "tdl-a", "tdla"):
        return lds_profile()
    if key.lower().startswith("exp:"):
        try:
            _, L, mu = key.split(":")
            return exponential_pdp(int(L), float(mu), label=key)
        except ValueError:
            raise ConfigError(f"expected 'exp:L:mu', got {selector!r}") from None
    path = Path(key)
    if not path.is_file():
        raise ConfigError(f"unknown power delay profile {selector!r}")
    return load_pdp(path)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw: taps, per-subcarrier matrices and MRC scalings."""

    taps: np.ndarray = field(repr=False)
    fd: np.ndarray = field(repr=False)
    mrc_scale: np.ndarray = field(repr=False)

    @classmethod
    def from_taps(cls, taps, V):
        taps = np.asarray(taps, dtype=complex)
        if taps.ndim != 3:
            raise ConfigError("taps must have shape (L, N, K)")
        if V < taps.shape[0]:
            raise ConfigError(f"V={V} must be >= L={taps.shape[0]}")
        fd = np.fft.fft(taps, n=V, axis=0)
        return cls.from_fd(fd, taps=taps)

    @classmethod
    def from_fd(cls, fd, taps=None):
        """Build from per-subcarrier matrices directly (taps via inverse FFT)."""
        fd = np.asarray(fd, dtype=complex)
        if taps is None:
            taps = np.fft.ifft(fd, axis=0)
        energy = np.sum(np.abs(fd) ** 2, axis=1)
        return cls(taps=taps, fd=fd, mrc_scale=1.0 / energy)

    @property
    def N(self):
        return self.fd.shape[1]

    @property
    def K(self):
        return self.fd.shape[2]

    @property
    def V(self):
        return self.fd.shape[0]

    @cached_property
    def fd_h(self):
        """Conjugate transposes ``Lambda[v]^H`` stacked as ``(V, K, N)``."""
        return np.ascontiguousarray(np.conj(self.fd).transpose(0, 2, 1))

    @cached_property
    def gram(self):
        return self.fd_h @ self.fd

    def forward(self, x):
        """Noise-free time-domain samples ``IDFT_v{Lambda[v] x[v]}``, shape (V, N)."""
        z = np.matmul(self.fd, x[:, :, None])[:, :, 0]
        return np.fft.ifft(z, axis=0, norm="ortho")

    def matched(self, s):
        """``Lambda[v]^H DFT_m{s[m]}`` for time-domain ``s`` of shape (V, N)."""
        S = np.fft.fft(s, axis=0, norm="ortho")
        return np.matmul(self.fd_h, S[:, :, None])[:, :, 0]


def draw_channel(pdp, N, K, V, rng):
    """i.i.d. Rayleigh taps ``h_{n,k}[l] ~ CN(0, p[l])``."""
    if N < 1 or K < 1:
        raise ConfigError("N and K must be >= 1")
    if V < pdp.L:
        raise ConfigError(f"V={V} must be >= L={pdp.L}")
    taps = complex_normal(rng, (pdp.L, N, K)) * np.sqrt(pdp.powers)[:, None, None]
    return ChannelRealization.from_taps(taps, V)


def apply_link(x, ch, N0, rng):
    """Received unquantised samples ``y[m]``: circular channel plus CN(0, N0) noise."""
    x = np.asarray(x)
    if x.shape != (ch.V, ch.K):
        raise ConfigError(f"symbol grid shape {x.shape} != {(ch.V, ch.K)}")
    if N0 < 0:
        raise ConfigError("N0 must be >= 0")
    y = ch.forward(x)
    if N0 > 0:
        y = y + complex_normal(rng, y.shape, N0)
    return y


# ---------------------------------------------------------------------------
# dense reference matrices (small instances only)
# ---------------------------------------------------------------------------

def block_circulant(taps, V):
    """Time-domain block-circulant matrix ``H_b`` of shape (NV, KV)."""
    L, N, K = taps.shape
    Hb = np.zeros((V * N, V * K), dtype=complex)
    for m in range(V):
        for k in range(V):
            lag = (m - k) % V
            if lag < L:
                Hb[m * N:(m + 1) * N, k * K:(k + 1) * K] = taps[lag]
    return Hb


def block_dft(V, size):
    """``Q_size = F kron I_size`` with the unitary DFT ``F``."""
    return np.kron(dft_matrix(V), np.eye(size))


def block_diag_fd(fd):
    V, N, K = fd.shape
    out = np.zeros((V * N, V * K), dtype=complex)
    for v in range(V):
        out[v * N:(v + 1) * N, v * K:(v + 1) * K] = fd[v]
    return out


def effective_matrix(ch):
    """Complex effective time-domain channel ``G = Q_N^H Lambda_b`` of shape (NV, KV)."""
    V, N, K = ch.fd.shape
    idx = np.arange(V)
    E = np.exp(2j * np.pi * np.outer(idx, idx) / V) / np.sqrt(V)
    G = E[:, None, :, None] * ch.fd.transpose(1, 0, 2)[None, :, :, :]
    return G.reshape(V * N, V * K)
