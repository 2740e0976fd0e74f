"""Probit special functions, square QAM, unitary DFT and seeded RNG streams."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigError, NumericError

SUPPORTED_ORDERS = (4, 16, 64, 256, 1024)

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
_INV_SQRT_2 = 1.0 / np.sqrt(2.0)
_DIRECT_CUTOFF = -5.0
_TINY = np.finfo(float).smallest_subnormal
# below this the series for a + varphi(a) beats the direct difference
_SERIES_CUTOFF = -30.0


# ---------------------------------------------------------------------------
# probit functions
# ---------------------------------------------------------------------------

def _check_finite(a):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericError("argument must be finite")
    return a


def log_phi_cdf(a):
    """log of the standard normal CDF, stable far into the left tail."""
    return special.log_ndtr(_check_finite(a))


def _varphi(flat):
    """Core of :func:`varphi` on a flat float array (no checks)."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        v = _INV_SQRT_2PI * np.exp(-0.5 * flat * flat) / (0.5 * special.erfc(-flat * _INV_SQRT_2))
    tail = flat < _DIRECT_CUTOFF
    if np.any(tail):
        v[tail] = _SQRT_2_OVER_PI / special.erfcx(-flat[tail] * _INV_SQRT_2)
    return np.maximum(v, _TINY)


def varphi(a):
    r"""Ratio :math:`\phi(a)/\Phi(a)` (inverse Mills ratio of the left tail).

    The plain quotient is used for ``a >= -5``; below that the ratio is
    taken as ``sqrt(2/pi) / erfcx(-a/sqrt(2))``, which avoids the 0/0 of the
    quotient in the far tail. For large positive ``a`` the true value drops
    below the float64 range and is floored at the smallest subnormal so the
    result stays positive.
    """
    a = _check_finite(a)
    return _varphi(a.reshape(-1)).reshape(a.shape)[()]


def _margin(a, v):
    """a + varphi(a), with an asymptotic series in the far left tail."""
    out = a + v
    far = a < _SERIES_CUTOFF
    if np.any(far):
        inv = 1.0 / a[far]
        inv2 = inv * inv
        out[far] = -inv * (1.0 - inv2 * (2.0 - inv2 * (10.0 - 74.0 * inv2)))
    return out


def varphi_psi(a):
    """``varphi`` and ``psi`` in one pass; no finiteness check."""
    a = np.asarray(a, dtype=float)
    flat = a.reshape(-1)
    v = _varphi(flat)
    p = np.minimum(-v * _margin(flat, v), -_TINY)
    return v.reshape(a.shape), p.reshape(a.shape)


def psi(a):
    r"""Second derivative of :math:`\log\Phi`: ``-a*varphi(a) - varphi(a)**2``.

    Strictly negative for every finite input.
    """
    return varphi_psi(_check_finite(a))[1][()]


def rail_product(a, b):
    """Real and imaginary rails multiplied independently: Re*Re + j Im*Im."""
    return a.real * b.real + 1j * (a.imag * b.imag)


def varphi_bar(u):
    """``varphi`` applied to the real and imaginary rails separately."""
    return varphi(u.real) + 1j * varphi(u.imag)


# ---------------------------------------------------------------------------
# DFT
# ---------------------------------------------------------------------------

def unitary_dft(x, direction="forward", axis=0):
    """Unitary DFT along ``axis`` (1/sqrt(V) scaling both ways)."""
    if direction == "forward":
        return np.fft.fft(x, axis=axis, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft(x, axis=axis, norm="ortho")
    raise ValueError(f"unknown direction {direction!r}")


def dft_matrix(V):
    """Unitary V x V DFT matrix, ``F[v, m] = exp(-2j pi v m / V) / sqrt(V)``."""
    idx = np.arange(V)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / V) / np.sqrt(V)


# ---------------------------------------------------------------------------
# constellations
# ---------------------------------------------------------------------------

def _gray_to_binary(g):
    b = g.copy()
    shift = g >> 1
    while np.any(shift):
        b ^= shift
        shift >>= 1
    return b


@dataclass(frozen=True)
class Constellation:
    """Gray-labelled square QAM with unit average symbol energy.

    ``points[s]`` is the symbol carrying the bit pattern of integer ``s``
    (MSB first). The first half of the bits selects the in-phase level, the
    second half the quadrature level, each through a Gray code.
    """

    order: int
    points: np.ndarray = field(repr=False)
    boundary: float
    bit_map: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self):
        return int(self.bit_map.shape[1])

    def map_bits(self, bits):
        """Map a bit array with trailing size ``bits_per_symbol * n`` to symbols."""
        bits = np.asarray(bits, dtype=np.int64)
        q = self.bits_per_symbol
        grouped = bits.reshape(bits.shape[:-1] + (-1, q))
        weights = 1 << np.arange(q - 1, -1, -1)
        return self.points[grouped @ weights]

    def indices(self, symbols):
        """Index of the nearest point for each entry (ties to lowest index)."""
        symbols = np.asarray(symbols)
        flat = symbols.ravel()
        out = np.empty(flat.size, dtype=np.int64)
        chunk = max(1, 2**20 // self.order)
        for start in range(0, flat.size, chunk):
            block = flat[start:start + chunk]
            d = np.abs(block[:, None] - self.points[None, :]) ** 2
            out[start:start + chunk] = np.argmin(d, axis=1)
        return out.reshape(symbols.shape)

    def demap(self, symbols):
        """Hard decisions: (nearest points, their bits with a trailing bit axis)."""
        idx = self.indices(symbols)
        return self.points[idx], self.bit_map[idx]


def make_constellation(M):
    """Square M-QAM, Gray mapped per dimension, unit average energy."""
    M = int(M)
    if M not in SUPPORTED_ORDERS:
        raise ConfigError(f"unsupported QAM order {M}; expected one of {SUPPORTED_ORDERS}")
    q = M.bit_length() - 1
    half = q // 2
    m = 1 << half
    scale = np.sqrt(3.0 / (2.0 * (M - 1)))
    levels = (2.0 * np.arange(m) - (m - 1)) * scale

    s = np.arange(M)
    level_i = _gray_to_binary(s >> half)
    level_q = _gray_to_binary(s & (m - 1))
    points = levels[level_i] + 1j * levels[level_q]
    bit_map = ((s[:, None] >> np.arange(q - 1, -1, -1)) & 1).astype(np.int8)
    boundary = float(np.sqrt(3.0 * (m - 1) ** 2 / (2.0 * (M - 1))))
    return Constellation(order=M, points=points, boundary=boundary, bit_map=bit_map)


def demap_min_distance(xhat, constellation):
    """Nearest constellation point and its Gray bits for a scalar or array."""
    return constellation.demap(xhat)


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """A (seed, stream id) pair naming one reproducible substream."""

    seed: int
    stream_id: tuple = ()

    def seed_sequence(self):
        sid = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        return np.random.SeedSequence(int(self.seed), spawn_key=tuple(int(i) for i in sid))

    def generator(self):
        return np.random.default_rng(self.seed_sequence())

    def children(self, n):
        """``n`` independent generators derived from this stream."""
        return [np.random.default_rng(s) for s in self.seed_sequence().spawn(n)]


def make_rng(seed, stream_id=()):
    return RngStream(seed, stream_id).generator()


def complex_normal(rng, shape, variance=1.0):
    """Circularly-symmetric complex Gaussian samples, CN(0, variance)."""
    std = np.sqrt(variance / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
