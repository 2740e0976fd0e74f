"""Dense reference computations for checking the FFT-based detector paths.

Nothing here touches the per-subcarrier machinery: the likelihood and its
derivatives are formed directly from the lifted ``2NV x 2KV`` channel.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from .channel import block_circulant, block_dft, block_diag_fd, effective_matrix
from .detectors import lift, lift_matrix
from .numerics import psi, varphi


class DenseProblem:
    """Lifted real model ``r = sign(G x - tau + w)`` for one frame."""

    def __init__(self, ch, frame, N0):
        self.G = lift_matrix(effective_matrix(ch))
        self.r = lift(frame.r)
        self.tau = lift(np.broadcast_to(frame.tau, frame.r.shape))
        self.N0 = N0
        self.shape = (ch.V, ch.K)

    def u(self, xr):
        return np.sqrt(2.0 / self.N0) * self.r * (self.G @ xr - self.tau)

    def loglik(self, xr):
        return float(np.sum(special.log_ndtr(self.u(xr))))

    def gradient(self, xr):
        return np.sqrt(2.0 / self.N0) * self.G.T @ (self.r * varphi(self.u(xr)))

    def hessian(self, xr, gamma=None):
        d = psi(self.u(xr)) if gamma is None else np.full(self.G.shape[0], gamma)
        return (2.0 / self.N0) * self.G.T @ (d[:, None] * self.G)

    def newton_step(self, xr, gamma=None):
        """``H^{-1} grad``, optionally with ``diag(psi)`` replaced by ``gamma I``."""
        return np.linalg.solve(self.hessian(xr, gamma), self.gradient(xr))


def central_gradient(f, x, h=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def central_jacobian(grad, x, h=1e-4):
    J = np.empty((x.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        J[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return J


def factorization_residual(ch):
    """max |H_b - Q_N^H Lambda_b Q_K| for a channel realisation."""
    V, N, K = ch.fd.shape
    Hb = block_circulant(ch.taps, V)
    rhs = block_dft(V, N).conj().T @ block_diag_fd(ch.fd) @ block_dft(V, K)
    return float(np.max(np.abs(Hb - rhs)))


def relative_error(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
