"""Fast oracle and invariant checks run by ``pqnd selftest``."""

from __future__ import annotations

import numpy as np

from . import detectors as det
from .channel import ChannelRealization, draw_channel, exponential_pdp
from .frontend import ThresholdConfig, quantize, threshold_snr_db, threshold_variance
from .numerics import SUPPORTED_ORDERS, complex_normal, make_constellation, psi, unitary_dft, varphi
from .oracles import (
    DenseProblem,
    central_gradient,
    central_jacobian,
    factorization_residual,
    relative_error,
)


def random_instance(rng, N, K, V, L=2, prq=0.3, N0=0.5, M=4):
    """A random small frame with thresholds and a random box-feasible point."""
    ch = draw_channel(exponential_pdp(L, 1.0), N, K, V, rng)
    c = make_constellation(M)
    x = c.points[rng.integers(0, M, (V, K))]
    y = ch.forward(x) + complex_normal(rng, (V, N), N0)
    tau = complex_normal(rng, N, prq) if prq else np.zeros(N, complex)
    tc = ThresholdConfig("prq", prq, tau) if prq else ThresholdConfig.zero(N)
    frame = quantize(y, tc)
    x0 = 0.5 * complex_normal(rng, (V, K))
    return ch, frame, x0


def check_probit():
    grid = np.arange(-40, 40.001, 0.1)
    ok = abs(varphi(0.0) - np.sqrt(2 / np.pi)) < 1e-15
    ok &= abs(psi(0.0) + 2 / np.pi) < 1e-15
    ok &= bool(np.all(varphi(grid) > 0) and np.all(psi(grid) < 0))
    ok &= 39.9 <= varphi(-40.0) <= 40.1
    return ok, "varphi(0), psi(0), signs on [-40, 40]"


def check_constellations():
    ok = True
    for M in SUPPORTED_ORDERS:
        c = make_constellation(M)
        ok &= abs(np.mean(np.abs(c.points) ** 2) - 1) < 1e-12
        ok &= np.max(np.abs(c.points.real)) <= c.boundary + 1e-15
        ok &= len({tuple(b) for b in c.bit_map}) == M
    return ok, "unit energy, box membership, Gray bijection"


def check_dft():
    rng = np.random.default_rng(0)
    x = complex_normal(rng, 32)
    back = unitary_dft(unitary_dft(x), "inverse")
    ok = np.linalg.norm(back - x) < 1e-10
    ok &= abs(np.linalg.norm(unitary_dft(x)) - np.linalg.norm(x)) < 1e-10
    return ok, "unitary DFT round trip and Parseval"


def check_factorization():
    rng = np.random.default_rng(1)
    worst = 0.0
    for N, K, V, L in ((4, 2, 4, 2), (2, 2, 8, 3)):
        ch = draw_channel(exponential_pdp(L, 1.0), N, K, V, rng)
        worst = max(worst, factorization_residual(ch))
    return worst < 1e-9, f"block-circulant factorisation residual {worst:.1e}"


def check_calculus(instances=6):
    rng = np.random.default_rng(2)
    worst_g = worst_h = 0.0
    max_eig = -np.inf
    for i in range(instances):
        N, K, V = ((4, 2, 4), (8, 2, 4), (4, 4, 8))[i % 3]
        ch, frame, x0 = random_instance(rng, N, K, V)
        dense = DenseProblem(ch, frame, 0.5)
        xr = det.lift(x0)
        g = det.lift(det.gradient(x0, ch, frame, 0.5))
        worst_g = max(worst_g, relative_error(g, central_gradient(dense.loglik, xr)))
        H = det.hessian_exact(x0, ch, frame, 0.5)
        worst_h = max(worst_h, relative_error(H, central_jacobian(dense.gradient, xr)))
        max_eig = max(max_eig, np.linalg.eigvalsh(H).max())
    ok = worst_g < 1e-5 and worst_h < 1e-4 and max_eig <= 1e-8
    return ok, f"grad rel err {worst_g:.1e}, hess rel err {worst_h:.1e}, max eig {max_eig:.1e}"


def check_approximations():
    rng = np.random.default_rng(3)
    ch, frame, x0 = random_instance(rng, 4, 2, 4)
    N0 = 0.5
    u = det.compute_u(x0, ch, frame, N0)
    gamma = det.gamma_of(u)
    dense = DenseProblem(ch, frame, N0)
    ref = det.unlift(dense.newton_step(det.lift(x0), gamma), x0.shape)
    err_a = np.max(np.abs(det.pqnd_step_zf(u, gamma, ch, frame, N0) - ref))

    ch1, frame1, x1 = random_instance(rng, 8, 1, 4)
    u1 = det.compute_u(x1, ch1, frame1, N0)
    g1 = det.gamma_of(u1)
    err_b = np.max(np.abs(det.pqnd_step_zf(u1, g1, ch1, frame1, N0)
                          - det.pqnd_step_mrc(u1, g1, ch1, frame1, N0)))
    gamma0 = det.gamma_of(np.zeros((4, 4), complex))
    ok = err_a < 1e-9 and err_b < 1e-10 and gamma0 == -2 / np.pi
    return ok, f"gamma-I step err {err_a:.1e}, K=1 ZF/MRC err {err_b:.1e}, gamma(0)={gamma0:.6f}"


def check_prq_formula():
    vals = (threshold_snr_db(10, 128, 3), threshold_snr_db(2, 128, 3), threshold_snr_db(1, 1024, 7))
    ok = np.allclose(vals, (14.5, 0.1, -3.85), atol=1e-12)
    ok &= abs(threshold_variance(10.0, 1e-3) - 0.099) < 1e-12
    return ok, f"rho_t = {', '.join(f'{v:.2f}' for v in vals)} dB"


def check_orthogonal_gram():
    # orthogonal columns: one-stage and two-stage steps coincide
    rng = np.random.default_rng(4)
    V, N, K = 4, 8, 2
    fd = np.stack([np.linalg.qr(complex_normal(rng, (N, K)))[0] * rng.uniform(1, 3, K)
                   for _ in range(V)])
    ch = ChannelRealization.from_fd(fd)
    frame = quantize(complex_normal(rng, (V, N)), ThresholdConfig.zero(N))
    x0 = complex_normal(rng, (V, K))
    u = det.compute_u(x0, ch, frame, 1.0)
    g = det.gamma_of(u)
    err = np.max(np.abs(det.pqnd_step_zf(u, g, ch, frame, 1.0) - det.pqnd_step_mrc(u, g, ch, frame, 1.0)))
    return err < 1e-10, f"orthogonal-column ZF/MRC err {err:.1e}"


CHECKS = (
    check_probit,
    check_constellations,
    check_dft,
    check_factorization,
    check_calculus,
    check_approximations,
    check_orthogonal_gram,
    check_prq_formula,
)


def run_all(stream=print):
    failures = 0
    for check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"raised {exc!r}"
        failures += not ok
        stream(f"{'PASS' if ok else 'FAIL'}  {check.__name__[6:]:<18} {detail}")
    return failures
