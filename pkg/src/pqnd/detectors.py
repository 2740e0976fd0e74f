"""One-bit MIMO-OFDM detectors built on the probit log-likelihood.

Symbol grids are complex arrays of shape ``(V, K)``. Where a real vector is
needed (dense Hessians, finite differences) the grid is lifted to
``[Re(x).ravel(), Im(x).ravel()]`` of length ``2KV``; the same ordering is
used for the ``2NV`` observation branches.

All detectors except :func:`ml_exhaustive` start from the MRC estimate and
use the projection schedule box, box, ..., norm (last iteration only).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .channel import effective_matrix
from .errors import ConfigError, OracleScopeError
from .numerics import rail_product, varphi_psi

MAX_DENSE_KV = 512
MAX_ML_CANDIDATES = 10**6

OBOX_DAMPING_SNR_DB = 15.0
# 1BOX step sizes per antenna count; other N fall back to 1.28 / N
OBOX_STEPS = {64: 0.02, 128: 0.01, 256: 0.007}

DEFAULT_STEPS = {"pqnd": 0.7, "pqnd_zf": 0.8, "nm": 1.0}
DEFAULT_ITERATIONS = 6

ITERATIVE = ("pqnd", "pqnd_zf", "obox", "nm")
DETECTORS = ("mrc", "zf") + ITERATIVE + ("ml",)


def pqnd_damping_snr_db(K, N):
    return 20.0 - 150.0 * K / N


def obox_default_step(N):
    return OBOX_STEPS.get(N, 1.28 / N)


@dataclass(frozen=True)
class DetectorParams:
    """Step size, iteration count and damping SNR of an iterative detector.

    ``damping_snr_db=None`` disables damping. The damping factor is
    ``max(1, rho / rho_d)`` on a linear scale, with ``rho = 1 / N0``.
    """

    step: float = 0.7
    iterations: int = DEFAULT_ITERATIONS
    damping_snr_db: float | None = None
    norm_projection: bool = True

    def __post_init__(self):
        if self.step < 0:
            raise ConfigError("step size must be >= 0")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")

    def zeta(self, N0):
        if self.damping_snr_db is None:
            return 1.0
        rho = 1.0 / N0
        return max(1.0, rho / 10.0 ** (self.damping_snr_db / 10.0))

    def effective_n0(self, N0):
        return self.zeta(N0) * N0


def default_params(detector, N, K):
    if detector == "obox":
        return DetectorParams(obox_default_step(N), DEFAULT_ITERATIONS, OBOX_DAMPING_SNR_DB)
    step = DEFAULT_STEPS.get(detector, 0.7)
    return DetectorParams(step, DEFAULT_ITERATIONS, pqnd_damping_snr_db(K, N))


@dataclass
class DetectorEstimate:
    xhat: np.ndarray
    trace_negll: np.ndarray = field(default_factory=lambda: np.empty(0))
    trace_ber: np.ndarray | None = None
    flagged: bool = False
    notes: list = field(default_factory=list)

    def flag(self, note):
        self.flagged = True
        self.notes.append(note)


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------

def lift(x):
    """Complex grid -> real vector ``[Re(x).ravel(), Im(x).ravel()]``."""
    x = np.asarray(x)
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def unlift(vec, shape):
    n = vec.size // 2
    return (vec[:n] + 1j * vec[n:]).reshape(shape)


def lift_matrix(A):
    """Real representation ``[[Re A, -Im A], [Im A, Re A]]`` of a complex matrix."""
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


# ---------------------------------------------------------------------------
# likelihood calculus
# ---------------------------------------------------------------------------

def _check_n0(N0):
    if not N0 > 0:
        raise ConfigError(f"N0 must be positive, got {N0}")


def compute_u(x, ch, frame, N0):
    """Standardised branch margins ``sqrt(2/N0) r (.) (IDFT{Lambda x} - tau)``, shape (V, N)."""
    _check_n0(N0)
    d = ch.forward(x) - frame.tau
    return np.sqrt(2.0 / N0) * rail_product(frame.r, d)


def _rails(u):
    """Real (V, N, 2) view of the complex margins."""
    return np.ascontiguousarray(u).view(float).reshape(u.shape + (2,))


def log_likelihood(x, ch, frame, N0):
    """Sum of ``log Phi`` over all 2NV real branches."""
    u = compute_u(x, ch, frame, N0)
    return float(np.sum(special.log_ndtr(_rails(u))))


def gradient(x, ch, frame, N0):
    """Gradient of :func:`log_likelihood` as a complex ``(V, K)`` grid.

    ``lift(gradient(...))`` is the gradient with respect to ``lift(x)``.
    """
    u = compute_u(x, ch, frame, N0)
    v, _ = varphi_psi(_rails(u))
    w = rail_product(frame.r, v.view(complex)[..., 0])
    return np.sqrt(2.0 / N0) * ch.matched(w)


def _dense_lifted(ch, max_kv):
    KV = ch.K * ch.V
    if KV > max_kv:
        raise OracleScopeError(f"KV={KV} exceeds dense limit {max_kv}")
    return lift_matrix(effective_matrix(ch))


def hessian_exact(x, ch, frame, N0, max_kv=MAX_DENSE_KV, G=None):
    """Dense ``(2/N0) G^T diag(psi(u)) G`` on the lifted real system."""
    if G is None:
        G = _dense_lifted(ch, max_kv)
    u = compute_u(x, ch, frame, N0)
    _, p = varphi_psi(lift(u))
    return (2.0 / N0) * (G.T @ (p[:, None] * G))


def _mean(p):
    # centred on one entry so that a constant array averages to itself exactly
    p0 = p.flat[0]
    return float(p0 + np.mean(p - p0))


def gamma_of(u):
    """Mean of ``psi`` over both rails of every branch."""
    _, p = varphi_psi(_rails(u))
    return _mean(p)


def _score(u, frame):
    """``r (.) varphi_bar(u)`` and ``gamma`` from one special-function pass."""
    v, p = varphi_psi(_rails(u))
    w = rail_product(frame.r, v.view(complex)[..., 0])
    return w, _mean(p)


def pqnd_step_zf(u, gamma, ch, frame, N0):
    """One-stage quasi-Newton step: per-subcarrier ZF filter on the score."""
    w, _ = _score(u, frame)
    g = ch.matched(w)
    sol = np.linalg.solve(ch.gram, g[:, :, None])[:, :, 0]
    return (np.sqrt(N0 / 2.0) / gamma) * sol


def pqnd_step_mrc(u, gamma, ch, frame, N0):
    """Two-stage quasi-Newton step: MRC filter with diagonal scaling, no inversion."""
    w, _ = _score(u, frame)
    return (np.sqrt(N0 / 2.0) / gamma) * ch.mrc_scale * ch.matched(w)


# ---------------------------------------------------------------------------
# projections and linear estimates
# ---------------------------------------------------------------------------

def project_box(x, boundary):
    """Clamp real and imaginary parts to ``[-boundary, boundary]``."""
    if boundary <= 0:
        raise ConfigError("box boundary must be positive")
    return np.clip(x.real, -boundary, boundary) + 1j * np.clip(x.imag, -boundary, boundary)


def project_norm(x):
    """Rescale the whole grid to norm ``sqrt(KV)``.

    Returns ``(x, ok)``; a grid with norm below 1e-12 is returned unchanged
    with ``ok=False``.
    """
    nrm = np.linalg.norm(x)
    if nrm < 1e-12:
        return x, False
    return x * (np.sqrt(x.size) / nrm), True


def sigma_y2(ch, frame, N0):
    return ch.K + N0 + frame.thresholds.sigma_tau_sq


def mrc_init(frame, ch, sig_y2):
    """Bussgang-scaled MRC estimate ``sqrt(pi sigma_y^2 / 4) lambda (.) Lambda^H DFT{r}``."""
    return np.sqrt(np.pi * sig_y2 / 4.0) * ch.mrc_scale * ch.matched(frame.r)


def zf_equalize(ch, y, scale=1.0):
    """``scale * Lambda[v]^+ DFT{y}`` per subcarrier; returns (x, ok)."""
    S = np.fft.fft(y, axis=0, norm="ortho")
    try:
        with np.errstate(all="raise"):
            x = np.linalg.solve(ch.gram, (ch.fd_h @ S[:, :, None]))[:, :, 0]
        if np.linalg.cond(ch.gram).max() > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned Gram matrix")
        return scale * x, True
    except (np.linalg.LinAlgError, FloatingPointError):
        x = np.stack([np.linalg.pinv(ch.fd[v]) @ S[v] for v in range(ch.V)])
        return scale * x, False


def mrc_detect(frame, ch, N0, **_):
    return DetectorEstimate(mrc_init(frame, ch, sigma_y2(ch, frame, N0)))


def zf_detect(frame, ch, N0, **_):
    scale = np.sqrt(np.pi * sigma_y2(ch, frame, N0) / 4.0)
    x, ok = zf_equalize(ch, frame.r, scale)
    est = DetectorEstimate(x)
    if not ok:
        est.flag("rank-deficient channel")
    return est


# ---------------------------------------------------------------------------
# iterative detectors
# ---------------------------------------------------------------------------

def _bit_errors(x, truth_bits, constellation):
    _, bits = constellation.demap(x)
    return np.count_nonzero(bits != truth_bits)


def _run_iterations(frame, ch, N0, params, constellation, direction, truth=None, trace=True):
    """Shared loop: MRC init, damping, T projected updates.

    ``direction(x, n0_eff)`` returns the additive update (already scaled by
    the step size) or ``None`` when the step could not be formed.
    """
    _check_n0(N0)
    T = params.iterations
    x = mrc_init(frame, ch, sigma_y2(ch, frame, N0))
    n0_eff = params.effective_n0(N0)
    est = DetectorEstimate(x)

    truth_bits = None
    if truth is not None:
        truth_bits = constellation.demap(truth)[1]
        nbits = truth_bits.size
    negll, ber = [], []

    def record(z):
        if trace:
            negll.append(-log_likelihood(z, ch, frame, N0))
        if truth_bits is not None:
            ber.append(_bit_errors(z, truth_bits, constellation) / nbits)

    record(x)
    for t in range(1, T + 1):
        delta = direction(x, n0_eff)
        if delta is None or not np.all(np.isfinite(delta)):
            est.flag(f"non-finite step at iteration {t}")
        else:
            x = x + delta
        if t < T or not params.norm_projection:
            x = project_box(x, constellation.boundary)
        else:
            x, ok = project_norm(x)
            if not ok:
                est.flag("norm projection of a zero estimate")
        record(x)

    est.xhat = x
    est.trace_negll = np.asarray(negll)
    if truth_bits is not None:
        est.trace_ber = np.asarray(ber)
    return est


def pqnd_detect(frame, ch, N0, params, constellation, truth=None, trace=True):
    """Projected quasi-Newton detector with the inversion-free MRC-form step."""
    alpha = params.step

    def direction(x, n0):
        u = compute_u(x, ch, frame, n0)
        w, gamma = _score(u, frame)
        return (-alpha * np.sqrt(n0 / 2.0) / gamma) * ch.mrc_scale * ch.matched(w)

    return _run_iterations(frame, ch, N0, params, constellation, direction, truth, trace)


def pqnd_zf_detect(frame, ch, N0, params, constellation, truth=None, trace=True):
    """One-stage variant: per-subcarrier ZF filter instead of MRC scaling."""
    alpha = params.step

    def direction(x, n0):
        u = compute_u(x, ch, frame, n0)
        gamma = gamma_of(u)
        try:
            return -alpha * pqnd_step_zf(u, gamma, ch, frame, n0)
        except np.linalg.LinAlgError:
            return None

    return _run_iterations(frame, ch, N0, params, constellation, direction, truth, trace)


def obox_detect(frame, ch, N0, params, constellation, truth=None, trace=True):
    """First-order baseline: projected gradient ascent on the log-likelihood.

    The ascent direction is ``G^T (r (.) varphi(u))``, the gradient without
    its ``sqrt(2/N0)`` prefactor; the tabulated step sizes (``OBOX_STEPS``)
    refer to this normalisation.
    """
    alpha = params.step

    def direction(x, n0):
        return (alpha * np.sqrt(n0 / 2.0)) * gradient(x, ch, frame, n0)

    return _run_iterations(frame, ch, N0, params, constellation, direction, truth, trace)


def newton_step_exact(x, ch, frame, N0, G):
    """Exact Newton step ``H^{-1} grad`` on the lifted system (None if singular)."""
    H = hessian_exact(x, ch, frame, N0, G=G)
    g = lift(gradient(x, ch, frame, N0))
    try:
        c = linalg.cho_factor(-H, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        return None
    return unlift(-linalg.cho_solve(c, g), x.shape)


def newton_exact_detect(frame, ch, N0, params, constellation, truth=None, trace=True,
                        max_kv=MAX_DENSE_KV):
    """Projected Newton's method with the dense Hessian (reference detector)."""
    G = _dense_lifted(ch, max_kv)
    alpha = params.step

    def direction(x, n0):
        step = newton_step_exact(x, ch, frame, n0, G)
        return None if step is None else -alpha * step

    return _run_iterations(frame, ch, N0, params, constellation, direction, truth, trace)


def ml_exhaustive(frame, ch, N0, constellation, max_candidates=MAX_ML_CANDIDATES,
                  chunk=4096, **_):
    """Exhaustive maximiser of the log-likelihood over the symbol alphabet.

    Ties go to the lowest enumeration index (lexicographic over the
    ``(v, k)`` positions, row-major).
    """
    _check_n0(N0)
    V, K = ch.V, ch.K
    M = constellation.order
    n_cand = M ** (V * K)
    if n_cand > max_candidates:
        raise OracleScopeError(f"{M}^{V * K} candidates exceed limit {max_candidates}")
    scale = np.sqrt(2.0 / N0)
    best_ll, best_idx = -np.inf, None
    combos = itertools.product(range(M), repeat=V * K)
    done = 0
    while done < n_cand:
        idx = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        X = constellation.points[idx].reshape(-1, V, K)
        Z = np.fft.ifft(np.einsum("vnk,cvk->cvn", ch.fd, X), axis=1, norm="ortho")
        U = scale * rail_product(frame.r[None], Z - frame.tau)
        ll = special.log_ndtr(U.real).sum(axis=(1, 2)) + special.log_ndtr(U.imag).sum(axis=(1, 2))
        j = int(np.argmax(ll))
        if ll[j] > best_ll:
            best_ll, best_idx = ll[j], idx[j]
        done += len(idx)
    xhat = constellation.points[best_idx].reshape(V, K)
    return DetectorEstimate(xhat, trace_negll=np.array([-best_ll]))


def detect(name, frame, ch, N0, params, constellation, truth=None, trace=True):
    """Dispatch by detector name."""
    if name == "mrc":
        return mrc_detect(frame, ch, N0)
    if name == "zf":
        return zf_detect(frame, ch, N0)
    if name == "ml":
        return ml_exhaustive(frame, ch, N0, constellation)
    funcs = {
        "pqnd": pqnd_detect,
        "pqnd_zf": pqnd_zf_detect,
        "obox": obox_detect,
        "nm": newton_exact_detect,
    }
    if name not in funcs:
        raise ConfigError(f"unknown detector {name!r}")
    return funcs[name](frame, ch, N0, params, constellation, truth=truth, trace=trace)
