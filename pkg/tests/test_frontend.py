import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqnd.errors import ConfigError
from pqnd.frontend import (
    ThresholdConfig,
    design_thresholds,
    gen_thresholds,
    one_bit,
    quantize,
    threshold_snr_db,
    threshold_variance,
)
from pqnd.numerics import complex_normal


@pytest.mark.parametrize("K, N, Ls, expected", [
    (10, 128, 3, 14.5),
    (2, 128, 3, 0.1),
    (1, 1024, 7, -3.85),
])
def test_threshold_snr_worked_values(K, N, Ls, expected):
    assert threshold_snr_db(K, N, Ls) == pytest.approx(expected, abs=1e-12)


def test_threshold_snr_rejects_zero():
    with pytest.raises(ConfigError):
        threshold_snr_db(0, 128, 3)


def test_threshold_variance_values():
    assert threshold_variance(10.0, 1e-3) == pytest.approx(0.099, abs=1e-15)
    # operating SNR at or below the activation point
    assert threshold_variance(10.0, 0.1) == 0.0
    assert threshold_variance(10.0, 0.5) == 0.0
    with pytest.raises(ConfigError):
        threshold_variance(10.0, 0.0)


@settings(max_examples=50)
@given(st.floats(-10, 30), st.floats(-20, 60), st.floats(0.01, 10))
def test_threshold_variance_ramp(rho_t, rho, gap):
    # zero below rho_t, nondecreasing in rho, bounded by 1/rho_t
    lo = threshold_variance(rho_t, 10 ** (-rho / 10))
    hi = threshold_variance(rho_t, 10 ** (-(rho + gap) / 10))
    assert 0.0 <= lo <= hi <= 10 ** (-rho_t / 10)
    if rho <= rho_t:
        assert lo == 0.0


def test_gen_thresholds_moments():
    rng = np.random.default_rng(0)
    tau = gen_thresholds(0.5, 10**5, rng)
    assert np.mean(np.abs(tau) ** 2) == pytest.approx(0.5, rel=0.02)
    assert np.var(tau.real) == pytest.approx(0.25, rel=0.02)
    assert np.var(tau.imag) == pytest.approx(0.25, rel=0.02)
    assert np.array_equal(gen_thresholds(0.0, 7, rng), np.zeros(7))


def test_design_thresholds_modes():
    rng = np.random.default_rng(1)
    ztq = design_thresholds("ztq", 2, 128, 3, 1e-3, rng)
    assert ztq.mode == "ztq" and ztq.sigma_tau_sq == 0 and not np.any(ztq.tau)
    prq = design_thresholds("prq", 2, 128, 3, 1e-3, rng)
    assert prq.sigma_tau_sq == threshold_variance(threshold_snr_db(2, 128, 3), 1e-3)
    assert prq.tau.shape == (128,) and np.any(prq.tau)
    over = design_thresholds("prq", 2, 128, 3, 1e-3, rng, sigma_tau_sq=0.25)
    assert over.sigma_tau_sq == 0.25
    with pytest.raises(ConfigError):
        design_thresholds("dither", 2, 128, 3, 1e-3, rng)


def test_threshold_config_guards():
    with pytest.raises(ConfigError):
        ThresholdConfig("ztq", 0.1, np.zeros(2, complex))
    with pytest.raises(ConfigError):
        ThresholdConfig("ztq", 0.0, np.ones(2, complex))
    with pytest.raises(ConfigError):
        ThresholdConfig("prq", -1.0, np.ones(2, complex))


@pytest.mark.parametrize("y, tau, r", [
    (2 + 0.5j, 1 + 1j, 1 - 1j),
    (-0.3 - 0.2j, 0j, -1 - 1j),
    (0.7 - 0.4j, 0.7 - 0.4j, 1 + 1j),
])
def test_quantize_examples(y, tau, r):
    frame = quantize(np.array([[y]]), np.array([tau]))
    assert frame.r[0, 0] == r


def test_sign_zero_is_plus_one():
    assert one_bit(np.array([0j, -0.0 + 0j]))[0] == 1 + 1j


def test_quantize_bare_vector_records_variance():
    tau = np.array([0.5 + 0j, -0.5j])
    assert quantize(np.zeros((3, 2)), tau).thresholds.sigma_tau_sq == pytest.approx(0.25)
    assert quantize(np.zeros((3, 2)), tau, sigma_tau_sq=0.4).thresholds.sigma_tau_sq == 0.4
    assert quantize(np.zeros((3, 2)), np.zeros(2)).thresholds.mode == "ztq"


def test_quantize_shape_mismatch():
    with pytest.raises(ConfigError):
        quantize(np.zeros((3, 4)), np.zeros(3))


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_ztq_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    y = complex_normal(rng, (6, 5))
    tau = np.zeros(5)
    assert np.array_equal(quantize(c * y, tau).r, quantize(y, tau).r)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_output_alphabet(seed):
    rng = np.random.default_rng(seed)
    y = complex_normal(rng, (8, 4), 2.0)
    r = quantize(y, complex_normal(rng, 4, 0.3)).r
    assert set(np.unique(r.real)) <= {-1.0, 1.0}
    assert set(np.unique(r.imag)) <= {-1.0, 1.0}
