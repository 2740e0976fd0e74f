import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqnd import harness
from pqnd.config import SystemConfig, dump_config, load_config, parse_config_text
from pqnd.errors import ConfigError, OracleScopeError, ParseError
from pqnd.frontend import threshold_snr_db, threshold_variance

SMALL = SystemConfig(N=16, K=2, V=8, M=4, snr_db=(5.0, 15.0), pdp="sds", frames=4, seed=3)


def csv_of(rows, cols=harness.BER_COLUMNS):
    return harness.format_csv(rows, cols)


def test_ber_is_deterministic():
    a = csv_of(harness.run_ber(SMALL, workers=1, detectors=("mrc", "pqnd")))
    b = csv_of(harness.run_ber(SMALL, workers=1, detectors=("mrc", "pqnd")))
    assert a == b


def test_worker_count_does_not_change_results():
    a = csv_of(harness.run_ber(SMALL, workers=1, detectors=("zf", "obox")))
    b = csv_of(harness.run_ber(SMALL, workers=2, detectors=("zf", "obox")))
    assert a == b


def test_seed_changes_results():
    a = csv_of(harness.run_ber(SMALL.replace(frames=8), workers=1))
    b = csv_of(harness.run_ber(SMALL.replace(frames=8, seed=4), workers=1))
    assert a != b


def test_csv_header_and_counters():
    rows = harness.run_ber(SMALL, workers=1, detectors=("mrc", "pqnd"))
    text = csv_of(rows)
    assert text.splitlines()[0] == "snr_db,detector,quant,pdp,N,K,V,M,frames,bits,bit_errors,ber,ser,flagged,seed"
    assert len(rows) == 4
    for row in rows:
        assert row["bits"] == SMALL.frames * SMALL.K * SMALL.V * 2
        assert 0 <= row["bit_errors"] <= row["bits"]
        assert row["ber"] == row["bit_errors"] / row["bits"]


def test_trial_record_counters():
    rec = harness.run_trial(SMALL, 0, 0, ("pqnd",), traces=True)["pqnd"]
    assert rec.bits == SMALL.K * SMALL.V * 2
    assert rec.symbols == SMALL.K * SMALL.V
    assert rec.bit_errors <= rec.bits and rec.symbol_errors <= rec.symbols
    assert rec.negll_trace.shape == (7,)
    assert rec.wall_time >= 0


def test_prq_pipeline_uses_ramp_rule():
    cfg = SMALL.replace(quant="prq", snr_db=(30.0,))
    data = harness.draw_frame(cfg, 0, 0)
    expected = threshold_variance(threshold_snr_db(cfg.K, cfg.N, cfg.profile.strong_taps), data.N0)
    assert data.frame.thresholds.sigma_tau_sq == expected
    assert expected > 0


def test_threshold_freeze_flag():
    cfg = SMALL.replace(quant="prq", snr_db=(30.0,))
    t0 = harness.draw_frame(cfg, 0, 0).frame.tau
    t1 = harness.draw_frame(cfg, 0, 1).frame.tau
    assert not np.array_equal(t0, t1)
    frozen = cfg.replace(freeze_thresholds=True)
    assert np.array_equal(harness.draw_frame(frozen, 0, 1).frame.tau, t0)
    # everything else is still drawn per frame
    assert not np.array_equal(harness.draw_frame(frozen, 0, 1).bits, harness.draw_frame(frozen, 0, 0).bits)


def test_ztq_and_prq_agree_below_activation():
    # rho = 0 dB is below rho_t, so PRQ thresholds are all zero
    cfg = SystemConfig(N=32, K=4, V=32, M=4, snr_db=(0.0,), frames=400, seed=1)
    ztq = harness.run_ber(cfg, workers=1, detectors=("mrc",))[0]
    prq = harness.run_ber(cfg.replace(quant="prq"), workers=1, detectors=("mrc",))[0]
    assert ztq["bits"] >= 10**5
    lo, hi = harness.binomial_ci(ztq["bit_errors"], ztq["bits"])
    assert lo <= prq["ber"] <= hi
    assert ztq["bit_errors"] == prq["bit_errors"]


def test_convergence_rows():
    cfg = SMALL.replace(frames=3, detectors=("pqnd", "obox", "nm", "pqnd_zf"))
    rows = harness.run_convergence(cfg, workers=1)
    assert len(rows) == 4 * 7
    first = {r["detector"]: r for r in rows if r["iteration"] == 0}
    assert len({r["mean_negll"] for r in first.values()}) == 1
    assert len({r["mean_ber"] for r in first.values()}) == 1
    assert harness.format_csv(rows, harness.CONVERGENCE_COLUMNS).startswith(
        "iteration,detector,mean_negll,mean_ber\n")


def test_convergence_rejects_non_iterative():
    with pytest.raises(ConfigError):
        harness.run_convergence(SMALL.replace(detectors=("pqnd", "zf")), workers=1)


def test_convergence_ml_guard():
    with pytest.raises(OracleScopeError):
        harness.run_convergence(SMALL.replace(detectors=("ml",)), workers=1)


def test_single_value_sweep_matches_ber():
    rows = harness.run_sweep(SMALL, "K", [2], workers=1, detectors=("pqnd",))
    ref = harness.run_ber(SMALL, workers=1, detectors=("pqnd",))
    assert [{k: r[k] for k in harness.BER_COLUMNS} for r in rows] == ref
    assert all(r["axis"] == "K" and r["value"] == 2 for r in rows)
    with pytest.raises(ValueError):
        harness.run_sweep(SMALL, "V", [8])


def test_ml_runs_on_tiny_system(tmp_path):
    pdp = tmp_path / "two.txt"
    pdp.write_text("0 1.0\n1 0.36787944117144233\n")
    cfg = SystemConfig(N=8, K=2, V=2, M=4, snr_db=(10.0,), pdp=str(pdp), frames=5)
    row = harness.run_ber(cfg, workers=1, detectors=("ml",))[0]
    assert row["bits"] == 5 * 2 * 2 * 2


def test_validation_errors():
    with pytest.raises(ConfigError):
        SMALL.replace(V=4).validate()  # shorter than the 8-tap profile
    with pytest.raises(ConfigError):
        SMALL.replace(cp_length=3).validate()
    with pytest.raises(ConfigError):
        SMALL.replace(M=8).validate()
    with pytest.raises(ConfigError):
        SMALL.replace(snr_db=()).validate()
    with pytest.raises(ConfigError):
        SMALL.validate(("gamp",))
    with pytest.raises(OracleScopeError):
        SMALL.validate(("ml",))
    with pytest.raises(OracleScopeError):
        SMALL.replace(K=40, V=16).validate(("nm",))


def test_params_for_overrides():
    cfg = SystemConfig(N=128, K=10)
    assert cfg.params_for("pqnd").damping_snr_db == pytest.approx(8.28125)
    assert cfg.params_for("obox").step == 0.01
    off = cfg.replace(damping_snr_db="off", step=0.5)
    assert off.params_for("pqnd").damping_snr_db is None
    assert off.params_for("obox").step == 0.5
    per = cfg.replace(step=0.5, steps=(("obox", 0.009),))
    assert per.params_for("obox").step == 0.009
    assert per.params_for("pqnd").step == 0.5
    assert parse_config_text("steps = OBOX:0.009, nm:1")["steps"] == (("obox", 0.009), ("nm", 1.0))
    with pytest.raises(ParseError):
        parse_config_text("steps = obox")
    with pytest.raises(ConfigError):
        cfg.replace(steps=(("gamp", 0.1),)).validate()


def test_binomial_ci():
    lo, hi = harness.binomial_ci(10, 1000)
    assert lo < 0.01 < hi
    assert harness.binomial_ci(0, 0) == (0.0, 1.0)
    assert harness.binomial_ci(0, 100)[0] == 0.0


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(harness.WORKERS_ENV, "3")
    assert harness.resolve_workers() == 3
    assert harness.resolve_workers(0) == 1


# ---------------------------------------------------------------------------
# config text format
# ---------------------------------------------------------------------------

def test_parse_config_text():
    vals = parse_config_text("""
        # scenario
        N = 64
        snr_db = 0, 10 ; 20   # mixed separators
        detectors = PQND, obox
        damping_snr_db = off
        norm_projection = no
    """)
    assert vals == {"N": 64, "snr_db": (0.0, 10.0, 20.0), "detectors": ("pqnd", "obox"),
                    "damping_snr_db": "off", "norm_projection": False}


@pytest.mark.parametrize("text, line", [
    ("N = 4\nthis line is wrong\n", 2),
    ("N = 4\n\nK = four\n", 3),
    ("colour = blue\n", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_config_text(text)
    assert exc.value.lineno == line


def test_config_round_trip(tmp_path):
    cfg = SystemConfig(N=32, K=3, snr_db=(1.5, 7.0), step=0.3, steps=(("obox", 0.009), ("nm", 1.0)),
                       damping_snr_db="off", cp_length=9,
                       quant="prq", sigma_tau_sq=0.2, freeze_thresholds=True)
    path = tmp_path / "c.cfg"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg
    assert load_config(path, seed=9).seed == 9


@settings(max_examples=30)
@given(st.integers(1, 512), st.integers(1, 64), st.lists(st.floats(-20, 40, allow_nan=False), min_size=1, max_size=4))
def test_config_round_trip_property(N, K, snr):
    cfg = SystemConfig(N=N, K=K, snr_db=tuple(snr))
    assert SystemConfig(**parse_config_text(dump_config(cfg))) == cfg
