"""Monte-Carlo orchestration: BER curves, convergence traces and parameter sweeps.

Every frame draws from its own substream keyed by ``(seed, snr_index,
frame)``, split into independent bit, channel, noise and threshold
generators. Results are folded in frame order, so serial and pooled runs
produce identical tables.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import apply_link, draw_channel
from .config import validate_convergence
from .detectors import detect
from .frontend import design_thresholds, quantize
from .numerics import RngStream

log = logging.getLogger(__name__)

BER_COLUMNS = ("snr_db", "detector", "quant", "pdp", "N", "K", "V", "M", "frames",
               "bits", "bit_errors", "ber", "ser", "flagged", "seed")
CONVERGENCE_COLUMNS = ("iteration", "detector", "mean_negll", "mean_ber")
SWEEP_COLUMNS = ("axis", "value") + BER_COLUMNS

WORKERS_ENV = "PQND_WORKERS"


@dataclass
class TrialRecord:
    bit_errors: int = 0
    bits: int = 0
    symbol_errors: int = 0
    symbols: int = 0
    negll_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    ber_trace: np.ndarray | None = None
    wall_time: float = 0.0
    flags: list = field(default_factory=list)


@dataclass
class FrameData:
    """Everything drawn for one frame; detectors only see ``frame`` and ``channel``."""

    symbols: np.ndarray
    bits: np.ndarray
    channel: object
    frame: object
    N0: float


def n0_from_snr_db(snr_db):
    return 10.0 ** (-snr_db / 10.0)


def draw_frame(config, snr_index, frame_index):
    snr = config.snr_db[snr_index]
    N0 = n0_from_snr_db(snr)
    c = config.constellation
    rb, rc, rn, _ = RngStream(config.seed, (snr_index, frame_index)).children(4)
    tau_frame = 0 if config.freeze_thresholds else frame_index
    rt = RngStream(config.seed, (snr_index, tau_frame)).children(4)[3]

    bits = rb.integers(0, 2, size=(config.V, config.K * c.bits_per_symbol), dtype=np.int8)
    x = c.map_bits(bits)
    ch = draw_channel(config.profile, config.N, config.K, config.V, rc)
    y = apply_link(x, ch, N0, rn)
    thresholds = design_thresholds(config.quant, config.K, config.N, config.profile.strong_taps,
                                   N0, rt, sigma_tau_sq=config.sigma_tau_sq)
    return FrameData(x, bits, ch, quantize(y, thresholds), N0)


def run_trial(config, snr_index, frame_index, detectors, traces=False):
    """Detect one frame with each detector; returns ``{name: TrialRecord}``."""
    data = draw_frame(config, snr_index, frame_index)
    c = config.constellation
    truth_bits = c.demap(data.symbols)[1]
    out = {}
    for name in detectors:
        params = config.params_for(name)
        t0 = time.perf_counter()
        est = detect(name, data.frame, data.channel, data.N0, params, c,
                     truth=data.symbols if traces else None, trace=traces)
        elapsed = time.perf_counter() - t0
        sym, bits = c.demap(est.xhat)
        out[name] = TrialRecord(
            bit_errors=int(np.count_nonzero(bits != truth_bits)),
            bits=int(truth_bits.size),
            symbol_errors=int(np.count_nonzero(sym != data.symbols)),
            symbols=int(data.symbols.size),
            negll_trace=est.trace_negll,
            ber_trace=est.trace_ber,
            wall_time=elapsed,
            flags=list(est.notes),
        )
    return out


def _trial_job(args):
    return run_trial(*args)


def resolve_workers(workers=None):
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def map_trials(jobs, workers=None):
    """Run trial jobs in order; a pool only changes where they run."""
    workers = resolve_workers(workers)
    if workers == 1 or len(jobs) <= 1:
        return [_trial_job(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs, chunksize=chunk))


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_ber(config, workers=None, detectors=None):
    """One row per (SNR point, detector)."""
    detectors = tuple(detectors or (config.detector,))
    config.validate(detectors)
    rows = []
    for si, snr in enumerate(config.snr_db):
        jobs = [(config, si, f, detectors) for f in range(config.frames)]
        records = map_trials(jobs, workers)
        for name in detectors:
            recs = [r[name] for r in records]
            bits = sum(r.bits for r in recs)
            errs = sum(r.bit_errors for r in recs)
            syms = sum(r.symbols for r in recs)
            serr = sum(r.symbol_errors for r in recs)
            flagged = sum(1 for r in recs if r.flags)
            rows.append({
                "snr_db": float(snr), "detector": name, "quant": config.quant,
                "pdp": str(config.pdp), "N": config.N, "K": config.K, "V": config.V,
                "M": config.M, "frames": config.frames, "bits": bits, "bit_errors": errs,
                "ber": errs / bits, "ser": serr / syms, "flagged": flagged,
                "seed": config.seed,
            })
            log.info("snr=%g %s ber=%.3e flagged=%d", snr, name, errs / bits, flagged)
    return rows


def run_convergence(config, workers=None):
    """Mean negative log-likelihood and BER per iteration, first SNR of the grid.

    All detectors see the same frames, so iteration 0 (the MRC start) is
    shared.
    """
    validate_convergence(config)
    detectors = tuple(config.detectors)
    jobs = [(config, 0, f, detectors, True) for f in range(config.frames)]
    records = map_trials(jobs, workers)
    rows = []
    for name in detectors:
        negll = np.mean([r[name].negll_trace for r in records], axis=0)
        ber = np.mean([r[name].ber_trace for r in records], axis=0)
        for t in range(negll.size):
            rows.append({"iteration": t, "detector": name,
                         "mean_negll": float(negll[t]), "mean_ber": float(ber[t])})
    return rows


def run_sweep(config, axis, values, workers=None, detectors=None):
    """Repeat :func:`run_ber` with ``N`` or ``K`` set to each value."""
    if axis not in ("N", "K"):
        raise ValueError(f"sweep axis must be 'N' or 'K', got {axis!r}")
    rows = []
    for value in values:
        cfg = config.replace(**{axis: int(value)})
        for row in run_ber(cfg, workers, detectors):
            rows.append({"axis": axis, "value": int(value), **row})
    return rows


def format_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_csv(rows, columns, path=None):
    text = format_csv(rows, columns)
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def binomial_ci(errors, trials, z=1.96):
    """Wilson score interval for an error rate."""
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)
