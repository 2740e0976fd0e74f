"""Command line entry point: ``pqnd {ber,converge,sweep-k,sweep-n,selftest}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness, selftest
from .config import coerce, load_config
from .errors import ConfigError, OracleScopeError, ParseError

# flag name -> config key; every config key has a flag
_FLAGS = {
    "--N": "N", "--K": "K", "--V": "V", "--M": "M",
    "--snr-db": "snr_db", "--pdp": "pdp", "--quant": "quant",
    "--detector": "detector", "--detectors": "detectors",
    "--step": "step", "--steps": "steps", "--iterations": "iterations",
    "--damping-snr-db": "damping_snr_db", "--norm-projection": "norm_projection",
    "--frames": "frames", "--seed": "seed", "--cp-length": "cp_length",
    "--sigma-tau-sq": "sigma_tau_sq", "--freeze-thresholds": "freeze_thresholds",
}


def _add_common(p):
    p.add_argument("--config", help="key = value scenario file")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--workers", type=int, help=f"worker processes (default: ${harness.WORKERS_ENV} or all cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    for flag, key in _FLAGS.items():
        p.add_argument(flag, dest=key, metavar=key.upper(), default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="pqnd", description="One-bit massive MIMO-OFDM link simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("ber", help="BER versus SNR"))
    _add_common(sub.add_parser("converge", help="likelihood/BER per iteration"))
    for name, axis in (("sweep-k", "K"), ("sweep-n", "N")):
        p = sub.add_parser(name, help=f"BER versus {axis}")
        _add_common(p)
        p.add_argument("--values", required=True, help=f"comma-separated {axis} values")
    sub.add_parser("selftest", help="run the oracle and invariant checks")
    return parser


def _config_from_args(args):
    overrides = {}
    for key in _FLAGS.values():
        raw = getattr(args, key, None)
        if raw is not None:
            k, v = coerce(key, raw)
            overrides[k] = v
    return load_config(args.config, **overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return 1 if selftest.run_all() else 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _config_from_args(args)
        if args.command == "ber":
            rows = harness.run_ber(config, args.workers)
            harness.write_csv(rows, harness.BER_COLUMNS, args.out)
        elif args.command == "converge":
            rows = harness.run_convergence(config, args.workers)
            harness.write_csv(rows, harness.CONVERGENCE_COLUMNS, args.out)
        else:
            axis = "K" if args.command == "sweep-k" else "N"
            try:
                values = [int(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be integers, got {args.values!r}") from None
            if not values:
                raise ConfigError("--values is empty")
            rows = harness.run_sweep(config, axis, values, args.workers)
            harness.write_csv(rows, harness.SWEEP_COLUMNS, args.out)
    except (ConfigError, ParseError, OracleScopeError, OSError) as exc:
        print(f"pqnd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
