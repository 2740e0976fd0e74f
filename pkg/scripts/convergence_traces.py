"""Mean negative log-likelihood and BER per iteration for NM, the one-stage
variant, PQND and 1BOX in a 128 x 10 system with V = 32, 16-QAM, ZTQ, SDS."""

from _common import parser, setup

from pqnd import SystemConfig, harness


def main():
    p = parser(__doc__, frames=200, out="convergence_traces.csv")
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--iterations", type=int, default=10)
    args = p.parse_args()
    setup(args)
    cfg = SystemConfig(N=128, K=10, V=32, M=16, snr_db=(args.snr_db,), pdp="sds", quant="ztq",
                       detectors=("nm", "pqnd_zf", "pqnd", "obox"),
                       steps=(("nm", 1.0), ("pqnd_zf", 0.8), ("pqnd", 0.7), ("obox", 0.009)),
                       iterations=args.iterations, frames=args.frames, seed=args.seed)
    rows = harness.run_convergence(cfg, args.workers)
    harness.write_csv(rows, harness.CONVERGENCE_COLUMNS, args.out)


if __name__ == "__main__":
    main()
