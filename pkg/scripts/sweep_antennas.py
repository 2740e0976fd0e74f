"""BER of PQND versus log2(N) for a single user at 30 dB, SDS and LDS, ZTQ and
PRQ (V = 256, 256-QAM)."""

from _common import parser, setup

from pqnd import SystemConfig, harness


def main():
    p = parser(__doc__, frames=40, out="sweep_antennas.csv")
    p.add_argument("--values", default="16,32,64,128,256,512")
    p.add_argument("--M", type=int, default=256)
    args = p.parse_args()
    setup(args)
    values = [int(v) for v in args.values.split(",")]
    rows = []
    for pdp in ("sds", "lds"):
        for quant in ("ztq", "prq"):
            cfg = SystemConfig(K=1, V=256, M=args.M, snr_db=(30.0,), pdp=pdp, quant=quant,
                               frames=args.frames, seed=args.seed)
            rows += harness.run_sweep(cfg, "N", values, args.workers, ("pqnd",))
    harness.write_csv(rows, harness.SWEEP_COLUMNS, args.out)


if __name__ == "__main__":
    main()
