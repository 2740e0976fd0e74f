"""BER of PQND versus the number of users K at 30 dB, SDS and LDS, ZTQ and PRQ
(N = 128, V = 256, 16-QAM)."""

from _common import parser, setup

from pqnd import SystemConfig, harness


def main():
    p = parser(__doc__, frames=20, out="sweep_users.csv")
    p.add_argument("--values", default="1,2,4,6,8,10,12,14,16")
    p.add_argument("--M", type=int, default=16)
    args = p.parse_args()
    setup(args)
    values = [int(v) for v in args.values.split(",")]
    rows = []
    for pdp in ("sds", "lds"):
        for quant in ("ztq", "prq"):
            cfg = SystemConfig(N=128, V=256, M=args.M, snr_db=(30.0,), pdp=pdp, quant=quant,
                               frames=args.frames, seed=args.seed)
            rows += harness.run_sweep(cfg, "K", values, args.workers, ("pqnd",))
    harness.write_csv(rows, harness.SWEEP_COLUMNS, args.out)


if __name__ == "__main__":
    main()
