"""BER versus SNR of PQND and 1BOX with ZTQ and PRQ in the SDS channel,
K = 2, 256-QAM, for N = 64, 128 and 256."""

from _common import parser, setup

from pqnd import SystemConfig, harness


def main():
    p = parser(__doc__, frames=20, out="prq_vs_ztq.csv")
    p.add_argument("--snr-db", default="0,5,10,15,20,25,30,35,40")
    p.add_argument("--antennas", default="64,128,256")
    args = p.parse_args()
    setup(args)
    snr = tuple(float(s) for s in args.snr_db.split(","))
    rows = []
    for N in (int(n) for n in args.antennas.split(",")):
        for quant in ("ztq", "prq"):
            cfg = SystemConfig(N=N, K=2, V=256, M=256, snr_db=snr, pdp="sds", quant=quant,
                               frames=args.frames, seed=args.seed)
            rows += harness.run_ber(cfg, args.workers, ("pqnd", "obox"))
    harness.write_csv(rows, harness.BER_COLUMNS, args.out)


if __name__ == "__main__":
    main()
