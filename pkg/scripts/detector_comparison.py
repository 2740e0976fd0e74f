"""BER versus SNR of MRC, ZF, 1BOX and PQND with ZTQ in the LDS channel
(N = 128, K = 10, V = 256, 16-QAM)."""

from _common import parser, setup

from pqnd import SystemConfig, harness


def main():
    p = parser(__doc__, frames=20, out="detector_comparison.csv")
    p.add_argument("--snr-db", default="-5,0,5,10,15,20,25,30")
    args = p.parse_args()
    setup(args)
    snr = tuple(float(s) for s in args.snr_db.split(","))
    cfg = SystemConfig(N=128, K=10, V=256, M=16, snr_db=snr, pdp="lds", quant="ztq",
                       frames=args.frames, seed=args.seed)
    rows = harness.run_ber(cfg, args.workers, ("mrc", "zf", "obox", "pqnd"))
    harness.write_csv(rows, harness.BER_COLUMNS, args.out)


if __name__ == "__main__":
    main()
