"""Shared argument handling for the experiment scripts."""

import argparse
import logging


def parser(description, frames, out):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--frames", type=int, default=frames, help="Monte-Carlo frames per point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--out", default=out, help="CSV output path ('-' for stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def setup(args):
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
