#!/usr/bin/env python3
"""Reproduce the single-block estimation tables: fig7, fig8, fig9.

Runs the SNR sweep from configs/estimation_sweep.conf for all five
schemes, then a second campaign sweeping the codebook resolution, and
emits the per-figure CSVs next to each summary:

  runs/estimation_sweep/   trace.csv summary.csv fig7.csv fig9.csv
  runs/phase_bits_sweep/   trace.csv summary.csv fig8.csv

Trial counts are desk scale by default; pass --trials to change both runs.
"""

import argparse
import os
import sys

from uavtrack.cli import main as uavtrack_main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _run(argv):
    code = uavtrack_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--out", default=os.path.join(ROOT, "runs"))
    args = parser.parse_args()

    config = os.path.join(ROOT, "configs", "estimation_sweep.conf")

    sweep_dir = os.path.join(args.out, "estimation_sweep")
    _run(["simulate", "--config", config, "--trials", str(args.trials), "--out", sweep_dir])
    summary = os.path.join(sweep_dir, "summary.csv")
    for fig in ("fig7", "fig9"):
        _run(["tables", "--summary", summary, "--figure", fig])

    bits_dir = os.path.join(args.out, "phase_bits_sweep")
    _run(
        [
            "simulate",
            "--config", config,
            "--trials", str(args.trials),
            "--out", bits_dir,
            "--schemes", "analog_gpr,codebook_max",
            "--snr-db", "10,20",
            "--phase-bits", "4,5,6,7,8",
        ]
    )
    _run(["tables", "--summary", os.path.join(bits_dir, "summary.csv"), "--figure", "fig8"])


if __name__ == "__main__":
    main()
