#!/usr/bin/env python3
"""Reproduce the load-sweep experiment.

Sweeps the offered load across the default grid for all three tax
policies, with and without handovers, and writes the summary CSV plus
the blocking-rate crossing points.

Usage: python3 scripts/run_load_sweep.py [outdir] [jobs]
"""

import sys
from pathlib import Path

from nettax import cli


def main() -> int:
    outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    jobs = sys.argv[2] if len(sys.argv) > 2 else "1"
    outdir.mkdir(parents=True, exist_ok=True)

    scenario = outdir / "scenario_sweep.ini"
    rc = cli.main(["init", "--out", str(scenario)])
    rc |= cli.main(["sweep", "--scenario", str(scenario),
                    "--out", str(outdir / "sweep_summary.csv"),
                    "--jobs", jobs])
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
