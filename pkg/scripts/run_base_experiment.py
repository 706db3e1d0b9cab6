#!/usr/bin/env python3
"""Reproduce the single-run base experiment.

Analyzes the reference two-network instance (c = (4, 11), D = 8,
alpha = (2, 1)), writes the per-class latency curves, and simulates one
trajectory of the base scenario under each tax policy.

Usage: python3 scripts/run_base_experiment.py [outdir]
"""

import sys
from pathlib import Path

from nettax import cli


def main() -> int:
    outdir = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    outdir.mkdir(parents=True, exist_ok=True)

    point = ["--c1", "4", "--c2", "11", "--demand", "8", "--alphas", "2,1"]
    rc = cli.main(["analyze", *point, "--db", "1",
                   "--csv", str(outdir / "analysis.csv")])
    rc |= cli.main(["fig2", *point, "--grid", "201",
                    "--out", str(outdir / "latency_curves.csv")])
    for policy in ("none", "approx", "optimal"):
        scenario = outdir / f"scenario_{policy}.ini"
        rc |= cli.main(["init", "--out", str(scenario)])
        scenario.write_text(
            scenario.read_text().replace("policy = none", f"policy = {policy}")
        )
        rc |= cli.main(["simulate", "--scenario", str(scenario),
                        "--out", str(outdir / f"trace_{policy}.csv")])
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
