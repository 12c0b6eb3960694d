#!/usr/bin/env python3
"""Generate the 1D branch curves with stability flags.

Usage: python scripts/branch_curves.py [outdir] [--points N]
"""
import argparse
import sys
from pathlib import Path

from quadmech.cli import main as cli_main


def run(outdir: Path, points: int | None) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for tag in ("fig2c", "fig2d", "fig3b", "fig3d"):
        argv = ["reproduce", tag, "--out", str(outdir / f"{tag}.csv")]
        if points:
            argv += ["--set", f"points={points}"]
        rc = cli_main(argv)
        print(f"{tag}: exit {rc}")
        status = max(status, 0 if rc == 2 else rc)
    return status


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="out/branch_curves")
    ap.add_argument("--points", type=int, default=None)
    args = ap.parse_args()
    sys.exit(run(Path(args.outdir), args.points))
