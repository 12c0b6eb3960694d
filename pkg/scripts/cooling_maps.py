#!/usr/bin/env python3
"""Generate the cooling maps and the branch-resolved cooling curves.

Usage: python scripts/cooling_maps.py [outdir] [--points N] [--convention C]
"""
import argparse
import sys
from pathlib import Path

from quadmech.cli import main as cli_main


def run(outdir: Path, points: int | None, convention: str) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for tag in ("fig5", "fig6", "fig7", "fig4"):
        argv = ["reproduce", tag, "--out", str(outdir / f"{tag}.csv"),
                "--convention", convention]
        if points:
            argv += ["--set", f"points={points}"]
        rc = cli_main(argv)
        print(f"{tag}: exit {rc}")
        status = max(status, 0 if rc == 2 else rc)
    return status


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="out/cooling_maps")
    ap.add_argument("--points", type=int, default=None)
    ap.add_argument("--convention", choices=("kappa", "omega1"),
                    default="kappa")
    args = ap.parse_args()
    sys.exit(run(Path(args.outdir), args.points, args.convention))
