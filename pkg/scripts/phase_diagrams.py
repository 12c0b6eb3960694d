#!/usr/bin/env python3
"""Generate the 2D solution-count phase diagrams (CSV + gnuplot stubs).

Usage: python scripts/phase_diagrams.py [outdir] [--points N] [--threads N]
"""
import argparse
import sys
from pathlib import Path

from quadmech.cli import main as cli_main


def run(outdir: Path, points: int | None, threads: int) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for tag in ("fig2a", "fig2b", "fig3a", "fig3c"):
        argv = ["reproduce", tag, "--out", str(outdir / f"{tag}.csv"),
                "--threads", str(threads)]
        if points:
            argv += ["--set", f"points={points}"]
        rc = cli_main(argv)
        print(f"{tag}: exit {rc}")
        status = max(status, 0 if rc == 2 else rc)  # mismatch diag is expected
    return status


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="out/phase_diagrams")
    ap.add_argument("--points", type=int, default=None)
    ap.add_argument("--threads", type=int, default=2)
    args = ap.parse_args()
    sys.exit(run(Path(args.outdir), args.points, args.threads))
