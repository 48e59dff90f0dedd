#!/usr/bin/env python3
"""Reproduce the random-baseline reference grids for both antenna systems.

Sweeps user count (40..80) and area side (120..200 m) with 5 seeds x 500
evaluation slots per cell, then renders a combined comparison table when the
plots package is installed.

    python3 scripts/reproduce_tables.py --out runs/tables [--workers 4]
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

GRIDS = {
    "n_users": ["40", "50", "60", "70", "80"],
    "d_area": ["120", "140", "160", "180", "200"],
}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="runs/tables")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seeds", nargs="+", default=["0", "1", "2", "3", "4"])
    args = parser.parse_args()
    out = Path(args.out)

    sweep_files = {}
    for system in ("ma", "pa"):
        for param, values in GRIDS.items():
            cell_out = out / f"{system}_random_{param}"
            cmd = [sys.executable, "-m", "flexrank.cli", "sweep",
                   "--config", str(CONFIGS / f"{system}_random.json"),
                   "--param", param, "--values", *values,
                   "--seeds", *args.seeds,
                   "--workers", str(args.workers),
                   "--out", str(cell_out)]
            print("+", " ".join(cmd))
            subprocess.run(cmd, check=True)
            sweep_files[(system, param)] = cell_out / "sweep.csv"

    try:
        for param in GRIDS:
            table_cmd = [sys.executable, "-m", "reportplots.cli", "table",
                         "--sweeps", str(sweep_files[("ma", param)]),
                         str(sweep_files[("pa", param)]),
                         "--labels", "MA RANDOM", "PA RANDOM",
                         "--out", str(out / f"table_{param}.md")]
            subprocess.run(table_cmd, check=True)
    except (subprocess.CalledProcessError, FileNotFoundError):
        print("plots package not installed; skipping table rendering", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
