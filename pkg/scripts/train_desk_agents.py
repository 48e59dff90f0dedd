#!/usr/bin/env python3
"""Train both placement agents on the stationary desk configurations.

Runs the MA quantile agent and the PA multi-agent Q-network on the frozen
desk instances (about 15 minutes total on a desktop CPU), then renders the
convergence figure if the plots package is installed.

    python3 scripts/train_desk_agents.py --out runs/desk
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="runs/desk")
    args = parser.parse_args()
    out = Path(args.out)

    logs = []
    for name in ("ma_gaiqn_desk", "pa_magaqn_desk"):
        run_out = out / name
        cmd = [sys.executable, "-m", "flexrank.cli", "run",
               "--config", str(CONFIGS / f"{name}.json"), "--out", str(run_out)]
        print("+", " ".join(cmd))
        subprocess.run(cmd, check=True)
        logs.append(run_out / "train_log.csv")

    try:
        subprocess.run([sys.executable, "-m", "reportplots.cli", "convergence",
                        "--runs", *map(str, logs),
                        "--labels", "MA agent", "PA agents",
                        "--out", str(out)], check=True)
    except (subprocess.CalledProcessError, FileNotFoundError):
        print("plots package not installed; skipping figure rendering", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
