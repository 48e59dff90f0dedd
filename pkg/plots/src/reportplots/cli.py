"""plots CLI: convergence figures and comparison tables from run CSVs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from reportplots.artifacts import RunArtifact, SchemaError
from reportplots.render import render_convergence, render_table


def _artifacts(paths, labels):
    if labels and len(labels) != len(paths):
        raise ValueError(f"{len(paths)} inputs but {len(labels)} labels")
    out = []
    for i, p in enumerate(paths):
        label = labels[i] if labels else Path(p).stem
        out.append(RunArtifact.from_path(p, label=label, color_index=i))
    return out


def _cmd_convergence(args) -> int:
    runs = _artifacts(args.runs, args.labels)
    paths = render_convergence(runs, args.out, stem=args.stem, window=args.window)
    for p in paths:
        print(p)
    return 0


def _cmd_table(args) -> int:
    sweeps = _artifacts(args.sweeps, args.labels)
    out = Path(args.out)
    target = out / "table.md" if out.suffix == "" else out
    print(render_table(sweeps, target))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render flexrank run artifacts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_conv = sub.add_parser("convergence", help="three-panel training figure")
    p_conv.add_argument("--runs", required=True, nargs="+", help="train_log.csv paths")
    p_conv.add_argument("--labels", nargs="*", default=None)
    p_conv.add_argument("--out", required=True, help="output directory")
    p_conv.add_argument("--stem", default="convergence")
    p_conv.add_argument("--window", type=int, default=20, help="smoothing window (episodes)")
    p_conv.set_defaults(func=_cmd_convergence)

    p_table = sub.add_parser("table", help="comparison table from sweep CSVs")
    p_table.add_argument("--sweeps", required=True, nargs="+", help="sweep.csv paths")
    p_table.add_argument("--labels", nargs="*", default=None)
    p_table.add_argument("--out", required=True, help="output file or directory")
    p_table.set_defaults(func=_cmd_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
