"""Command-line driver: run / sweep / oracle / grad-check.

Output directories default to $FLEXRANK_OUT (falling back to ./runs) when
--out is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from flexrank import bench
from flexrank.config import ConfigError, load_config


def _default_out_root() -> Path:
    return Path(os.environ.get("FLEXRANK_OUT", "runs"))


def _load(args) -> object:
    cfg = load_config(args.config)
    if args.seed is not None:
        import dataclasses

        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out) if args.out else _default_out_root() / f"{cfg.system}_{cfg.algorithm}_seed{cfg.seed}"
    bench.run(cfg, out)
    print(f"run complete: {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out = Path(args.out) if args.out else _default_out_root() / f"sweep_{args.param}_{cfg.system}_{cfg.algorithm}"
    csv_path = bench.sweep(cfg, args.param, args.values, args.seeds, out,
                           workers=args.workers)
    print(f"sweep table: {csv_path}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _load(args)
    result = bench.run_oracle(cfg)
    payload = {
        "system": cfg.system,
        "best_value": result.best_value,
        "best_selection": result.best_selection.tolist(),
        "n_evaluated": result.n_evaluated,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle.json").write_text(text + "\n", encoding="utf-8", newline="\n")
    print(text)
    return 0


def _cmd_grad_check(args) -> int:
    from flexrank.nn.gradcheck import layer_gradient_checks

    results = layer_gradient_checks(seed=args.seed or 0, probes=args.probes)
    failed = False
    for name, err in results.items():
        ok = err < args.tolerance
        failed |= not ok
        print(f"{name:16s} max_rel_err={err:.3e}  {'PASS' if ok else 'FAIL'}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flexrank",
                                     description="Flexible-antenna effective-rank benchmark driver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured job")
    p_run.add_argument("--config", required=True, help="config or manifest JSON path")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--workers", type=int, default=1, help="accepted for symmetry; runs are single-process")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs over one parameter")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, choices=("n_users", "d_area"))
    p_sweep.add_argument("--values", required=True, nargs="*", type=float,
                         help="grid values; an empty list yields an empty table")
    p_sweep.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2, 3, 4])
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="exhaustive search on a frozen instance")
    p_oracle.add_argument("--config", required=True)
    p_oracle.add_argument("--seed", type=int, default=None)
    p_oracle.add_argument("--out", default=None)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gc = sub.add_parser("grad-check", help="finite-difference checks for every layer")
    p_gc.add_argument("--seed", type=int, default=0)
    p_gc.add_argument("--probes", type=int, default=10)
    p_gc.add_argument("--tolerance", type=float, default=1e-4)
    p_gc.set_defaults(func=_cmd_grad_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
