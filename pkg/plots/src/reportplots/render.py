"""Figure and table renderers.

Outputs regenerate deterministically from identical inputs: a fixed style,
a fixed color cycle, and no timestamps embedded in the files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["svg.hashsalt"] = "reportplots"   # deterministic SVG ids

from reportplots.artifacts import RunArtifact, SweepTable, read_sweep, read_train_log

PANELS = (("cum_reward", "Cumulative reward"),
          ("mean_erank", "Effective rank"),
          ("mean_penalty", "Penalty"))

COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]

MISSING_CELL = "—"   # em dash for absent cells


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with edge shrinkage (output length preserved)."""
    if window <= 1 or x.size == 0:
        return x.astype(float)
    half = window // 2
    out = np.empty(x.size)
    for i in range(x.size):
        lo = max(0, i - half)
        hi = min(x.size, i + half + 1)
        out[i] = x[lo:hi].mean()
    return out


def render_convergence(runs: list[RunArtifact], out_dir, stem: str = "convergence",
                       window: int = 20) -> list[Path]:
    """Three-panel training figure (reward / effective rank / penalty).

    Writes one vector (svg) and one raster (png) file and returns their
    paths. Curves are smoothed with a centered moving average.
    """
    if not runs:
        raise ValueError("at least one run artifact is required")
    loaded = [(run, read_train_log(run.path)) for run in runs]

    fig, axes = plt.subplots(1, 3, figsize=(13.5, 4.0))
    for run, data in loaded:
        color = COLORS[run.color_index % len(COLORS)]
        episodes = data["episode"]
        for ax, (col, title) in zip(axes, PANELS):
            ax.plot(episodes, moving_average(data[col], window),
                    label=run.label, color=color, linewidth=1.6)
    for ax, (col, title) in zip(axes, PANELS):
        ax.set_xlabel("Episode")
        ax.set_ylabel(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"{stem}.svg", out_dir / f"{stem}.png"]
    fig.savefig(paths[0], metadata={"Date": None})
    fig.savefig(paths[1], dpi=150)
    plt.close(fig)
    return paths


def render_table(sweeps: list[RunArtifact], out_path) -> Path:
    """Markdown comparison table: algorithm rows, grid-value columns.

    Cells show mean±std; the best mean per column is bolded; cells absent
    from a sweep render as an em dash. All sweeps must share the same
    parameter axis.
    """
    if not sweeps:
        raise ValueError("at least one sweep artifact is required")
    loaded: list[tuple[RunArtifact, SweepTable]] = [(s, read_sweep(s.path)) for s in sweeps]
    params = {t.param for _, t in loaded}
    if len(params) != 1:
        raise ValueError(f"sweep axes differ: {sorted(params)}")
    param = params.pop()
    values = sorted({v for _, t in loaded for v in t.values})

    best = {}
    for v in values:
        col = [(t.mean[v], s.label) for s, t in loaded if v in t.mean]
        best[v] = max(col)[1] if col else None

    def fmt_value(v: float) -> str:
        return f"{v:g}"

    lines = ["| Algorithm | " + " | ".join(f"{param}={fmt_value(v)}" for v in values) + " |",
             "|" + " --- |" * (len(values) + 1)]
    for s, t in loaded:
        cells = []
        for v in values:
            if v not in t.mean:
                cells.append(MISSING_CELL)
                continue
            cell = f"{t.mean[v]:.3f}±{t.std[v]:.3f}"
            cells.append(f"**{cell}**" if best[v] == s.label else cell)
        lines.append(f"| {s.label} | " + " | ".join(cells) + " |")

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return out_path
