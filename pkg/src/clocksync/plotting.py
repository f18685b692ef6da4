"""Render experiment summaries as figures next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .experiments import MseRecord

__all__ = ["render_records"]

_BOUND_STYLE = {
    "crb": {"linestyle": "--", "color": "0.35"},
    "chrb": {"linestyle": ":", "color": "0.35"},
    "bcrb": {"linestyle": "--", "color": "0.55"},
    "bchrb": {"linestyle": ":", "color": "0.55"},
}


def render_records(records: list[MseRecord], path) -> Path:
    """Plot MSE curves (and bound lines) for one experiment run.

    The x axis is the number of exchanges when it varies, otherwise the
    process-noise level; both axes are logarithmic.
    """
    if not records:
        raise ValueError("no records to plot")
    n_values = {r.n for r in records}
    use_n = len(n_values) > 1 or len({r.sigma_gm for r in records}) <= 1
    x_of = (lambda r: r.n) if use_n else (lambda r: r.sigma_gm)

    fig, ax = plt.subplots(figsize=(7.0, 5.0))

    curves: dict[tuple[str, str, str], list[tuple[float, float]]] = {}
    for r in records:
        curves.setdefault((r.estimator, r.true_model, r.assumed_model), []).append((x_of(r), r.mse))
    for (estimator, true_model, assumed_model), points in curves.items():
        points.sort()
        xs, ys = zip(*points)
        label = f"{estimator} | true {true_model}"
        if assumed_model != true_model:
            label += f" | assumed {assumed_model}"
        ax.plot(xs, ys, marker="o", label=label)

    bound_lines: dict[tuple[str, str], dict[float, float]] = {}
    for r in records:
        for kind in ("crb", "chrb", "bcrb", "bchrb"):
            value = getattr(r, kind)
            if value is not None:
                bound_lines.setdefault((kind, r.true_model), {})[x_of(r)] = value
    for (kind, true_model), points in bound_lines.items():
        xs = sorted(points)
        ax.plot(xs, [points[x] for x in xs], label=f"{kind.upper()} | {true_model}", **_BOUND_STYLE[kind])

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of exchanges N" if use_n else "process-noise sigma")
    ax.set_ylabel("MSE of the offset estimate")
    ax.set_title(records[0].preset)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)

    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out
