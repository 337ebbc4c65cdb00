"""Figure rendering for the report path.

Every function writes one PNG next to the delimited output and returns the
path. Matplotlib is imported lazily with the Agg backend so the solver
library never needs a display.
"""

from __future__ import annotations

from pathlib import Path


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def congestion_profile_figure(field, out_path) -> Path:
    """Daily congestion level over the planning horizon."""
    plt = _plt()
    ts = [field.horizon * k / 400 for k in range(401)]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(ts, [field.delta(t) for t in ts], color="tab:blue")
    ax.set_xlabel("time")
    ax.set_ylabel("congestion level")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def congestion_map_figure(field, instance, out_path) -> Path:
    """Spatial congestion heatmap with customers, depot, and stations."""
    plt = _plt()
    xmin, ymin, xmax, ymax = field.bounds
    n = 160
    xs = [xmin + (xmax - xmin) * k / (n - 1) for k in range(n)]
    ys = [ymin + (ymax - ymin) * k / (n - 1) for k in range(n)]
    grid = [[min(field.cap, field.gamma(x, y)) for x in xs] for y in ys]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    im = ax.imshow(grid, origin="lower", extent=(xmin, xmax, ymin, ymax),
                   cmap="Greys", vmin=0.0, vmax=1.0, aspect="equal")
    fig.colorbar(im, ax=ax, label="congestion sensitivity")
    cust = [l for l in instance.locations if l.kind == "customer"]
    ax.scatter([c.x for c in cust], [c.y for c in cust], s=14,
               color="tab:blue", label="customers")
    stations = [l for l in instance.locations if l.kind == "station"]
    if stations:
        ax.scatter([s.x for s in stations], [s.y for s in stations], marker="^",
                   s=40, color="tab:green", label="stations")
    depot = instance.depot
    ax.scatter([depot.x], [depot.y], marker="x", s=70, color="tab:red", label="depot")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"{instance.name} ({instance.variant})")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _grouped_bars(rows, value_key, ylabel, out_path):
    plt = _plt()
    variants = sorted({r["Charging"] for r in rows})
    solvers = sorted({r["Solver"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.5, 3.5))
    width = 0.8 / max(len(solvers), 1)
    for k, solver in enumerate(solvers):
        xs = []
        vals = []
        for v, variant in enumerate(variants):
            members = [r for r in rows
                       if r["Solver"] == solver and r["Charging"] == variant]
            if not members:
                continue
            xs.append(v + k * width)
            vals.append(sum(float(m[value_key]) for m in members) / len(members))
        ax.bar(xs, vals, width=width * 0.9, label=solver)
    ax.set_xticks([v + width * (len(solvers) - 1) / 2 for v in range(len(variants))])
    ax.set_xticklabels(variants, fontsize=8)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def fleet_figure(rows, out_path) -> Path:
    return _grouped_bars(rows, "Avg. Veh.", "vehicles", out_path)


def completion_figure(rows, out_path) -> Path:
    return _grouped_bars(rows, "Avg. Compl.", "total completion time", out_path)


def cpu_per_evaluation_figure(rows, out_path) -> Path:
    return _grouped_bars(rows, "CPU per Evaluation", "seconds per evaluation", out_path)
