"""Matplotlib rendering of configuration-space Hasse diagrams.

Figures are built directly on an Agg canvas so rendering works headless
and never touches a global pyplot state.
"""

from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .space import ConfigSpace, _config_label


def _layout(space: ConfigSpace) -> dict[int, tuple[float, float]]:
    """Layered positions: y is the rank, x spreads a rank's states.

    One barycenter sweep over the lower neighbours keeps edge crossings
    tolerable on desk-scale diagrams.
    """
    poset = space.poset()
    ranks: dict[int, list[int]] = {}
    for i in range(len(space.states)):
        ranks.setdefault(poset.height[i], []).append(i)

    pos: dict[int, tuple[float, float]] = {}
    for r in sorted(ranks):
        row = ranks[r]
        if r > 0:
            def bary(i: int) -> float:
                lows = poset.lower_covers(i)
                if not lows:
                    return 0.0
                return sum(pos[j][0] for j in lows) / len(lows)

            row.sort(key=lambda i: (bary(i), i))
        offset = (len(row) - 1) / 2
        for k, i in enumerate(row):
            pos[i] = (k - offset, float(r))
    return pos


def hasse_figure(space: ConfigSpace, title: str | None = None) -> Figure:
    """Hasse diagram with configurations (and shot-sets when simple) as
    node labels and fired vertices as edge labels."""
    pos = _layout(space)
    n_ranks = max(y for _x, y in pos.values()) + 1
    per_rank = max(sum(1 for p in pos.values() if p[1] == y)
                   for y in range(int(n_ranks)))

    fig = Figure(figsize=(max(4.0, 1.9 * per_rank), max(3.0, 1.1 * n_ranks)))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    ax.set_axis_off()

    for i, v, j in space.covers:
        (x1, y1), (x2, y2) = pos[i], pos[j]
        ax.plot([x1, x2], [y1, y2], color="0.55", lw=1.0, zorder=1)
        ax.annotate(v, ((x1 + x2) / 2, (y1 + y2) / 2),
                    fontsize=7, color="#883311",
                    ha="center", va="center",
                    bbox=dict(boxstyle="round,pad=0.1", fc="white",
                              ec="none", alpha=0.8), zorder=2)

    for i, (x, y) in pos.items():
        label = _config_label(space, i)
        if space.shot_sets is not None:
            label += "\n{" + ",".join(sorted(space.shot_sets[i])) + "}"
        face = "#ffe9c9" if i in (space.root, space.top) else "#e8eef7"
        ax.annotate(label, (x, y), fontsize=7, ha="center", va="center",
                    bbox=dict(boxstyle="round,pad=0.3", fc=face, ec="0.3"),
                    zorder=3)

    if title:
        ax.set_title(title, fontsize=10)
    ax.set_xlim(min(x for x, _ in pos.values()) - 0.8,
                max(x for x, _ in pos.values()) + 0.8)
    ax.set_ylim(-0.6, n_ranks - 0.4)
    fig.tight_layout()
    return fig


def save_hasse(space: ConfigSpace, path: str, title: str | None = None) -> None:
    fig = hasse_figure(space, title)
    fig.savefig(path, dpi=150)
