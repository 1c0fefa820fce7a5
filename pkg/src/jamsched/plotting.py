"""Figure rendering for ratio series.  matplotlib is imported lazily so the
library and the CSV path work without it."""
from __future__ import annotations

from fractions import Fraction


def _mpl():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_series(series, path, title=None, unit=1, reference=None):
    """Completed length of both sides (top) and their ratio (bottom).

    ``unit`` converts ticks to time units on the x axis; ``reference`` draws
    a horizontal guide on the ratio panel (e.g. a proven bound).
    """
    plt = _mpl()
    ts = [Fraction(t, unit) for t, _, _, _ in series.samples]
    x = [float(t) for t in ts]
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 4.8))
    top.step(x, [a for _, a, _, _ in series.samples], where="post", label="online")
    top.step(x, [o for _, _, o, _ in series.samples], where="post", label=f"offline ({series.opt_source})")
    top.set_ylabel("completed length")
    top.legend(loc="upper left", frameon=False)
    pts = [(xi, float(r)) for xi, (_, _, _, r) in zip(x, series.samples) if r is not None]
    if pts:
        bottom.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", lw=1)
    if reference is not None:
        bottom.axhline(float(reference), color="grey", ls="--", lw=0.8)
    bottom.set_ylabel("ratio")
    bottom.set_xlabel("time")
    bottom.set_ylim(bottom=0)
    if title:
        top.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
