"""Static SVG figures of an energy trace."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .envelope import eval_envelope  # noqa: E402

# no creation date and a fixed id salt, so identical inputs give identical files
SVG_META = {"Date": None}
matplotlib.rcParams["svg.hashsalt"] = "pwave"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=SVG_META)
    plt.close(fig)


def energy_plots(trace, outdir, env=None, weight=None):
    """Write energy_linear.svg, energy_semilog.svg and, with a weight, energy_vs_phi.svg."""
    paths = []
    t, E = trace.t, trace.E
    bound = None
    if env is not None:
        lo, hi = env.fit_window
        mask = (t >= lo) & (t <= hi)
        bound = (t[mask], eval_envelope(env, t[mask]))

    for name, logy in (("energy_linear.svg", False), ("energy_semilog.svg", True)):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(t, E, lw=1.2, label="E(t)")
        if bound is not None:
            ax.plot(*bound, "--", lw=1.0, label=f"fitted {env.kind}")
        if logy and np.all(E > 0):
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("E")
        ax.legend()
        path = outdir / name
        _save(fig, path)
        paths.append(path)

    if weight is not None:
        fig, ax = plt.subplots(figsize=(6, 4))
        x = np.asarray(weight.phi(t))
        ax.plot(x, E, lw=1.2, label="E")
        if bound is not None:
            ax.plot(np.asarray(weight.phi(bound[0])), bound[1], "--", lw=1.0,
                    label=f"fitted {env.kind}")
        if np.all(E > 0):
            ax.set_yscale("log")
        ax.set_xlabel(f"phi(t) [{weight.name}]")
        ax.set_ylabel("E")
        ax.legend()
        path = outdir / "energy_vs_phi.svg"
        _save(fig, path)
        paths.append(path)
    return paths
