"""Figure rendering for the reproduction bundles (PNG files, no display)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

golden_mean = (math.sqrt(5) - 1.0) / 2.0
fig_width = 3.4
fig_size = [fig_width, fig_width * golden_mean * 1.6]

params = {
    "axes.labelsize": 9,
    "font.size": 8,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": fig_size,
    "figure.dpi": 150,
    "lines.markersize": 4,
    "lines.linewidth": 1.2,
}


def plot_pmax(bundle, path):
    """Two-panel plot: P_max(omega) on top, the optimal pulse length below."""
    n = 1 if bundle.objective == "p1" else 2
    omegas = [r["omega"] for r in bundle.rows]
    with plt.rc_context(params):
        fig, (ax_p, ax_t) = plt.subplots(2, 1, sharex=True)
        ax_p.plot(omegas, [r["p_max"] for r in bundle.rows], "k-", label="exact")
        if "strong_field_asymptote" in bundle.rows[0]:
            strong = [(r["omega"], r["strong_field_asymptote"]) for r in bundle.rows if r["omega"] >= 1]
            ax_p.plot(*zip(*strong), "o", mfc="none", color="tab:blue", label="strong-field law")
        for a in bundle.anchors:
            marker = "*" if "semiclassical" in a.label else "o"
            ax_p.plot([a.omega], [a.expected], marker, color="tab:red" if not a.ok else "tab:green")
        ax_p.set_ylabel(rf"$P_{n}^{{\rm max}}$")
        ax_p.set_ylim(0, 1.05 if n == 1 else 0.65)
        ax_p.legend(loc="lower right" if n == 1 else "upper right", frameon=False)
        ax_t.loglog(omegas, [r["argmax_T"] for r in bundle.rows], "k-")
        ax_t.set_xlabel(r"$\Omega / \Gamma$")
        ax_t.set_ylabel(r"$\Gamma T$ at maximum")
        ax_p.set_xscale("log")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_table1(rows, natural_rows, path):
    """Computed RAF probabilities against the reference theory values."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        labels = [f"{r.delta_rf:g}/{r.omega:g}" for r in rows]
        xs = range(len(rows))
        for n, color in zip(range(3), ("tab:blue", "tab:orange", "tab:green")):
            ax.plot(xs, [r.theory[n] for r in rows], "s", mfc="none", color=color,
                    label=f"$P_{n}$ reference")
            ax.plot(xs, [r.computed[n] for r in rows], "x", color=color, label=f"$P_{n}$ calibrated")
            ax.plot(xs, [r.computed[n] for r in natural_rows], ".", color=color,
                    label="half-period window" if n == 0 else None)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels)
        ax.set_xlabel(r"$\Delta_{\rm RF}$ / $\Omega$ ($\Gamma$)")
        ax.set_ylabel("probability")
        ax.legend(ncol=2, frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
