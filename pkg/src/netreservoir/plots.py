"""SVG line plots of score versus perturbation step."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no date stamp keep the SVG reproducible
plt.rcParams["svg.hashsalt"] = "netreservoir"


def plot_traces(traces, metric: str, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for t in traces:
        ax.plot([s.step for s in t.steps], t.metric(metric), lw=1, alpha=0.7, label=f"rep {t.rep}")
    ax.set_xlabel("perturbation step")
    ax.set_ylabel(metric.replace("_", " "))
    ax.set_ylim(-0.02, 1.02)
    if len(traces) <= 10:
        ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
