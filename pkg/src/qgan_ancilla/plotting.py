"""Static figures for the report commands (Agg backend, reproducible PNG bytes)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no software/version stamp, so identical data gives identical files
_PNG_META = {"Software": None}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_trace(record, path, title: str = "") -> None:
    """Fidelity against iteration, dashed lines at schedule events."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(range(len(record.fidelity_trace)), record.fidelity_trace, lw=1.0)
    for ev in record.events:
        ax.axvline(ev["iteration"], ls="--", color="k", lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.02)
    ax.set_title(title or f"seed {record.seed}")
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(rows, path, title: str = "") -> None:
    """Bar chart of F_avg_max per point; the reference row becomes a dotted line."""
    ref = [r for r in rows if r["point"] == "reference"]
    data = [r for r in rows if r["point"] != "reference"]
    fig, ax = plt.subplots(figsize=(max(4, 0.7 * len(data) + 2), 3.5))
    x = range(len(data))
    ax.bar(x, [r["f_avg_max"] for r in data], yerr=[r["std_error"] for r in data], capsize=3, color="tab:blue")
    if ref:
        ax.axhline(ref[0]["f_avg_max"], ls=":", color="k", label="reference")
        ax.legend(loc="lower right")
    ax.set_xticks(list(x))
    ax.set_xticklabels([r["point"] for r in data], rotation=45, ha="right")
    ax.set_ylabel("average max fidelity")
    ax.set_ylim(0, 1.02)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_rank_histograms(reports, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    width = 0.8 / max(len(reports), 1)
    for i, rep in enumerate(reports):
        ranks = sorted(rep.histogram)
        ax.bar([r + (i - len(reports) / 2) * width for r in ranks],
               [rep.histogram[r] / rep.n_samples for r in ranks], width=width, label=rep.config.value)
    ax.set_xlabel("numerical rank")
    ax.set_ylabel("fraction of samples")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
