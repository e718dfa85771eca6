"""SVG figures from the CSV outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# fixed salt for the SVG element ids
matplotlib.rcParams["svg.hashsalt"] = "heavyerm"
import matplotlib.pyplot as plt  # noqa: E402

from heavyerm.io import CONC_HEADER, SUMMARY_HEADER, read_table  # noqa: E402

# fixed metadata keeps the SVG bytes reproducible too
_SVG_META = {"Date": None, "Creator": None}


def plot_summary(summary_csv, out_svg, theoretical_exponent: float | None = None) -> Path:
    t = read_table(summary_csv, SUMMARY_HEADER)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(t["n"], t["mean"], "o-", label="mean")
    ax.loglog(t["n"], t["median"], "s--", label="median")
    ax.loglog(t["n"], t["q95"], "^:", label="q95")
    if theoretical_exponent is not None and len(t["n"]):
        ref = t["mean"][0] * (t["n"] / t["n"][0]) ** theoretical_exponent
        ax.loglog(t["n"], ref, "k-", lw=0.8, label=f"n^{theoretical_exponent:.3f}")
    ax.set_xlabel("n")
    ax.set_ylabel("L2 error")
    ax.legend()
    fig.tight_layout()
    out = Path(out_svg)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return out


def plot_tail(conc_csv, out_svg) -> Path:
    t = read_table(conc_csv, CONC_HEADER)
    fig, ax = plt.subplots(figsize=(5, 4))
    pos = t["empirical"] > 0
    ax.errorbar(t["t"][pos], t["empirical"][pos], yerr=3 * t["std_error"][pos], fmt="o", ms=3,
                label="empirical (3 se)")
    ax.loglog(t["t"], t["bound"], "-", label="bound")
    ax.set_xlabel("t")
    ax.set_ylabel("P(max partial sum >= t)")
    ax.legend()
    fig.tight_layout()
    out = Path(out_svg)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return out
