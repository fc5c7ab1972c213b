"""Render zfsim result CSVs as figures.

Three figure kinds: error-magnitude CDFs (one curve per antenna count),
expected-SNR sweeps and sum-SE sweeps (simulated points as markers,
closed-form curves as lines, one color per scenario). Rendering is
read-only and deterministic: a checked-in style sheet, no timestamps.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .csvio import SchemaMismatch, clean_series, read_result_csv  # noqa: E402

FIGURE_KINDS = ("cdf", "snr_sweep", "se_sweep")
_STYLE = Path(__file__).with_name("style.mplstyle")


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_kind: str
    output: str

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise ValueError(f"figure_kind must be one of {FIGURE_KINDS}, "
                             f"got {self.figure_kind!r}")


def _caption(metadata):
    bits = [f"{k}={metadata[k]}" for k in ("experiment", "seed", "config_sha256")
            if k in metadata]
    return "  ".join(bits)


def _render_cdf(data, ax):
    (prob,) = data.require("cdf_prob")
    m_labels = [name for name in data.columns if name.startswith("alpha_m")]
    if not m_labels:
        raise SchemaMismatch("missing columns: alpha_m*")
    for name in sorted(m_labels, key=lambda s: int(s.split("alpha_m")[1])):
        x, y = clean_series(data.columns[name], prob)
        ax.plot(x, y, label=f"M = {name.split('alpha_m')[1]}")
    ax.set_xlabel("error magnitude")
    ax.set_ylabel("probability")
    ax.set_ylim(0.0, 1.0)
    ax.set_title("Series-inverse error magnitude CDF")
    return m_labels


def _render_sweep(data, ax, sim_suffix, ana_suffix, err_suffix, ylabel, title):
    (op,) = data.require("op_snr_db")
    labels = data.labels_with_suffix(sim_suffix)
    if not labels:
        raise SchemaMismatch(f"missing columns: *{sim_suffix}")
    for i, label in enumerate(labels):
        color = f"C{i % 7}"
        sim = data.columns[label + sim_suffix]
        x, y = clean_series(op, sim)
        if label + err_suffix in data.columns:
            _, err = clean_series(op, data.columns[label + err_suffix])
            ax.errorbar(x, y, yerr=err, fmt="o", color=color, capsize=2,
                        label=f"{label} simulated")
        else:
            ax.plot(x, y, "o", color=color, label=f"{label} simulated")
        if label + ana_suffix in data.columns:
            xa, ya = clean_series(op, data.columns[label + ana_suffix])
            ax.plot(xa, ya, "-", color=color, label=f"{label} closed form")
    ax.set_xlabel("operating SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return labels


def render(spec):
    """Render one figure; returns the output path."""
    data = read_result_csv(spec.input_csv)
    with plt.style.context(str(_STYLE)):
        fig, ax = plt.subplots()
        if spec.figure_kind == "cdf":
            _render_cdf(data, ax)
        elif spec.figure_kind == "snr_sweep":
            _render_sweep(data, ax, "_sim_snr_db", "_analytic_snr_db",
                          "_sim_snr_stderr_db", "expected per-user SNR (dB)",
                          "Expected ZF SNR vs operating SNR")
        else:
            _render_sweep(data, ax, "_sim_se", "_analytic_se", "_sim_se_stderr",
                          "sum spectral efficiency (bits/s/Hz)",
                          "Ergodic sum spectral efficiency vs operating SNR")
        ax.legend(loc="best")
        caption = _caption(data.metadata)
        if caption:
            fig.text(0.01, 0.005, caption, fontsize=6, alpha=0.7)
        fig.tight_layout()
        fig.savefig(spec.output)
        plt.close(fig)
    return spec.output
