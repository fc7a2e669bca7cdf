"""Matplotlib figures written as SVG.

Output is byte-stable for identical input: a fixed SVG hash salt and no
date metadata.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "ionspec",
    "svg.fonttype": "path",
}


def _figure(width=5.0, height=None):
    height = height or width * (np.sqrt(5) - 1) / 2
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def _save(fig, path):
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_series(path, times, columns: dict, xlabel="time [s]", ylabel="signal"):
    fig, ax = _figure()
    for label, y in columns.items():
        ax.plot(times, y, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(columns) > 1:
        ax.legend(frameon=False)
    _save(fig, path)


def plot_spectrum(path, freqs, columns: dict, peaks=(), markers: dict | None = None,
                  xlabel="frequency [Hz]"):
    """Spectra with circles at ``peaks`` (``(f, amplitude)`` pairs) and vertical markers."""
    fig, ax = _figure()
    for label, amp in columns.items():
        ax.plot(freqs, amp, label=label)
    if len(peaks):
        pk = np.asarray(peaks, dtype=float)
        ax.plot(pk[:, 0], pk[:, 1], "o", mfc="none", color="tab:blue", label="peaks")
    for i, (name, f) in enumerate((markers or {}).items()):
        ax.axvline(f, ls="--", lw=0.8, color=f"C{(i + 2) % 10}", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("amplitude [arb.]")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_dispersion(path, k, measured, exact):
    fig, ax = _figure()
    ax.plot(k, exact, "-", color="tab:red", label="exact")
    ax.plot(k, measured, "o", mfc="none", color="tab:blue", label="measured")
    ax.set_xlabel("mode k'")
    ax.set_ylabel(r"$|\Delta E_{1,k'}|/h$ [Hz]")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_modes(path, amplitudes):
    n = amplitudes.shape[0]
    fig, axes = plt.subplots(n, 1, figsize=(3.0, 0.6 * n + 0.6), sharex=True)
    axes = np.atleast_1d(axes)
    sites = np.arange(1, n + 1)
    for k, ax in enumerate(axes):
        ax.bar(sites, amplitudes[:, k], color="tab:blue")
        ax.axhline(0, color="k", lw=0.5)
        ax.set_ylabel(f"k={k + 1}", rotation=0, labelpad=14)
        ax.set_yticks([])
    axes[-1].set_xlabel("ion j")
    axes[-1].set_xticks(sites)
    _save(fig, path)
