"""Figures for the numeric subcommands, rendered to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 120,
    # keep the PNG bytes independent of the date and matplotlib build
    "svg.hashsalt": "mbases",
}


def _save(fig, path: Path) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return str(path)


def _floor(values, tiny=1e-18):
    return np.maximum(np.asarray(values, dtype=float), tiny)


def plot_arrangement_check(check: dict, out_dir) -> list[str]:
    """Critical points at the basepoint and flatness deviations per independent pair."""
    out_dir = Path(out_dir)
    written = []
    with plt.rc_context(RC):
        pts = np.array([complex(*p) if isinstance(p, list) else complex(p) for p in check["critical_points"]])
        poles = np.array(check.get("poles", []), dtype=float)
        fig, ax = plt.subplots()
        if poles.size:
            ax.plot(poles, np.zeros_like(poles), "x", color="0.4", label="hyperplanes")
        ax.plot(pts.real, pts.imag, "o", mfc="none", label="critical points")
        ax.axhline(0, color="0.8", lw=0.5)
        ax.set_xlabel("Re t")
        ax.set_ylabel("Im t")
        ax.legend(frameon=False)
        written.append(_save(fig, out_dir / "critical_points.png"))

        pairs = check["flatness"]
        if pairs:
            fig, ax = plt.subplots()
            labels = [f"{p['I1']}|{p['I2']}" for p in pairs]
            ax.bar(range(len(pairs)), _floor([p["deviation"] for p in pairs]), color="0.35")
            ax.axhline(check["flatness_tolerance"], color="C3", ls="--", lw=1, label="tolerance")
            ax.set_yscale("log")
            ax.set_xticks(range(len(pairs)))
            ax.set_xticklabels(labels, rotation=90)
            ax.set_ylabel("max |S(z) - S(z0)|")
            ax.legend(frameon=False)
            written.append(_save(fig, out_dir / "flatness.png"))
    return written


def plot_consistency(records: list[dict], tolerance: float, out_dir) -> list[str]:
    """Relative spread of the candidate values, one bar per cross-checked coefficient."""
    rows = [r for r in records if r["candidates"] > 1]
    if not rows:
        return []
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.bar(range(len(rows)), _floor([r["relative_spread"] for r in rows]), color="0.35")
        ax.axhline(tolerance, color="C3", ls="--", lw=1, label="tolerance")
        ax.set_yscale("log")
        ax.set_xlabel("coefficient (degree-lexicographic)")
        ax.set_ylabel("relative spread")
        ax.legend(frameon=False)
        return [_save(fig, Path(out_dir) / "consistency.png")]
