"""CSV tables and matplotlib figures for scan and benchmark reports."""

from __future__ import annotations

import csv
from pathlib import Path

from matplotlib.figure import Figure

REFERENCE_SECONDS_PER_PAIR = 3.54e-7
REFERENCE_MAX_KILL_PRIME = 137


def _figure(width=6.4, height=4.0):
    fig = Figure(figsize=(width, height), dpi=120)
    ax = fig.add_subplot(1, 1, 1)
    ax.grid(True, alpha=0.3)
    return fig, ax


def write_histogram_csv(stats, path: str | Path) -> Path:
    path = Path(path)
    total = sum(stats.histogram.values()) or 1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["prime", "kills", "fraction"])
        for r in sorted(stats.histogram):
            n = stats.histogram[r]
            w.writerow([r, n, f"{n / total:.6g}"])
    return path


def write_blocks_csv(stats, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p_block_start", "r_max"])
        for b in sorted(stats.block_r_max):
            w.writerow([b * 100, stats.block_r_max[b]])
    return path


def plot_kill_depth(stats, path: str | Path) -> Path:
    fig, ax = _figure()
    primes = sorted(stats.histogram)
    counts = [stats.histogram[r] for r in primes]
    ax.bar([str(r) for r in primes], counts, color="tab:blue")
    ax.set_yscale("log")
    ax.set_xlabel("first rejecting prime r")
    ax.set_ylabel("pairs rejected")
    ax.set_title(f"Kill depth, {stats.pairs_tested:,} pairs")
    for label in ax.get_xticklabels():
        label.set_rotation(90)
        label.set_fontsize(7)
    fig.tight_layout()
    fig.savefig(path)
    return Path(path)


def plot_block_r_max(stats, path: str | Path) -> Path:
    fig, ax = _figure()
    blocks = sorted(stats.block_r_max)
    ax.step([b * 100 for b in blocks], [stats.block_r_max[b] for b in blocks], where="post")
    ax.axhline(REFERENCE_MAX_KILL_PRIME, color="tab:red", ls="--", lw=1, label="r = 137")
    ax.set_xlabel("p (block of 100)")
    ax.set_ylabel("r_max")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path)
    return Path(path)


def write_scan_report(stats, out_dir: str | Path, prefix: str = "scan") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        write_histogram_csv(stats, out / f"{prefix}_kill_depth.csv"),
        write_blocks_csv(stats, out / f"{prefix}_block_r_max.csv"),
        plot_kill_depth(stats, out / f"{prefix}_kill_depth.png"),
        plot_block_r_max(stats, out / f"{prefix}_block_r_max.png"),
    ]


def write_bench_report(runs: list[dict], out_dir: str | Path) -> list[Path]:
    """runs: dicts with keys run, pairs, seconds, seconds_per_pair."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bench.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["run", "pairs", "seconds", "seconds_per_pair"])
        w.writeheader()
        for row in runs:
            w.writerow({k: row[k] for k in w.fieldnames})
    fig, ax = _figure()
    ax.plot([r["run"] for r in runs], [r["seconds_per_pair"] for r in runs], "o-", label="measured")
    ax.axhline(REFERENCE_SECONDS_PER_PAIR, color="tab:red", ls="--", lw=1, label="3.54e-7 s (reference)")
    ax.set_yscale("log")
    ax.set_xlabel("run")
    ax.set_ylabel("seconds per pair")
    ax.legend()
    fig.tight_layout()
    png_path = out / "bench.png"
    fig.savefig(png_path)
    return [csv_path, png_path]
