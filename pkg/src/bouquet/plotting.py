"""Report figures and tables written next to ``verify`` JSON output."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import jsonio  # noqa: E402


def write_cases_tsv(report, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["check", "id", "ok", "ratio", "expected", "got"])
        for check, cases in report.cases.items():
            for c in cases:
                ratio = "" if c.ratio is None else format(c.ratio, ".17g")
                w.writerow([check, c.id, int(c.ok), ratio, jsonio.dumps(c.expected), jsonio.dumps(c.got)])
    return path


def plot_suite(report, suite: str, path) -> Path:
    """One panel per check: error/tolerance ratio per case where defined, else pass/fail."""
    checks = [(k, v) for k, v in report.cases.items() if k.split("/")[0] == suite]
    fig, axes = plt.subplots(len(checks), 1, figsize=(7, 2.2 * len(checks)), squeeze=False)
    for ax, (name, cases) in zip(axes[:, 0], checks):
        xs = range(len(cases))
        colours = ["tab:blue" if c.ok else "tab:red" for c in cases]
        if cases and all(c.ratio is not None for c in cases):
            ys = [max(c.ratio, 1e-18) for c in cases]
            ax.scatter(xs, ys, s=8, c=colours)
            ax.axhline(1.0, color="k", lw=0.8, ls="--")
            ax.set_yscale("log")
            ax.set_ylabel("error / tol")
        else:
            ax.bar(xs, [1] * len(cases), color=colours, width=1.0)
            ax.set_yticks([])
            ax.set_ylabel("pass")
        n_bad = sum(not c.ok for c in cases)
        ax.set_title(f"{name}: {len(cases) - n_bad}/{len(cases)} passed", fontsize=9)
        ax.set_xlabel("case")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def write_report(report, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json"]
    written[0].write_text(jsonio.dumps(report, indent=2) + "\n")
    written.append(write_cases_tsv(report, out / "cases.tsv"))
    for suite in dict.fromkeys(k.split("/")[0] for k in report.cases):
        written.append(plot_suite(report, suite, out / f"{suite}.png"))
    return written
