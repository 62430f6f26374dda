"""Tables and plot data rendered from a results store, without recomputation."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import CLASSIFIER_ORDER, DISPLAY_NAMES, METHOD_ORDER
from .evaluation.grid import METRICS, aggregate, fold_means
from .evaluation.metrics import gain_percent, percent
from .features.matrix import MethodTag

BOXPLOT_HEADER = ["method", "classifier", "n", "oversampled", "metric", "value"]
METRIC_TITLES = {"precision": "Precision", "recall": "Recall", "f1": "F1", "auc": "AUC"}


def display_name(method: str) -> str:
    try:
        return DISPLAY_NAMES[MethodTag(method)]
    except ValueError:
        return method


def _order(values, canonical) -> list:
    canon = [c.value for c in canonical]
    known = [c for c in canon if c in values]
    return known + sorted(v for v in values if v not in canon)


def _markdown(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def table4_rows(results, oversampled: str = "none") -> list[list[str]]:
    """One row per (method, classifier): A-B(C) of fold-mean metrics over n."""
    subset = [r for r in results if r.oversampled == oversampled]
    if not subset:
        raise ValueError(f"no results with oversampled={oversampled!r}")
    aggs = {(a.keys["method"], a.keys["classifier"]): a for a in aggregate(subset, ("method", "classifier"))}
    methods = _order({m for m, _ in aggs}, METHOD_ORDER)
    classifiers = _order({c for _, c in aggs}, CLASSIFIER_ORDER)
    rows = []
    for m in methods:
        for c in classifiers:
            a = aggs.get((m, c))
            if a is not None:
                rows.append([display_name(m), c] + [a.format(x) for x in METRICS])
    return rows


def render_table4(results, oversampled: str = "none") -> str:
    header = ["Method", "Classifier"] + [METRIC_TITLES[m] for m in METRICS]
    return _markdown(header, table4_rows(results, oversampled))


def table5_rows(results, yes_mode: str = "full_dataset") -> list[tuple]:
    """``(method, metric, no, yes, gain)`` with ``no``/``yes`` the mean fold-mean score.

    Gain is computed from the unrounded means.
    """
    means = fold_means(results)
    rows = []
    methods = _order({k[0] for k in means}, METHOD_ORDER)
    for m in methods:
        for metric in ("f1", "auc"):
            no = [v[metric] for k, v in means.items() if k[0] == m and k[3] == "none"]
            yes = [v[metric] for k, v in means.items() if k[0] == m and k[3] == yes_mode]
            if not no or not yes:
                continue
            a, b = float(np.mean(no)), float(np.mean(yes))
            rows.append((m, metric, a, b, gain_percent(a, b) if a > 0 else None))
    if not rows:
        raise ValueError(f"table5 needs results for both 'none' and {yes_mode!r}")
    return rows


def render_table5(results, yes_mode: str = "full_dataset") -> str:
    rows = []
    for m, metric, no, yes, gain in table5_rows(results, yes_mode):
        rows.append([display_name(m), METRIC_TITLES[metric], percent(no), percent(yes),
                     "n/a" if gain is None else gain])
    return _markdown(["Method", "Metric", "No", "Yes", "Gain(%)"], rows)


def boxplot_rows(results) -> list[list]:
    """Long format: one row per (setting, metric) holding the fold-mean value."""
    means = fold_means(results)
    rank_m = {v: i for i, v in enumerate(_order({k[0] for k in means}, METHOD_ORDER))}
    rank_c = {v: i for i, v in enumerate(_order({k[1] for k in means}, CLASSIFIER_ORDER))}
    keys = sorted(means, key=lambda k: (k[3], rank_m[k[0]], rank_c[k[1]], k[2]))
    return [[m, c, n, o, metric, means[(m, c, n, o)][metric]]
            for (m, c, n, o) in keys for metric in METRICS]


def write_boxplot_data(results, out_dir) -> list[Path]:
    """Write ``boxplot_data.csv`` and one PNG of per-method box plots per (mode, metric)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = boxplot_rows(results)
    csv_path = out / "boxplot_data.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOXPLOT_HEADER)
        for m, c, n, o, metric, value in rows:
            writer.writerow([m, c, n, o, metric, f"{value:.6f}"])
    written = [csv_path]
    for mode in sorted({r[3] for r in rows}):
        methods = _order({r[0] for r in rows if r[3] == mode}, METHOD_ORDER)
        for metric in METRICS:
            data = [[r[5] for r in rows if r[3] == mode and r[0] == m and r[4] == metric] for m in methods]
            fig, ax = plt.subplots(figsize=(1.4 * len(methods) + 2, 4))
            ax.boxplot(data)
            ax.set_xticks(range(1, len(methods) + 1))
            ax.set_xticklabels([display_name(m) for m in methods])
            ax.set_ylabel(METRIC_TITLES[metric])
            ax.set_ylim(0.0, 1.0)
            ax.set_title(f"{METRIC_TITLES[metric]} by method (oversampling: {mode})")
            fig.tight_layout()
            png = out / f"boxplot_{mode}_{metric}.png"
            fig.savefig(png, dpi=100)
            plt.close(fig)
            written.append(png)
    return written
