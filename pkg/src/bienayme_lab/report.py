"""CSV emission and the figures rendered next to it.

Every table leaves the package as versioned CSV (header comment line
``# bienayme-lab v1``), sorted on its natural key so identical runs give
byte-identical files.  When a figure directory is set, each report also
renders matplotlib summaries (PNG) of the same rows.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_LINE = "# bienayme-lab v1"

STATS_COLUMNS = ["experiment", "n", "replicate", "seed", "height", "width",
                 "max_degree", "spine_depth", "a_n", "b_n", "h_n",
                 "ratio_height", "ratio_width", "sampler", "tries"]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return f"{x:.12g}"
    return str(x)


@dataclass
class StatsRow:
    experiment: str
    n: int
    replicate: int
    seed: int
    height: int
    width: int
    max_degree: int
    spine_depth: int
    a_n: int
    b_n: float
    h_n: float
    ratio_height: float
    ratio_width: float
    sampler: str
    tries: int

    def values(self) -> list:
        return [getattr(self, c) for c in STATS_COLUMNS]


@dataclass
class CsvReport:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, row: list) -> None:
        self.rows.append(row)

    def lines(self) -> list[str]:
        out = [SCHEMA_LINE, ",".join(self.header)]
        out.extend(",".join(fmt(v) for v in row) for row in self.rows)
        return out

    def write(self, path: str) -> None:
        text = "\n".join(self.lines()) + "\n"
        if path == "-":
            print(text, end="")
            return
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


def stats_report(rows: list[StatsRow]) -> CsvReport:
    rows = sorted(rows, key=lambda r: (r.experiment, r.n, r.replicate))
    rep = CsvReport(list(STATS_COLUMNS))
    for r in rows:
        rep.add(r.values())
    return rep


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def _save(fig, figdir: str, name: str) -> str:
    os.makedirs(figdir, exist_ok=True)
    path = os.path.join(figdir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_simulate_figures(rows: list[StatsRow], figdir: str) -> list[str]:
    """Median ratio trends and the ratio scatter for the largest size."""
    if not rows:
        return []
    ns = sorted({r.n for r in rows})
    med_h, med_w = [], []
    for n in ns:
        sub = [r for r in rows if r.n == n]
        med_h.append(float(np.median([r.ratio_height for r in sub])))
        med_w.append(float(np.median([r.ratio_width for r in sub])))
    paths = []
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(ns, med_h, "o-", label="median height / h_n")
    ax.plot(ns, med_w, "s-", label="median width / b_n")
    ax.axhline(1.0, color="0.6", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("ratio")
    ax.legend()
    ax.set_title("scaling ratios")
    paths.append(_save(fig, figdir, "simulate_ratios.png"))

    n_top = ns[-1]
    sub = [r for r in rows if r.n == n_top]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.scatter([r.ratio_width for r in sub], [r.ratio_height for r in sub],
               s=8, alpha=0.5)
    ax.axvline(1.0, color="0.6", lw=0.8, ls="--")
    ax.axhline(1.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("width / b_n")
    ax.set_ylabel("height / h_n")
    ax.set_title(f"replicates at n = {n_top}")
    paths.append(_save(fig, figdir, "simulate_scatter.png"))
    return paths


def render_scaling_figures(table, figdir: str) -> list[str]:
    """log-log curves of a_n, b_n and the height scale h_n."""
    rows = [r for r in table.rows]
    if not rows:
        return []
    ns = np.array([r.n for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.loglog(ns, [max(r.a, 1) for r in rows], "o-", label="a_n")
    ax.loglog(ns, [max(r.b, 1e-12) for r in rows], "s-", label="b_n")
    ax.set_xlabel("n")
    ax.legend()
    ax.set_title(f"scaling sequences ({table.dist_kind})")
    p1 = _save(fig, figdir, "scaling_ab.png")

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    hs = [r.h if r.h_defined else np.nan for r in rows]
    ax.semilogx(ns, hs, "o-", label="h_n")
    ax.semilogx(ns, np.log(ns), "--", color="0.6", label="ln n")
    ax.set_xlabel("n")
    ax.legend()
    ax.set_title("height scale")
    p2 = _save(fig, figdir, "scaling_h.png")
    return [p1, p2]


def render_construct_figure(metadata: dict, figdir: str) -> list[str]:
    levels = [l for l in metadata["levels"] if not l["closing"]]
    ks = [l["k"] for l in levels]
    ns = [l["n"] for l in levels]
    deltas = [float(eval_fraction(l["delta"])) for l in levels]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.semilogy(ks, [max(n, 1) for n in ns], "o-", label="atom n_k")
    ax.semilogy(ks, deltas, "s--", label="mean defect")
    ax.set_xlabel("level k")
    ax.legend()
    ax.set_title("short-fat ladder")
    return [_save(fig, figdir, "construct_ladder.png")]


def eval_fraction(text: str) -> float:
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)
