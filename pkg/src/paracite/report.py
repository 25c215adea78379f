"""Report rendering: delimited files, key=value summaries and figures.

Metric values are kept in [0, 1] inside the library; this module is the
reporting boundary where they are scaled to the 0-100 range with two
decimals. Figures are rendered headlessly to PNG next to the delimited
output they illustrate.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import MetricReport

SCALE = 100.0


def metric_lines(report: MetricReport) -> list[str]:
    """key=value lines with metrics scaled to the 0-100 range."""
    return [
        f"r_precision={report.r_precision * SCALE:.2f}",
        f"r_at_5={report.r_at_5 * SCALE:.2f}",
        f"r_at_10={report.r_at_10 * SCALE:.2f}",
        f"mrr={report.mrr * SCALE:.2f}",
        f"n_queries={report.n_queries}",
        f"pool_coverage={report.pool_coverage:.4f}",
    ]


def report_payload(report: MetricReport) -> dict:
    """Machine-readable report with unscaled metric values."""
    return {
        "r_precision": report.r_precision,
        "r_at_5": report.r_at_5,
        "r_at_10": report.r_at_10,
        "mrr": report.mrr,
        "n_queries": report.n_queries,
        "pool_coverage": report.pool_coverage,
    }


def write_metric_report(report: MetricReport, path) -> None:
    Path(path).write_text(json.dumps(report_payload(report), indent=2) + "\n", encoding="utf-8")


def write_rank_by_year(mean_ranks: dict[int, float], counts: dict[int, int], out_dir) -> tuple[Path, Path]:
    """TSV of mean rank per cited-article year plus a bar figure."""
    out_dir = Path(out_dir)
    tsv_path = out_dir / "rank_by_year.tsv"
    png_path = out_dir / "rank_by_year.png"
    years = sorted(mean_ranks)
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("year\tmean_rank\tn_citations\n")
        for year in years:
            fh.write(f"{year}\t{mean_ranks[year]:.4f}\t{counts.get(year, 0)}\n")

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(years, [mean_ranks[y] for y in years], color="#4878a8")
    ax.set_xlabel("cited article publication year")
    ax.set_ylabel("mean rank")
    ax.set_title("Average rank of cited articles by publication year")
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return tsv_path, png_path


def write_year_gap_scatter(
    gaps: list[int], values: list[float], name: str, ylabel: str, out_dir
) -> Path:
    """Scatter of a per-citation quantity against the publication-year gap."""
    out_dir = Path(out_dir)
    png_path = out_dir / f"{name}.png"
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(gaps, values, s=12, alpha=0.5, color="#a84848")
    ax.set_xlabel("citing year - cited year")
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(png_path)
    plt.close(fig)
    return png_path


def write_correlations(correlations: dict[str, tuple[float, int]], out_dir) -> Path:
    """TSV of named Pearson coefficients and their sample sizes."""
    out_dir = Path(out_dir)
    tsv_path = out_dir / "correlations.tsv"
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("name\tpearson_r\tn_pairs\n")
        for name in sorted(correlations):
            r, n = correlations[name]
            fh.write(f"{name}\t{r:.6f}\t{n}\n")
    return tsv_path


def write_year_gap_table(rows: list[dict], out_dir) -> Path:
    """Per-citation TSV: query, candidate, year gap, rank, token overlap."""
    out_dir = Path(out_dir)
    tsv_path = out_dir / "year_gap.tsv"
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write("query_id\tcandidate_id\tdelta_t\trank\tjaccard\n")
        for row in rows:
            fh.write(
                f"{row['query_id']}\t{row['candidate_id']}\t{row['delta_t']}"
                f"\t{row['rank']}\t{row['jaccard']:.6f}\n"
            )
    return tsv_path
