"""Ranking comparison report: hybrid vs LSA vs NMF over a query fixture.

Produces a tab-delimited overlap table plus rendered figures (per-query
overlap bars and the NMF objective curve) in one output directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .knowledge import SearchEngine, extract_query_terms, search
from .latent import (
    EmptyQueryError,
    NmfModel,
    lsa_decompose,
    nmf_decompose,
    person_term_matrix,
    project_query,
    rank_by_cosine,
)
from .person import PersonTermIndex

APPROACHES = ("hybrid", "lsa", "nmf")
PAIRS = (("hybrid", "lsa"), ("hybrid", "nmf"), ("lsa", "nmf"))


@dataclass
class QueryComparison:
    query: str
    rankings: dict[str, list[str]]  # approach -> researcher ids, best first

    def overlap(self, a: str, b: str, k: int) -> float:
        return top_k_overlap(self.rankings[a], self.rankings[b], k)


def top_k_overlap(a: list[str], b: list[str], k: int) -> float:
    """Fraction of shared ids among the top min(k, |a|, |b|) of each list."""
    depth = min(k, len(a), len(b))
    if depth <= 0:
        return 0.0
    return len(set(a[:depth]) & set(b[:depth])) / depth


def compare_rankings(
    queries: list[str],
    engine: SearchEngine,
    person_index: PersonTermIndex,
    k: int = 10,
    latent_k: int | None = None,
    seed: int = 0,
) -> tuple[list[QueryComparison], NmfModel]:
    """Rank each query three ways on the same person-term data."""
    matrix = person_term_matrix(person_index)
    cap = min(matrix.values.shape)
    latent_k = min(8, cap) if latent_k is None else latent_k
    lsa = lsa_decompose(matrix, latent_k, seed=seed)
    nmf = nmf_decompose(matrix, latent_k, seed=seed)

    comparisons = []
    for query in queries:
        terms = extract_query_terms(engine, query)
        rankings = {"hybrid": [r for r, _ in search(query, k, engine).results]}
        for name, model in (("lsa", lsa), ("nmf", nmf)):
            try:
                ranked = rank_by_cosine(project_query(terms, model), model)
            except (EmptyQueryError, ValueError):
                ranked = []
            rankings[name] = [r for r, _ in ranked[:k]]
        comparisons.append(QueryComparison(query=query, rankings=rankings))
    return comparisons, nmf


def write_overlap_table(comparisons: list[QueryComparison], k: int, path: Path) -> None:
    """Tab-delimited table: one row per query, one column per approach pair."""
    header = ["query"] + [f"{a}_vs_{b}" for a, b in PAIRS]
    lines = ["\t".join(header)]
    for comp in comparisons:
        row = [comp.query] + [f"{comp.overlap(a, b, k):.4f}" for a, b in PAIRS]
        lines.append("\t".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def plot_overlaps(comparisons: list[QueryComparison], k: int, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(comparisons)), 4.0))
    positions = range(len(comparisons))
    width = 0.25
    for offset, (a, b) in enumerate(PAIRS):
        values = [comp.overlap(a, b, k) for comp in comparisons]
        ax.bar([p + offset * width for p in positions], values, width, label=f"{a} vs {b}")
    ax.set_xticks([p + width for p in positions])
    ax.set_xticklabels([comp.query for comp in comparisons], rotation=20, ha="right")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel(f"top-{k} overlap")
    ax.set_title("Ranking agreement between approaches")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_nmf_objective(nmf: NmfModel, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(nmf.objective)), nmf.objective, marker="o", markersize=3)
    ax.set_xlabel("iteration")
    ax.set_ylabel("squared Frobenius error")
    ax.set_title("NMF objective")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def run_eval(
    queries: list[str],
    engine: SearchEngine,
    person_index: PersonTermIndex,
    out_dir: str | Path,
    k: int = 10,
    latent_k: int | None = None,
    seed: int = 0,
) -> dict[str, Path]:
    """Full report: overlap table TSV plus the two figures, in out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comparisons, nmf = compare_rankings(
        queries, engine, person_index, k=k, latent_k=latent_k, seed=seed
    )
    paths = {
        "table": out / "overlap.tsv",
        "overlap_figure": out / "overlap.png",
        "objective_figure": out / "nmf_objective.png",
    }
    write_overlap_table(comparisons, k, paths["table"])
    plot_overlaps(comparisons, k, paths["overlap_figure"])
    plot_nmf_objective(nmf, paths["objective_figure"])
    return paths
