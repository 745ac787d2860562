"""Aggregation of paper-level term scores into per-researcher term scores.

Three transformation formulas are supported: a smoothed sum/coverage form,
a variance-penalized variant that punishes uneven term usage across a
researcher's papers, and a two-round form that compares each researcher's
best papers against a gold standard distilled from the first round's top
ranks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .index import Bm25fParams, PaperTermIndex, bm25f_score
from .snapshot import load_snapshot, save_snapshot

SNAPSHOT_KIND = "person_term"

FORMULAS = ("f1", "f2", "f3")

TOP_PAPERS = 5
TOP_AUTHORS = 5


@dataclass
class AuthorTermStats:
    """Everything the transformation formulas need about one (author, term) pair."""

    bm25f_sum: float
    papers_with_term: int
    total_papers: int
    occurrences: list[int] = field(default_factory=list)
    top5_scores: list[float] = field(default_factory=list)


@dataclass
class TransformWeights:
    """Tunable exponents; w4 is unused by the first formula."""

    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 1.0

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3, self.w4) < 0:
            raise ValueError("transform weights must be non-negative")


@dataclass
class GoldStandard:
    """Pooled mean of the top authors' best per-paper scores; 0 before round one."""

    avg5_global: float = 0.0


def sigmoid(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-v))


def population_variance(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("variance of an empty occurrence list is undefined")
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values) / len(values)


def gather_stats(
    index: PaperTermIndex,
    authorship: Mapping[str, Sequence[str]],
    term: str,
    researcher: str,
    params: Bm25fParams,
) -> AuthorTermStats:
    """Aggregate the term's per-paper scores over one researcher's papers.

    Co-authored papers contribute fully to every listed author.
    """
    papers = sorted(p for p, authors in authorship.items() if researcher in authors)
    if not papers:
        raise KeyError(f"unknown researcher: {researcher!r}")
    return stats_from_papers(index, term, papers, params)


def stats_from_papers(
    index: PaperTermIndex, term: str, papers: Sequence[str], params: Bm25fParams
) -> AuthorTermStats:
    docs = index.postings.get(term, {})
    score_sum = 0.0
    occurrences = []
    scores = []
    for paper in papers:
        counts = docs.get(paper)
        if not counts:
            continue
        score = bm25f_score(paper, term, index, params)
        score_sum += score
        scores.append(score)
        occurrences.append(sum(counts.values()))
    scores.sort(reverse=True)
    return AuthorTermStats(
        bm25f_sum=score_sum,
        papers_with_term=len(occurrences),
        total_papers=len(papers),
        occurrences=occurrences,
        top5_scores=scores[:TOP_PAPERS],
    )


def _numerator(stats: AuthorTermStats, w1: float, w2: float) -> float:
    return (stats.bm25f_sum + 1.0) ** w1 * math.log(stats.papers_with_term + 1.0) ** w2


def formula1(stats: AuthorTermStats, w: TransformWeights) -> float:
    """Smoothed score: rewards total relevance and coverage, normalized by
    the researcher's overall paper count."""
    return _numerator(stats, w.w1, w.w2) / math.log(stats.total_papers + 1.0) ** w.w3


def formula2(stats: AuthorTermStats, w: TransformWeights) -> float:
    """Variance-penalized score: even occurrence spreads divide by only
    sigmoid(0) = 0.5, uneven spreads by up to 1."""
    spread = sigmoid(population_variance(stats.occurrences))
    denominator = spread**w.w3 * math.log(stats.total_papers + 1.0) ** w.w4
    return _numerator(stats, w.w1, w.w2) / denominator


def formula3(stats: AuthorTermStats, gold: GoldStandard, w: TransformWeights) -> float:
    """Gold-standard score: penalizes researchers whose best papers fall
    short of the pooled top-author average; no penalty when they match or
    exceed it."""
    avg5 = sum(stats.top5_scores) / len(stats.top5_scores) if stats.top5_scores else 0.0
    shortfall = max(gold.avg5_global - avg5, 0.0)
    penalty = (math.tanh(shortfall) + 1.0) ** w.w3
    denominator = penalty * math.log(stats.total_papers + 1.0) ** w.w4
    return _numerator(stats, w.w1, w.w2) / denominator


def compute_gold(
    round1_ranking: Sequence[tuple[str, float]],
    paper_scores: Mapping[str, Sequence[float]],
) -> GoldStandard:
    """Distill the gold standard from a first-round ranking.

    Takes the top 5 ranked researchers, each contributing their up-to-5
    best per-paper scores; the pooled mean over however many scores were
    actually collected becomes the global reference.
    """
    pooled = []
    for researcher, _score in round1_ranking[:TOP_AUTHORS]:
        scores = sorted(paper_scores.get(researcher, ()), reverse=True)
        pooled.extend(scores[:TOP_PAPERS])
    if not pooled:
        return GoldStandard(avg5_global=0.0)
    return GoldStandard(avg5_global=sum(pooled) / len(pooled))


class PersonTermIndex:
    """Inverted index: term -> {researcher -> transformed score}."""

    def __init__(self, postings: dict[str, dict[str, float]]):
        self.postings = postings

    def terms(self) -> list[str]:
        return sorted(self.postings)

    def researchers(self) -> list[str]:
        names = set()
        for docs in self.postings.values():
            names.update(docs)
        return sorted(names)

    def posting_count(self) -> int:
        return sum(len(docs) for docs in self.postings.values())

    def to_payload(self) -> dict:
        return {"postings": self.postings}

    @classmethod
    def from_payload(cls, payload: dict) -> "PersonTermIndex":
        return cls(payload["postings"])

    def save(self, path) -> None:
        save_snapshot(path, SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "PersonTermIndex":
        return cls.from_payload(load_snapshot(path, SNAPSHOT_KIND))


def papers_by_researcher(authorship: Mapping[str, Sequence[str]]) -> dict[str, list[str]]:
    papers: dict[str, list[str]] = {}
    for paper in sorted(authorship):
        for researcher in authorship[paper]:
            papers.setdefault(researcher, []).append(paper)
    return papers


def build_person_index(
    index: PaperTermIndex,
    authorship: Mapping[str, Sequence[str]],
    formula: str = "f1",
    weights: TransformWeights | None = None,
    params: Bm25fParams | None = None,
) -> PersonTermIndex:
    """Transform the paper-term index into the person-term index.

    Every (term, researcher) pair with at least one paper containing the
    term yields exactly one posting.  The third formula runs its two-round
    procedure independently per term: round one with a zero gold standard,
    then a second pass against the pooled top-author average.
    """
    if formula not in FORMULAS:
        raise ValueError(f"unknown transformation formula: {formula!r}")
    weights = weights or TransformWeights()
    params = params or Bm25fParams()
    researcher_papers = papers_by_researcher(authorship)

    postings: dict[str, dict[str, float]] = {}
    for term in sorted(index.postings):
        docs = index.postings[term]
        candidates = sorted(
            {r for paper in docs for r in authorship.get(paper, ())}
        )
        if not candidates:
            continue
        stats_by_researcher = {
            r: stats_from_papers(index, term, researcher_papers[r], params)
            for r in candidates
        }
        if formula == "f1":
            scores = {r: formula1(s, weights) for r, s in stats_by_researcher.items()}
        elif formula == "f2":
            scores = {r: formula2(s, weights) for r, s in stats_by_researcher.items()}
        else:
            scores = _two_round_scores(stats_by_researcher, weights)
        postings[term] = scores
    return PersonTermIndex(postings)


def _two_round_scores(
    stats_by_researcher: dict[str, AuthorTermStats], weights: TransformWeights
) -> dict[str, float]:
    zero_gold = GoldStandard(avg5_global=0.0)
    round1 = {r: formula3(s, zero_gold, weights) for r, s in stats_by_researcher.items()}
    ranking = sorted(round1.items(), key=lambda item: (-item[1], item[0]))
    paper_scores = {r: s.top5_scores for r, s in stats_by_researcher.items()}
    gold = compute_gold(ranking, paper_scores)
    return {r: formula3(s, gold, weights) for r, s in stats_by_researcher.items()}
