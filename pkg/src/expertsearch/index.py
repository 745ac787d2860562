"""Fielded inverted index over extracted terms with BM25F scoring.

Per-term relevance of a publication follows the three-step fielded form:
field counts are length-normalized, blended with field weights, then
saturated and multiplied by the term's inverse document frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import CorpusError, PublicationRecord, preprocess_text
from .lexicon import TermDictionary, extract_terms, load_stop_words
from .snapshot import load_snapshot, save_snapshot

# Closed field set; journal and conference names merge into one venue field
# since a publication carries at most one of the two.
FIELDS = ("title", "abstract", "keywords", "venue")

SNAPSHOT_KIND = "paper_term"


def default_field_weights() -> dict[str, float]:
    return {"title": 1.2, "abstract": 1.0, "keywords": 1.2, "venue": 1.2}


def default_field_norms() -> dict[str, float]:
    return {name: 0.75 for name in FIELDS}


@dataclass
class Bm25fParams:
    """Scoring knobs: field weights, per-field length normalization, saturation."""

    field_weights: dict[str, float] = field(default_factory=default_field_weights)
    field_norms: dict[str, float] = field(default_factory=default_field_norms)
    k1: float = 1.2

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        for name, weight in self.field_weights.items():
            if weight < 0:
                raise ValueError(f"negative field weight for {name}")
        for name, b in self.field_norms.items():
            if not 0.0 <= b <= 1.0:
                raise ValueError(f"field norm for {name} outside [0, 1]")


@dataclass
class FieldStats:
    """Corpus-level statistics backing the scoring formulas."""

    avg_len: dict[str, float]
    doc_count: int
    doc_freq: dict[str, int]


class PaperTermIndex:
    """Inverted index: term -> {paper -> per-field raw counts}, plus stats."""

    def __init__(
        self,
        postings: dict[str, dict[str, dict[str, int]]],
        field_lengths: dict[str, dict[str, int]],
        stats: FieldStats,
    ):
        self.postings = postings
        self.field_lengths = field_lengths
        self.stats = stats

    def papers(self) -> list[str]:
        return sorted(self.field_lengths)

    def terms(self) -> list[str]:
        return sorted(self.postings)

    def has_paper(self, paper_id: str) -> bool:
        return paper_id in self.field_lengths

    def term_occurrences(self) -> dict[str, int]:
        """Total raw occurrences of each term across all papers and fields."""
        totals = {}
        for term, docs in self.postings.items():
            totals[term] = sum(sum(counts.values()) for counts in docs.values())
        return totals

    def to_payload(self) -> dict:
        return {
            "stats": {
                "avg_len": self.stats.avg_len,
                "doc_count": self.stats.doc_count,
                "doc_freq": self.stats.doc_freq,
            },
            "field_lengths": self.field_lengths,
            "postings": self.postings,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "PaperTermIndex":
        stats = FieldStats(
            avg_len=payload["stats"]["avg_len"],
            doc_count=payload["stats"]["doc_count"],
            doc_freq=payload["stats"]["doc_freq"],
        )
        return cls(payload["postings"], payload["field_lengths"], stats)

    def save(self, path) -> None:
        save_snapshot(path, SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "PaperTermIndex":
        return cls.from_payload(load_snapshot(path, SNAPSHOT_KIND))


def record_field_texts(record: PublicationRecord) -> dict[str, list[str]]:
    """Raw text chunks per field; venue chunks stay separate so extraction
    never matches a phrase across the journal/conference boundary."""
    return {
        "title": [record.title],
        "abstract": [record.abstract],
        "keywords": [record.keywords],
        "venue": [record.journal_name, record.conference_name],
    }


def extract_field_terms(
    record: PublicationRecord, dictionary: TermDictionary, stop_words: set[str]
) -> dict[str, list[str]]:
    """Preprocess and term-extract every field of one record."""
    field_terms = {}
    for name, chunks in record_field_texts(record).items():
        terms = []
        for chunk in chunks:
            for sentence in preprocess_text(chunk):
                terms.extend(t.surface for t in extract_terms(sentence, dictionary, stop_words))
        field_terms[name] = terms
    return field_terms


def build_index(
    records: list[PublicationRecord],
    dictionary: TermDictionary,
    stop_words: set[str] | None = None,
) -> PaperTermIndex:
    """Build the paper-term inverted index from scratch.

    Field lengths are measured in extracted terms, not raw tokens, keeping
    lengths and counts in the same unit.
    """
    if not records:
        raise CorpusError("cannot index an empty corpus")
    if stop_words is None:
        stop_words = load_stop_words()

    postings: dict[str, dict[str, dict[str, int]]] = {}
    field_lengths: dict[str, dict[str, int]] = {}
    for record in records:
        lengths = {}
        for name, terms in extract_field_terms(record, dictionary, stop_words).items():
            lengths[name] = len(terms)
            for term in terms:
                counts = postings.setdefault(term, {}).setdefault(record.paper_id, {})
                counts[name] = counts.get(name, 0) + 1
        field_lengths[record.paper_id] = lengths

    doc_count = len(field_lengths)
    avg_len = {
        name: sum(lengths[name] for lengths in field_lengths.values()) / doc_count
        for name in FIELDS
    }
    doc_freq = {term: len(docs) for term, docs in postings.items()}
    stats = FieldStats(avg_len=avg_len, doc_count=doc_count, doc_freq=doc_freq)
    return PaperTermIndex(postings, field_lengths, stats)


def idf(term: str, stats: FieldStats) -> float:
    """Smoothed inverse document frequency; strictly positive for any df."""
    df = stats.doc_freq.get(term, 0)
    return math.log(1.0 + (stats.doc_count - df + 0.5) / (df + 0.5))


def bm25f_score(
    paper_id: str, term: str, index: PaperTermIndex, params: Bm25fParams
) -> float:
    """BM25F contribution of one term to one paper's relevance.

    Zero when the paper carries no occurrence of the term; raises KeyError
    for a paper the index has never seen.
    """
    if paper_id not in index.field_lengths:
        raise KeyError(f"unknown paper: {paper_id!r}")
    counts = index.postings.get(term, {}).get(paper_id)
    if not counts:
        return 0.0
    blended = weighted_normalized_count(paper_id, counts, index, params)
    return blended / (params.k1 + blended) * idf(term, index.stats)


def weighted_normalized_count(
    paper_id: str,
    counts: dict[str, int],
    index: PaperTermIndex,
    params: Bm25fParams,
) -> float:
    """Length-normalize each field count, then blend with field weights."""
    lengths = index.field_lengths[paper_id]
    blended = 0.0
    for name, raw_count in counts.items():
        avg = index.stats.avg_len.get(name, 0.0)
        if avg <= 0.0:
            continue
        b = params.field_norms.get(name, 0.0)
        normalizer = 1.0 + b * (lengths.get(name, 0) / avg - 1.0)
        blended += params.field_weights.get(name, 0.0) * raw_count / normalizer
    return blended
