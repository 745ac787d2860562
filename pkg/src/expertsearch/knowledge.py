"""Knowledge-base tables, per-author field-of-study profiles, and the
hybrid query scorer that blends keyword matching with KB confidence.

The blend is scale-free: both components are min-max normalized over the
query's candidate set before the weighted sum, since raw matching sums are
unbounded while confidence sums are not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import preprocess_text
from .index import Bm25fParams, PaperTermIndex, bm25f_score
from .lexicon import TermDictionary, extract_terms
from .snapshot import load_snapshot, save_snapshot

SNAPSHOT_KIND = "knowledge_base"

KB_TABLES = ("fields_of_study", "fos_children", "related_fos", "paper_fos", "paper_authors")


class KbValidationError(ValueError):
    """Structural or referential problem in the knowledge-base tables."""


@dataclass(frozen=True)
class FieldOfStudy:
    fos_id: int
    display_name: str


@dataclass
class AuthorFosProfile:
    """Per-field-of-study confidence sums over one researcher's papers."""

    scores: dict[int, float]


class KnowledgeBase:
    def __init__(
        self,
        fos: dict[int, FieldOfStudy],
        children: dict[int, list[int]],
        related: list[tuple[int, int]],
        paper_fos: dict[str, list[tuple[int, float]]],
        paper_authors: dict[str, list[str]],
    ):
        self.fos = fos
        self.children = children
        self.related = related
        self.paper_fos = paper_fos
        self.paper_authors = paper_authors
        self._name_to_id = {f.display_name.lower(): f.fos_id for f in fos.values()}

    def resolve_name(self, name: str) -> int | None:
        return self._name_to_id.get(name.lower())

    def to_payload(self) -> dict:
        return {
            "fos": {str(i): f.display_name for i, f in self.fos.items()},
            "children": {str(i): sorted(kids) for i, kids in self.children.items()},
            "related": sorted(map(list, self.related)),
            "paper_fos": {
                p: sorted([i, s] for i, s in tags) for p, tags in self.paper_fos.items()
            },
            "paper_authors": {p: list(a) for p, a in self.paper_authors.items()},
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "KnowledgeBase":
        return cls(
            fos={int(i): FieldOfStudy(int(i), name) for i, name in payload["fos"].items()},
            children={int(i): [int(c) for c in kids] for i, kids in payload["children"].items()},
            related=[(int(a), int(b)) for a, b in payload["related"]],
            paper_fos={
                p: [(int(i), float(s)) for i, s in tags]
                for p, tags in payload["paper_fos"].items()
            },
            paper_authors={p: list(a) for p, a in payload["paper_authors"].items()},
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, KnowledgeBase) and self.to_payload() == other.to_payload()

    def save(self, path) -> None:
        save_snapshot(path, SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "KnowledgeBase":
        return cls.from_payload(load_snapshot(path, SNAPSHOT_KIND))


def _read_tsv(path: Path) -> list[tuple[int, list[str]]]:
    rows = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if line.strip():
                rows.append((line_no, line.split("\t")))
    return rows


def load_kb(paths: Mapping[str, str | Path]) -> KnowledgeBase:
    """Load and validate the knowledge-base TSV tables.

    Only fields_of_study is mandatory.  Dangling foreign keys, confidence
    scores outside (0, 1], and cycles among child edges all abort the load
    with the offending row numbers.
    """
    unknown = set(paths) - set(KB_TABLES)
    if unknown:
        raise ValueError(f"unknown kb tables: {sorted(unknown)}")
    if "fields_of_study" not in paths:
        raise ValueError("fields_of_study table is required")

    problems: list[str] = []
    fos: dict[int, FieldOfStudy] = {}
    for line_no, parts in _read_tsv(Path(paths["fields_of_study"])):
        if len(parts) < 2 or not parts[1].strip():
            problems.append(f"fields_of_study row {line_no}: need id and display name")
            continue
        try:
            fos_id = int(parts[0])
        except ValueError:
            problems.append(f"fields_of_study row {line_no}: bad id {parts[0]!r}")
            continue
        if fos_id in fos:
            problems.append(f"fields_of_study row {line_no}: duplicate id {fos_id}")
            continue
        fos[fos_id] = FieldOfStudy(fos_id, parts[1].strip())

    children: dict[int, list[int]] = {}
    if "fos_children" in paths:
        for line_no, parts in _read_tsv(Path(paths["fos_children"])):
            ref = _parse_id_pair(parts, "fos_children", line_no, problems)
            if ref is None:
                continue
            parent, child = ref
            for node in (parent, child):
                if node not in fos:
                    problems.append(f"fos_children row {line_no}: dangling fos id {node}")
                    break
            else:
                children.setdefault(parent, []).append(child)

    related: list[tuple[int, int]] = []
    if "related_fos" in paths:
        for line_no, parts in _read_tsv(Path(paths["related_fos"])):
            ref = _parse_id_pair(parts, "related_fos", line_no, problems)
            if ref is None:
                continue
            for node in ref:
                if node not in fos:
                    problems.append(f"related_fos row {line_no}: dangling fos id {node}")
                    break
            else:
                related.append(ref)

    paper_fos: dict[str, list[tuple[int, float]]] = {}
    if "paper_fos" in paths:
        for line_no, parts in _read_tsv(Path(paths["paper_fos"])):
            if len(parts) < 3:
                problems.append(f"paper_fos row {line_no}: need paper, fos id, score")
                continue
            paper = parts[0].strip()
            try:
                fos_id = int(parts[1])
                score = float(parts[2])
            except ValueError:
                problems.append(f"paper_fos row {line_no}: bad id or score")
                continue
            if fos_id not in fos:
                problems.append(f"paper_fos row {line_no}: dangling fos id {fos_id}")
                continue
            if not 0.0 < score <= 1.0:
                problems.append(f"paper_fos row {line_no}: score {score} outside (0, 1]")
                continue
            paper_fos.setdefault(paper, []).append((fos_id, score))

    paper_authors: dict[str, list[str]] = {}
    if "paper_authors" in paths:
        for line_no, parts in _read_tsv(Path(paths["paper_authors"])):
            if len(parts) < 2 or not parts[0].strip() or not parts[1].strip():
                problems.append(f"paper_authors row {line_no}: need paper and author ids")
                continue
            paper_authors.setdefault(parts[0].strip(), []).append(parts[1].strip())

    cycle = _find_cycle(children)
    if cycle:
        problems.append("fos_children: cycle through fos ids " + " -> ".join(map(str, cycle)))
    if problems:
        raise KbValidationError("; ".join(problems))
    return KnowledgeBase(fos, children, related, paper_fos, paper_authors)


def _parse_id_pair(parts, table, line_no, problems) -> tuple[int, int] | None:
    if len(parts) < 2:
        problems.append(f"{table} row {line_no}: need two fos ids")
        return None
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        problems.append(f"{table} row {line_no}: bad fos id")
        return None


def _find_cycle(children: Mapping[int, Sequence[int]]) -> list[int] | None:
    """Return one cycle among child edges, or None when they form a DAG."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in children}
    for kids in children.values():
        for kid in kids:
            color.setdefault(kid, WHITE)

    def visit(node, trail):
        color[node] = GRAY
        trail.append(node)
        for kid in children.get(node, ()):
            if color[kid] == GRAY:
                return trail[trail.index(kid) :] + [kid]
            if color[kid] == WHITE:
                found = visit(kid, trail)
                if found:
                    return found
        trail.pop()
        color[node] = BLACK
        return None

    for node in sorted(color):
        if color[node] == WHITE:
            found = visit(node, [])
            if found:
                return found
    return None


def author_profile(kb: KnowledgeBase, researcher: str) -> AuthorFosProfile:
    """Sum field-of-study confidences over every paper the researcher wrote."""
    papers = [p for p, authors in kb.paper_authors.items() if researcher in authors]
    if not papers:
        raise KeyError(f"unknown researcher: {researcher!r}")
    scores: dict[int, float] = {}
    for paper in papers:
        for fos_id, confidence in kb.paper_fos.get(paper, ()):
            scores[fos_id] = scores.get(fos_id, 0.0) + confidence
    return AuthorFosProfile(scores=scores)


@dataclass
class SearchEngine:
    """Everything a query needs: dictionary, index, kb, authorship, knobs."""

    dictionary: TermDictionary
    stop_words: set[str]
    index: PaperTermIndex
    kb: KnowledgeBase
    authorship: dict[str, list[str]]
    params: Bm25fParams = field(default_factory=Bm25fParams)
    alpha: float = 0.5


@dataclass
class SearchResponse:
    status: str  # "ok" or "no_terms"
    results: list[tuple[str, float]]


def extract_query_terms(engine: SearchEngine, text: str) -> list[str]:
    terms = []
    for sentence in preprocess_text(text):
        terms.extend(
            t.surface for t in extract_terms(sentence, engine.dictionary, engine.stop_words)
        )
    return terms


def hybrid_scores(
    query_terms: Sequence[str], engine: SearchEngine, alpha: float | None = None
) -> dict[str, float]:
    """Blended score for every candidate researcher of this query.

    Candidates are researchers touched by at least one query term in either
    component; each component is min-max normalized over them before the
    alpha blend.
    """
    alpha = engine.alpha if alpha is None else alpha
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")

    matching = _matching_component(query_terms, engine)
    kb_component = _kb_component(query_terms, engine)
    candidates = set(matching) | set(kb_component)
    if not candidates:
        return {}
    m_hat = _min_max({r: matching.get(r, 0.0) for r in candidates})
    k_hat = _min_max({r: kb_component.get(r, 0.0) for r in candidates})
    return {r: alpha * m_hat[r] + (1.0 - alpha) * k_hat[r] for r in sorted(candidates)}


def _matching_component(query_terms: Sequence[str], engine: SearchEngine) -> dict[str, float]:
    sums: dict[str, float] = {}
    for term in dict.fromkeys(query_terms):
        for paper in engine.index.postings.get(term, {}):
            score = bm25f_score(paper, term, engine.index, engine.params)
            for researcher in engine.authorship.get(paper, ()):
                sums[researcher] = sums.get(researcher, 0.0) + score
    return sums


def _kb_component(query_terms: Sequence[str], engine: SearchEngine) -> dict[str, float]:
    fos_ids = []
    for term in dict.fromkeys(query_terms):
        fos_id = engine.kb.resolve_name(term)
        if fos_id is not None:
            fos_ids.append(fos_id)
    if not fos_ids:
        return {}
    sums: dict[str, float] = {}
    for paper, tags in engine.kb.paper_fos.items():
        tag_map = dict(tags)
        contribution = sum(tag_map[f] for f in fos_ids if f in tag_map)
        if contribution > 0.0:
            for researcher in engine.kb.paper_authors.get(paper, ()):
                sums[researcher] = sums.get(researcher, 0.0) + contribution
    return sums


def _min_max(values: dict[str, float]) -> dict[str, float]:
    low = min(values.values())
    high = max(values.values())
    if high > low:
        return {r: (v - low) / (high - low) for r, v in values.items()}
    return {r: 0.0 for r in values}


def hybrid_score(
    query_terms: Sequence[str],
    researcher: str,
    engine: SearchEngine,
    alpha: float | None = None,
) -> float:
    """Blended score of one researcher relative to the query's candidate set."""
    return hybrid_scores(query_terms, engine, alpha).get(researcher, 0.0)


def search(query: str, k: int, engine: SearchEngine) -> SearchResponse:
    """Hybrid search: extract query terms, score candidates, return top k.

    A query whose extracted terms are all unknown to both the index and the
    knowledge base comes back with the distinguishable "no_terms" status.
    """
    terms = extract_query_terms(engine, query)
    known = [
        t
        for t in terms
        if t in engine.index.postings or engine.kb.resolve_name(t) is not None
    ]
    if not known:
        return SearchResponse(status="no_terms", results=[])
    scores = hybrid_scores(terms, engine)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return SearchResponse(status="ok", results=ranked[: max(k, 0)])
