"""Shared fixtures: a 10-paper corpus, term dictionary, knowledge base,
and a fully assembled search engine."""

from __future__ import annotations

import pytest

from expertsearch.corpus import PublicationRecord, authorship_map
from expertsearch.index import build_index
from expertsearch.knowledge import FieldOfStudy, KnowledgeBase, SearchEngine
from expertsearch.lexicon import build_dictionary, load_stop_words

WIKI_TERMS = {"text analytics", "routing protocols", "parallel corpora"}

KB_NAMES = {
    "natural language processing",
    "machine translation",
    "data mining",
    "computer network",
    "programming languages",
    "compilers",
    "programming paradigm",
    "human-computer interactions",
    "machine learning",
    "neural networks",
    "computer science",
}

FOS_IDS = {name: i + 1 for i, name in enumerate(sorted(KB_NAMES))}


def _record(paper_id, title, abstract, keywords, authors, journal="", conference=""):
    return PublicationRecord(
        paper_id=paper_id,
        title=title,
        abstract=abstract,
        keywords=keywords,
        journal_name=journal,
        conference_name=conference,
        authors=tuple(authors),
    )


def make_records() -> list[PublicationRecord]:
    return [
        _record(
            "p1",
            "Neural machine translation",
            "We study machine translation with neural networks. "
            "Machine translation quality improves with data.",
            "machine translation; neural networks",
            ["r1", "r2"],
            journal="computational linguistics journal",
        ),
        _record(
            "p2",
            "Statistical machine translation",
            "A survey of statistical machine translation systems and "
            "data mining over parallel corpora.",
            "machine translation; data mining",
            ["r1"],
            conference="machine translation summit",
        ),
        _record(
            "p3",
            "Natural language processing pipelines",
            "Natural language processing tasks benefit from shared pipelines. "
            "We evaluate tokenization quality in natural language processing.",
            "natural language processing",
            ["r2", "r3"],
            journal="language engineering journal",
        ),
        _record(
            "p4",
            "Data mining in large databases",
            "Efficient data mining algorithms for large transactional databases.",
            "data mining; databases",
            ["r3"],
            conference="data mining conference",
        ),
        _record(
            "p5",
            "Computer network routing",
            "Routing protocols for computer network infrastructure. "
            "Network latency shapes computer network design.",
            "computer network; routing protocols",
            ["r4"],
            journal="networking journal",
        ),
        _record(
            "p6",
            "Compilers for programming languages",
            "Modern compilers optimize programming languages aggressively.",
            "compilers; programming languages",
            ["r5"],
            conference="programming languages conference",
        ),
        _record(
            "p7",
            "Programming paradigm shifts",
            "Functional and imperative programming paradigm comparison across languages.",
            "programming paradigm",
            ["r5"],
            journal="programming journal",
        ),
        _record(
            "p8",
            "Human-computer interactions on mobile devices",
            "Designing human-computer interactions for mobile applications and user studies.",
            "human-computer interactions",
            ["r6"],
            conference="interaction design conference",
        ),
        _record(
            "p9",
            "Mining text with natural language processing",
            "We combine data mining and natural language processing for text analytics.",
            "data mining; natural language processing",
            ["r3", "r2"],
            journal="knowledge discovery journal",
        ),
        _record(
            "p10",
            "Network anomaly detection with machine learning",
            "Machine learning detects anomalies in computer network traffic.",
            "machine learning; computer network",
            ["r4", "r6"],
            conference="security conference",
        ),
    ]


# Filled by the acceptance tests; printed at the end of every run.
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(("PASS: " if ok else "FAIL: ") + name)


@pytest.fixture(scope="session")
def stop_words():
    return load_stop_words()


@pytest.fixture(scope="session")
def records():
    return make_records()


@pytest.fixture(scope="session")
def dictionary():
    frequencies = {name: 0 for name in KB_NAMES}
    return build_dictionary(WIKI_TERMS, KB_NAMES, frequencies)


@pytest.fixture(scope="session")
def paper_index(records, dictionary, stop_words):
    return build_index(records, dictionary, stop_words)


@pytest.fixture(scope="session")
def authorship(records):
    return authorship_map(records)


def make_kb(records) -> KnowledgeBase:
    """Knowledge base mirroring the fixture corpus: each paper tagged with
    the fields named in its keywords."""
    fos = {i: FieldOfStudy(i, name) for name, i in FOS_IDS.items()}
    cs = FOS_IDS["computer science"]
    children = {
        cs: sorted(
            FOS_IDS[n]
            for n in ("computer network", "programming languages", "machine learning")
        ),
        FOS_IDS["programming languages"]: [FOS_IDS["compilers"]],
    }
    related = [(FOS_IDS["machine translation"], FOS_IDS["natural language processing"])]
    paper_fos = {}
    for record in records:
        tags = []
        for raw in record.keywords.split(";"):
            name = raw.strip().lower()
            if name in FOS_IDS:
                tags.append((FOS_IDS[name], 0.9))
        if tags:
            paper_fos[record.paper_id] = tags
    paper_authors = {r.paper_id: list(r.authors) for r in records}
    return KnowledgeBase(fos, children, related, paper_fos, paper_authors)


@pytest.fixture(scope="session")
def kb(records):
    return make_kb(records)


@pytest.fixture(scope="session")
def engine(dictionary, stop_words, paper_index, kb, authorship):
    return SearchEngine(
        dictionary=dictionary,
        stop_words=stop_words,
        index=paper_index,
        kb=kb,
        authorship=dict(authorship),
    )
