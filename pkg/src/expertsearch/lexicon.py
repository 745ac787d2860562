"""Recognized-term dictionary and sliding-window term extraction.

The dictionary unions knowledge-base field-of-study names with cleansed
wiki-style titles; extraction scans token streams greedily with a context
window of up to three tokens, falling back to lemmatized single tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CleanSentence
from .snapshot import load_snapshot, save_snapshot

MAX_TERM_TOKENS = 3
SNAPSHOT_KIND = "term_dictionary"

_NAMESPACE_RE = re.compile(r"^\s*\w+\s*:")
_TRAILING_PAREN_RE = re.compile(r"\s*\([^)]*\)\s*$")

_VOWELS = "aeiouy"


@dataclass(frozen=True)
class TermEntry:
    source: str  # "kb", "wiki", or "both"
    frequency: int = 0


@dataclass(frozen=True)
class ExtractedTerm:
    """A term emitted by extraction; single_token marks the lemmatized fallback."""

    surface: str
    single_token: bool = False


class TermDictionary:
    """Immutable term set with source tags and kb-only corpus frequencies."""

    def __init__(self, entries: Mapping[str, TermEntry]):
        self.entries = dict(entries)

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def source(self, term: str) -> str:
        return self.entries[term].source

    def frequency(self, term: str) -> int:
        entry = self.entries.get(term)
        return entry.frequency if entry else 0

    def kb_terms(self) -> set[str]:
        return {t for t, e in self.entries.items() if e.source in ("kb", "both")}

    def to_payload(self) -> dict:
        return {
            "terms": {t: [e.source, e.frequency] for t, e in sorted(self.entries.items())}
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TermDictionary":
        return cls(
            {t: TermEntry(source=s, frequency=int(f)) for t, (s, f) in payload["terms"].items()}
        )

    def save(self, path) -> None:
        save_snapshot(path, SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "TermDictionary":
        return cls.from_payload(load_snapshot(path, SNAPSHOT_KIND))


def clean_wiki_terms(raw_terms: Iterable[str]) -> set[str]:
    """Cleanse wiki-style titles into candidate dictionary terms.

    Namespace-prefixed titles ("File: ...", "User:...") are dropped, a
    trailing parenthesized annotation is stripped, anything longer than
    three tokens is dropped, and survivors are lowercased.
    """
    cleaned = set()
    for raw in raw_terms:
        title = raw.strip()
        if not title or _NAMESPACE_RE.match(title):
            continue
        title = _TRAILING_PAREN_RE.sub("", title).strip()
        if not title or len(title.split()) > MAX_TERM_TOKENS:
            continue
        cleaned.add(title.lower())
    return cleaned


def build_dictionary(
    wiki_terms: Iterable[str],
    kb_terms: Iterable[str],
    kb_frequencies: Mapping[str, int] | None = None,
) -> TermDictionary:
    """Union the two cleaned term sources into one dictionary.

    A term present in both sources is tagged "both".  Corpus frequencies
    attach only to kb-sourced terms; everything else stays at zero.
    """
    kb_frequencies = kb_frequencies or {}
    wiki = set(wiki_terms)
    kb = set(kb_terms)
    for term in wiki | kb:
        if term != term.lower():
            raise ValueError(f"dictionary term not lowercased: {term!r}")
        if len(term.split()) > MAX_TERM_TOKENS:
            raise ValueError(f"dictionary term longer than {MAX_TERM_TOKENS} tokens: {term!r}")
    entries = {}
    for term in wiki | kb:
        if term in kb:
            source = "both" if term in wiki else "kb"
            frequency = int(kb_frequencies.get(term, 0))
        else:
            source = "wiki"
            frequency = 0
        entries[term] = TermEntry(source=source, frequency=frequency)
    return TermDictionary(entries)


def extract_terms(
    sentence: CleanSentence,
    dictionary: TermDictionary,
    stop_words: set[str],
) -> list[ExtractedTerm]:
    """Greedy longest-match scan of one sentence against the dictionary.

    The window opens at three tokens (clamped at the sentence end) and
    shrinks on a miss.  A single unrecognized token is skipped when it is
    a stop word, otherwise lemmatized and emitted as a fallback term.
    Kb-sourced entries take lookup priority at equal span, which for a
    unioned dictionary only affects source attribution, never the match.
    """
    tokens = sentence.tokens
    extracted = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = False
        for width in range(min(MAX_TERM_TOKENS, n - i), 0, -1):
            span = " ".join(tokens[i : i + width])
            if span in dictionary:
                extracted.append(ExtractedTerm(surface=span, single_token=False))
                i += width
                matched = True
                break
        if not matched:
            token = tokens[i]
            if token not in stop_words:
                extracted.append(ExtractedTerm(surface=lemmatize(token), single_token=True))
            i += 1
    return extracted


def lemmatize(token: str) -> str:
    """Rule-based suffix stripping for plural, -ing, and -ed inflections."""
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith("ss"):
        return token
    if token.endswith(("ches", "shes")):
        return token[:-2]
    if token.endswith("es") and len(token) > 4 and token[-3] in "xz":
        return token[:-2]
    if token.endswith("s") and len(token) > 3 and not token.endswith(("us", "is")):
        return token[:-1]
    if token.endswith("ing") and len(token) > 5:
        return _strip_inflection(token, 3)
    if token.endswith("ed") and len(token) > 4:
        return _strip_inflection(token, 2)
    return token


def _strip_inflection(token: str, suffix_len: int) -> str:
    stem = token[:-suffix_len]
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "ls":
        stem = stem[:-1]
    if any(ch in _VOWELS for ch in stem):
        return stem
    return token


def load_stop_words(path: str | Path | None = None) -> set[str]:
    """Load the stop-word list; defaults to the one shipped with the package."""
    if path is None:
        text = resources.files("expertsearch.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return {line.strip() for line in text.splitlines() if line.strip()}


def load_wiki_titles(path: str | Path) -> list[str]:
    """Read a title dump: plain UTF-8 text, one title per line."""
    with Path(path).open(encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle if line.strip()]


def load_kb_term_names(path: str | Path) -> set[str]:
    """Read field-of-study display names from a (id, name) TSV, lowercased."""
    names = set()
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                continue
            names.add(parts[1].strip().lower())
    return names
