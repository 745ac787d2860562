"""Publication corpus loading and raw-text normalization.

Raw field text goes through a fixed five-stage pipeline (lowercase,
copyright stripping, duplicate collapsing, sentence segmentation,
tokenization) before any term extraction happens.
"""

from __future__ import annotations

import csv
import json
import re
import string
from dataclasses import dataclass
from pathlib import Path

from .snapshot import load_snapshot, save_snapshot


class CorpusError(ValueError):
    """A corpus file that cannot be used at all (wrong columns, no rows)."""


@dataclass(frozen=True)
class PublicationRecord:
    """One publication with its fielded text and author list."""

    paper_id: str
    title: str
    abstract: str
    keywords: str
    journal_name: str
    conference_name: str
    authors: tuple[str, ...]


@dataclass(frozen=True)
class CleanSentence:
    """An ordered list of lowercase tokens; no token contains whitespace."""

    tokens: tuple[str, ...]


@dataclass
class LoadResult:
    """Parsed records in file order plus the count of skipped malformed rows."""

    records: list[PublicationRecord]
    skipped: int


def authorship_map(records) -> dict[str, list[str]]:
    """Paper id → claiming researcher ids, in record order."""
    return {r.paper_id: list(r.authors) for r in records}


def save_authorship(path, authorship: dict[str, list[str]]) -> None:
    save_snapshot(path, "authorship", {"papers": authorship})


def load_authorship(path) -> dict[str, list[str]]:
    return {p: list(a) for p, a in load_snapshot(path, "authorship")["papers"].items()}


# Text columns every corpus file must carry; venue columns default to empty.
REQUIRED_COLUMNS = ("paper_id", "title", "abstract", "claimed_users", "keywords")
OPTIONAL_COLUMNS = ("journal_name", "conference_name")

# A copyright clause runs from the marker through the next sentence end.
_COPYRIGHT_RE = re.compile(r"(?:©|\bcopyright\b).*?(?:[.!?]|$)", re.DOTALL)
_DUP_PUNCT_RE = re.compile(r"([%s])\1+" % re.escape(string.punctuation))
_WHITESPACE_RE = re.compile(r"\s+")

_TERMINATORS = ".!?"
# Abbreviations whose trailing period must not end a sentence.
_ABBREVIATIONS = ("et al.", "e.g.", "i.e.", "fig.", "dr.")


def preprocess_text(raw: str) -> list[CleanSentence]:
    """Normalize raw text into token-segmented sentences.

    Stages run in a fixed order: lowercasing, copyright-notice removal,
    duplicate-punctuation and duplicate-whitespace collapsing, sentence
    segmentation, tokenization.  Total and deterministic: any input,
    including empty, yields a (possibly empty) sentence list.
    """
    text = raw.lower()
    text = _COPYRIGHT_RE.sub("", text)
    text = _DUP_PUNCT_RE.sub(r"\1", text)
    text = _WHITESPACE_RE.sub(" ", text).strip()
    sentences = []
    for segment in _segment(text):
        tokens = _tokenize(segment)
        if tokens:
            sentences.append(CleanSentence(tokens=tuple(tokens)))
    return sentences


def _segment(text: str) -> list[str]:
    """Split on terminator-plus-space (or end of text), guarding abbreviations."""
    if not text:
        return []
    segments = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS and (i + 1 == n or text[i + 1] == " "):
            candidate = text[start : i + 1]
            if ch == "." and _ends_with_abbreviation(candidate):
                i += 1
                continue
            if candidate.strip():
                segments.append(candidate)
            start = i + 2
            i += 2
            continue
        i += 1
    tail = text[start:].strip()
    if tail:
        segments.append(tail)
    return segments


def _ends_with_abbreviation(candidate: str) -> bool:
    for abbrev in _ABBREVIATIONS:
        if candidate.endswith(abbrev):
            boundary = len(candidate) - len(abbrev)
            if boundary == 0 or not candidate[boundary - 1].isalnum():
                return True
    return False


def _tokenize(segment: str) -> list[str]:
    """Whitespace split, then strip edge punctuation; inner hyphens survive."""
    tokens = []
    for raw_token in segment.split():
        token = raw_token.strip(string.punctuation)
        if token:
            tokens.append(token)
    return tokens


def load_publications(path: str | Path, fmt: str) -> LoadResult:
    """Load publication records from a csv or jsonl file.

    Rows without a paper id, with a duplicate paper id, or with no author
    are counted and skipped.  Raises CorpusError when required columns are
    missing or no row parses at all.
    """
    path = Path(path)
    if fmt == "csv":
        rows = _read_csv(path)
    elif fmt == "jsonl":
        rows = _read_jsonl(path)
    else:
        raise ValueError(f"unknown corpus format: {fmt!r}")

    records = []
    seen_ids = set()
    skipped = 0
    for row in rows:
        record = _row_to_record(row)
        if record is None or record.paper_id in seen_ids:
            skipped += 1
            continue
        seen_ids.add(record.paper_id)
        records.append(record)
    if not records:
        raise CorpusError(f"no parseable publication rows in {path}")
    return LoadResult(records=records, skipped=skipped)


def _read_csv(path: Path) -> list[dict]:
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [col for col in REQUIRED_COLUMNS if col not in header]
        if missing:
            raise CorpusError(f"csv {path} missing required columns: {missing}")
        return list(reader)


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                rows.append({})  # malformed line, counted by the caller
                continue
            rows.append(obj if isinstance(obj, dict) else {})
    return rows


def _row_to_record(row: dict) -> PublicationRecord | None:
    paper_id = str(row.get("paper_id") or "").strip()
    if not paper_id:
        return None
    authors = _parse_authors(row.get("claimed_users"))
    if not authors:
        return None
    missing_required = any(row.get(col) is None for col in ("title", "abstract", "keywords"))
    if missing_required:
        return None
    return PublicationRecord(
        paper_id=paper_id,
        title=str(row.get("title") or ""),
        abstract=str(row.get("abstract") or ""),
        keywords=str(row.get("keywords") or ""),
        journal_name=str(row.get("journal_name") or ""),
        conference_name=str(row.get("conference_name") or ""),
        authors=tuple(authors),
    )


def _parse_authors(value) -> list[str]:
    """Author cells hold either a JSON array (jsonl) or a ';'-joined list (csv)."""
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        names = [str(name).strip() for name in value]
    else:
        names = [name.strip() for name in str(value).split(";")]
    return [name for name in names if name]
