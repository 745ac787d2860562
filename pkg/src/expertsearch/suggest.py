"""Prefix-trie autocomplete ranked by corpus term frequency.

Knowledge-base terms carry real occurrence counts while encyclopedia-only
terms carry 0, so kb terms with any usage always outrank them.  Suggestions
require at least three typed characters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import TermDictionary
from .snapshot import load_snapshot, save_snapshot

SNAPSHOT_KIND = "suggest_trie"
MIN_PREFIX = 3
DEFAULT_LIMIT = 10


class TrieNode:
    __slots__ = ("children", "terminal", "frequency", "kb")

    def __init__(self):
        self.children: dict[str, TrieNode] = {}
        self.terminal = False
        self.frequency = 0
        self.kb = False


class SuggestTrie:
    """Character trie; one node per Unicode scalar on each term's path."""

    def __init__(self):
        self.root = TrieNode()
        self.node_count = 1

    def terminals(self) -> list[tuple[str, int, bool]]:
        """All (term, frequency, kb) triples in lexicographic order."""
        found: list[tuple[str, int, bool]] = []

        def walk(node: TrieNode, spelled: str) -> None:
            if node.terminal:
                found.append((spelled, node.frequency, node.kb))
            for char in sorted(node.children):
                walk(node.children[char], spelled + char)

        walk(self.root, "")
        return found

    def to_payload(self) -> dict:
        return {"terms": [[t, f, k] for t, f, k in self.terminals()]}

    @classmethod
    def from_payload(cls, payload: dict) -> "SuggestTrie":
        trie = cls()
        for term, frequency, kb in payload["terms"]:
            trie_insert(trie, term, int(frequency), bool(kb))
        return trie

    def save(self, path) -> None:
        save_snapshot(path, SNAPSHOT_KIND, self.to_payload())

    @classmethod
    def load(cls, path) -> "SuggestTrie":
        return cls.from_payload(load_snapshot(path, SNAPSHOT_KIND))


@dataclass
class LookupResult:
    found: bool
    nodes_visited: int


@dataclass
class SuggestResult:
    status: str  # "ok" or "too_short"
    suggestions: list[tuple[str, int]]


def trie_insert(trie: SuggestTrie, term: str, frequency: int = 0, kb: bool = False) -> SuggestTrie:
    """Insert one lowercase term; re-inserting overwrites frequency and flag."""
    if not term:
        raise ValueError("cannot insert an empty term")
    if frequency < 0:
        raise ValueError("frequency must be >= 0")
    node = trie.root
    for char in term:
        nxt = node.children.get(char)
        if nxt is None:
            nxt = TrieNode()
            node.children[char] = nxt
            trie.node_count += 1
        node = nxt
    node.terminal = True
    node.frequency = frequency
    node.kb = kb
    return trie


def lookup(trie: SuggestTrie, term: str) -> LookupResult:
    """Exact-term lookup; visits at most len(term) + 1 nodes."""
    node = trie.root
    visited = 1
    for char in term:
        node = node.children.get(char)
        if node is None:
            return LookupResult(found=False, nodes_visited=visited)
        visited += 1
    return LookupResult(found=node.terminal, nodes_visited=visited)


def suggest(trie: SuggestTrie, prefix: str, limit: int | None = DEFAULT_LIMIT) -> SuggestResult:
    """Terminals under the prefix, by frequency desc then term asc.

    Prefixes shorter than three characters are refused with "too_short";
    limit None means unbounded.
    """
    if len(prefix) < MIN_PREFIX:
        return SuggestResult(status="too_short", suggestions=[])
    node = trie.root
    for char in prefix:
        node = node.children.get(char)
        if node is None:
            return SuggestResult(status="ok", suggestions=[])

    matches: list[tuple[str, int]] = []

    def walk(current: TrieNode, spelled: str) -> None:
        if current.terminal:
            matches.append((spelled, current.frequency))
        for char in sorted(current.children):
            walk(current.children[char], spelled + char)

    walk(node, prefix)
    matches.sort(key=lambda item: (-item[1], item[0]))
    return SuggestResult(status="ok", suggestions=matches if limit is None else matches[:limit])


def build_trie(dictionary: TermDictionary) -> SuggestTrie:
    """Trie over every dictionary term; kb-sourced terms keep their counts."""
    trie = SuggestTrie()
    for term in sorted(dictionary.entries):
        entry = dictionary.entries[term]
        kb = entry.source in ("kb", "both")
        trie_insert(trie, term, entry.frequency if kb else 0, kb)
    return trie
