"""Command-line entry points: build snapshots, query them, run the server.

Every flag can also come from a JSON config file (--config); explicit
flags win over config values.  Usage problems exit 2, runtime failures 1.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import threading
from pathlib import Path

from .browse import BrowseCriteria, default_tree, emit_browse_json, load_tree
from .corpus import authorship_map, load_authorship, load_publications, save_authorship
from .index import PaperTermIndex, build_index
from .knowledge import KnowledgeBase, SearchEngine, load_kb, search
from .latent import export_libfm
from .lexicon import (
    MAX_TERM_TOKENS,
    TermDictionary,
    build_dictionary,
    clean_wiki_terms,
    load_stop_words,
    load_wiki_titles,
)
from .person import PersonTermIndex, TransformWeights, build_person_index
from .report import run_eval
from .service import (
    BUNDLE_FILES,
    ServiceState,
    build_browse_payload,
    browse_assignment,
    start_server,
)
from .snapshot import SnapshotError
from .suggest import SuggestTrie, build_trie, suggest

ADDRESS_ENV = "EXPERTSEARCH_ADDRESS"

KB_TABLE_FILES = {
    "fields_of_study": "fields_of_study.tsv",
    "fos_children": "fos_children.tsv",
    "related_fos": "related_fos.tsv",
    "paper_fos": "paper_fos.tsv",
    "paper_authors": "paper_authors.tsv",
}


class UsageError(Exception):
    """Bad invocation: missing input, unknown value.  Exit code 2."""


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    config = _load_config(args.config)
    try:
        return args.handler(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return 2
    except (SnapshotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expertsearch",
                                     description="Expert search over publication corpora.")
    parser.set_defaults(command=None)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON file supplying defaults for any flag")

    p = sub.add_parser("index", help="build the snapshot bundle from raw inputs")
    common(p)
    p.add_argument("--corpus", help="publications file (csv or jsonl)")
    p.add_argument("--format", choices=("csv", "jsonl"), help="corpus format (default: by suffix)")
    p.add_argument("--kb-dir", help="directory with the knowledge-base .tsv tables")
    p.add_argument("--wiki-titles", help="optional file with one encyclopedia title per line")
    p.add_argument("--formula", choices=("f1", "f2", "f3"), help="person-term formula (default f3)")
    for w in ("w1", "w2", "w3", "w4"):
        p.add_argument(f"--{w}", type=float, help=f"transformation weight {w} (default 1.0)")
    p.add_argument("--out", help="bundle output directory")
    p.set_defaults(handler=_cmd_index)

    p = sub.add_parser("search", help="rank researchers for a query")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--query", help="query text")
    p.add_argument("--k", type=int, help="result count (default 10)")
    p.add_argument("--alpha", type=float, help="matching/kb blend in [0,1] (default 0.5)")
    p.set_defaults(handler=_cmd_search)

    p = sub.add_parser("suggest", help="autocomplete a query prefix")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--query", help="typed prefix")
    p.add_argument("--limit", type=int, help="max suggestions (default 10)")
    p.set_defaults(handler=_cmd_suggest)

    p = sub.add_parser("browse", help="emit the browse tree with ranked researchers")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--tree", help="concept tree file (default: built-in tree)")
    p.add_argument("--threshold", type=float, help="fixed qualify threshold (default percentile)")
    p.add_argument("--max-leaves", type=int, help="leaf cap per researcher (default 7)")
    p.add_argument("--out", help="output JSON path")
    p.set_defaults(handler=_cmd_browse)

    p = sub.add_parser("export-libfm", help="dump person-term scores as libfm lines")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--out", help="output path")
    p.set_defaults(handler=_cmd_export_libfm)

    p = sub.add_parser("serve", help="run the TCP query service")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--host", help="listen host (default 127.0.0.1)")
    p.add_argument("--port", type=int, help="listen port (default 7777)")
    p.add_argument("--idle-timeout", type=float, help="connection idle timeout seconds")
    p.add_argument("--tree", help="concept tree file (default: built-in tree)")
    p.set_defaults(handler=_cmd_serve)

    p = sub.add_parser("eval", help="compare hybrid vs LSA vs NMF rankings on fixture queries")
    common(p)
    p.add_argument("--bundle", help="snapshot bundle directory")
    p.add_argument("--queries", help="file with one query per line")
    p.add_argument("--k", type=int, help="ranking depth (default 10)")
    p.add_argument("--latent-k", type=int, help="latent dimensions (default min(8, rank))")
    p.add_argument("--seed", type=int, help="decomposition seed (default 0)")
    p.add_argument("--out-dir", help="report output directory")
    p.set_defaults(handler=_cmd_eval)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: unreadable config file: {exc}")
    if not isinstance(config, dict):
        raise SystemExit("error: config file must hold a JSON object")
    return config


def _get(args, config: dict, key: str, default=None, required: bool = False):
    """Flag value if given, else config value, else default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is None:
        value = config.get(key, default)
    if value is None and required:
        raise UsageError(f"--{key} is required (flag or config)")
    return value


def _cmd_index(args, config) -> int:
    corpus_path = Path(_get(args, config, "corpus", required=True))
    fmt = _get(args, config, "format") or ("jsonl" if corpus_path.suffix == ".jsonl" else "csv")
    kb_dir = Path(_get(args, config, "kb-dir", required=True))
    out = Path(_get(args, config, "out", required=True))
    formula = _get(args, config, "formula", "f3")
    weights = TransformWeights(*(float(_get(args, config, w, 1.0)) for w in ("w1", "w2", "w3", "w4")))

    loaded = load_publications(corpus_path, fmt)
    kb = load_kb(_kb_paths(kb_dir))
    wiki_path = _get(args, config, "wiki-titles")
    wiki_terms = clean_wiki_terms(load_wiki_titles(wiki_path)) if wiki_path else set()
    kb_names = {
        f.display_name.lower()
        for f in kb.fos.values()
        if len(f.display_name.split()) <= MAX_TERM_TOKENS
    }
    stop_words = load_stop_words()

    # Term frequencies come from the corpus, so index once with an unweighted
    # dictionary, then rebuild the dictionary with the measured counts.
    index = build_index(loaded.records, build_dictionary(wiki_terms, kb_names), stop_words)
    occurrences = index.term_occurrences()
    dictionary = build_dictionary(
        wiki_terms, kb_names, {t: occurrences.get(t, 0) for t in kb_names}
    )
    authorship = authorship_map(loaded.records)
    person = build_person_index(index, authorship, formula=formula, weights=weights)
    trie = build_trie(dictionary)

    out.mkdir(parents=True, exist_ok=True)
    dictionary.save(out / BUNDLE_FILES["dictionary"])
    index.save(out / BUNDLE_FILES["paper_term"])
    person.save(out / "person_term.snap")
    kb.save(out / BUNDLE_FILES["kb"])
    save_authorship(out / BUNDLE_FILES["authorship"], authorship)
    trie.save(out / BUNDLE_FILES["trie"])
    print(f"indexed {len(loaded.records)} papers ({loaded.skipped} rows skipped)")
    print(f"dictionary terms: {len(dictionary)}; person-term postings: {person.posting_count()}")
    print(f"bundle written to {out}")
    return 0


def _kb_paths(kb_dir: Path) -> dict[str, Path]:
    if not kb_dir.is_dir():
        raise UsageError(f"kb directory not found: {kb_dir}")
    paths = {}
    for table, name in KB_TABLE_FILES.items():
        candidate = kb_dir / name
        if candidate.exists():
            paths[table] = candidate
    if "fields_of_study" not in paths:
        raise UsageError(f"{kb_dir / KB_TABLE_FILES['fields_of_study']} is required")
    return paths


def _load_engine(bundle: Path, alpha: float = 0.5) -> SearchEngine:
    if not bundle.is_dir():
        raise UsageError(f"bundle directory not found: {bundle}")
    return SearchEngine(
        dictionary=TermDictionary.load(bundle / BUNDLE_FILES["dictionary"]),
        stop_words=load_stop_words(),
        index=PaperTermIndex.load(bundle / BUNDLE_FILES["paper_term"]),
        kb=KnowledgeBase.load(bundle / BUNDLE_FILES["kb"]),
        authorship=load_authorship(bundle / BUNDLE_FILES["authorship"]),
        alpha=alpha,
    )


def _cmd_search(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    query = _get(args, config, "query", required=True)
    k = int(_get(args, config, "k", 10))
    alpha = float(_get(args, config, "alpha", 0.5))
    engine = _load_engine(bundle, alpha)
    response = search(query, k, engine)
    if response.status != "ok":
        print("no recognized terms in query", file=sys.stderr)
        return 0
    for rank, (researcher, score) in enumerate(response.results, start=1):
        print(f"{rank} {researcher} {score:.6f}")
    return 0


def _cmd_suggest(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    prefix = _get(args, config, "query", required=True)
    limit = int(_get(args, config, "limit", 10))
    if not bundle.is_dir():
        raise UsageError(f"bundle directory not found: {bundle}")
    trie = SuggestTrie.load(bundle / BUNDLE_FILES["trie"])
    result = suggest(trie, prefix, limit)
    if result.status == "too_short":
        print("prefix too short: type at least 3 characters", file=sys.stderr)
        return 0
    for term, frequency in result.suggestions:
        print(f"{term}\t{frequency}")
    return 0


def _cmd_browse(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    out = Path(_get(args, config, "out", required=True))
    tree_path = _get(args, config, "tree")
    threshold = _get(args, config, "threshold")
    criteria = BrowseCriteria(
        qualify_threshold=None if threshold is None else float(threshold),
        max_leaves=int(_get(args, config, "max-leaves", 7)),
    )
    engine = _load_engine(bundle)
    tree = load_tree(tree_path) if tree_path else default_tree()
    emit_browse_json(tree, browse_assignment(engine, tree, criteria), out)
    print(f"browse tree written to {out}")
    return 0


def _cmd_export_libfm(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    out = Path(_get(args, config, "out", required=True))
    if not bundle.is_dir():
        raise UsageError(f"bundle directory not found: {bundle}")
    person = PersonTermIndex.load(bundle / "person_term.snap")
    count = export_libfm(person, out)
    print(f"wrote {count} observation lines to {out}")
    return 0


def _cmd_serve(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    host = _get(args, config, "host", "127.0.0.1")
    port = int(_get(args, config, "port", 7777))
    address = os.environ.get(ADDRESS_ENV)
    if address:
        host, _, port_text = address.rpartition(":")
        if not host or not port_text.isdigit():
            raise UsageError(f"{ADDRESS_ENV} must look like host:port, got {address!r}")
        port = int(port_text)
    idle = float(_get(args, config, "idle-timeout", 30.0))
    tree_path = _get(args, config, "tree")

    engine = _load_engine(bundle)
    trie = SuggestTrie.load(bundle / BUNDLE_FILES["trie"])
    tree = load_tree(tree_path) if tree_path else default_tree()
    state = ServiceState(
        engine=engine, trie=trie, browse_payload=build_browse_payload(engine, tree)
    )
    try:
        server = start_server(state, host, port, idle_timeout=idle)
    except OSError as exc:
        print(f"error: cannot listen on {host}:{port}: {exc}", file=sys.stderr)
        return 1
    actual_host, actual_port = server.server_address[:2]
    print(f"serving on {actual_host}:{actual_port}", flush=True)

    stop = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: stop.set())
    while not stop.wait(0.2):
        pass
    print("draining connections", flush=True)
    server.drain_and_shutdown()
    return 0


def _cmd_eval(args, config) -> int:
    bundle = Path(_get(args, config, "bundle", required=True))
    queries_path = Path(_get(args, config, "queries", required=True))
    out_dir = Path(_get(args, config, "out-dir", required=True))
    k = int(_get(args, config, "k", 10))
    latent_k = _get(args, config, "latent-k")
    seed = int(_get(args, config, "seed", 0))

    queries = [
        line.strip() for line in queries_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not queries:
        raise UsageError(f"no queries in {queries_path}")
    engine = _load_engine(bundle)
    person = PersonTermIndex.load(bundle / "person_term.snap")
    paths = run_eval(
        queries, engine, person, out_dir, k=k,
        latent_k=None if latent_k is None else int(latent_k), seed=seed,
    )
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
