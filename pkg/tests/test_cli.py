"""End-to-end command-line tests over real input files and bundles."""

import csv
import json
import os
import re
import signal
import socket
import subprocess
import sys
from pathlib import Path

import pytest

from expertsearch.browse import parse_browse_json
from expertsearch.cli import main
from expertsearch.knowledge import search
from expertsearch.service import ServiceClient

from conftest import FOS_IDS, make_records

CSV_COLUMNS = (
    "paper_id", "title", "abstract", "claimed_users", "keywords",
    "journal_name", "conference_name",
)

# Cleans to exactly the wiki terms the conftest dictionary uses, so the
# CLI bundle and the in-process fixture engine agree term for term.
WIKI_TITLES = [
    "Text Analytics",
    "Routing Protocols",
    "Parallel Corpora",
    "File: Language.jpg",
    "Text Analytics (Outline)",
]


def write_workspace(root: Path) -> dict[str, Path]:
    records = make_records()
    corpus = root / "corpus.csv"
    with corpus.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in records:
            writer.writerow({
                "paper_id": r.paper_id,
                "title": r.title,
                "abstract": r.abstract,
                "claimed_users": ";".join(r.authors),
                "keywords": r.keywords,
                "journal_name": r.journal_name,
                "conference_name": r.conference_name,
            })

    kb_dir = root / "kb"
    kb_dir.mkdir()
    _tsv(kb_dir / "fields_of_study.tsv",
         [(i, name) for name, i in sorted(FOS_IDS.items())])
    cs = FOS_IDS["computer science"]
    _tsv(kb_dir / "fos_children.tsv",
         [(cs, FOS_IDS[n]) for n in ("computer network", "programming languages",
                                     "machine learning")]
         + [(FOS_IDS["programming languages"], FOS_IDS["compilers"])])
    _tsv(kb_dir / "related_fos.tsv",
         [(FOS_IDS["machine translation"], FOS_IDS["natural language processing"])])
    paper_fos = []
    paper_authors = []
    for r in records:
        for raw in r.keywords.split(";"):
            name = raw.strip().lower()
            if name in FOS_IDS:
                paper_fos.append((r.paper_id, FOS_IDS[name], 0.9))
        paper_authors.extend((r.paper_id, a) for a in r.authors)
    _tsv(kb_dir / "paper_fos.tsv", paper_fos)
    _tsv(kb_dir / "paper_authors.tsv", paper_authors)

    wiki = root / "wiki_titles.txt"
    wiki.write_text("\n".join(WIKI_TITLES) + "\n", encoding="utf-8")
    return {"corpus": corpus, "kb_dir": kb_dir, "wiki": wiki}


def _tsv(path: Path, rows) -> None:
    path.write_text("".join("\t".join(map(str, row)) + "\n" for row in rows),
                    encoding="utf-8")


def run_index(inputs: dict[str, Path], out: Path) -> int:
    return main([
        "index",
        "--corpus", str(inputs["corpus"]),
        "--kb-dir", str(inputs["kb_dir"]),
        "--wiki-titles", str(inputs["wiki"]),
        "--out", str(out),
    ])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    inputs = write_workspace(root)
    bundle = root / "bundle"
    assert run_index(inputs, bundle) == 0
    return {"root": root, "bundle": bundle, **inputs}


class TestIndex:
    def test_reports_counts(self, workspace, tmp_path, capsys):
        assert run_index(workspace, tmp_path / "bundle") == 0
        out = capsys.readouterr().out
        assert "indexed 10 papers" in out
        assert "bundle written" in out

    def test_bundle_files_exist(self, workspace):
        names = {p.name for p in workspace["bundle"].iterdir()}
        assert names == {
            "dictionary.snap", "paper_term.snap", "person_term.snap",
            "kb.snap", "authorship.snap", "trie.snap",
        }

    def test_rebuild_is_byte_identical(self, workspace, tmp_path):
        assert run_index(workspace, tmp_path / "again") == 0
        for first in sorted(workspace["bundle"].iterdir()):
            other = tmp_path / "again" / first.name
            assert other.read_bytes() == first.read_bytes(), first.name

    def test_missing_corpus_flag(self, workspace, capsys):
        rc = main(["index", "--kb-dir", str(workspace["kb_dir"]), "--out", "x"])
        assert rc == 2
        assert "--corpus is required" in capsys.readouterr().err

    def test_missing_corpus_file(self, workspace, tmp_path, capsys):
        rc = main([
            "index", "--corpus", str(tmp_path / "nope.csv"),
            "--kb-dir", str(workspace["kb_dir"]), "--out", str(tmp_path / "b"),
        ])
        assert rc == 2
        assert "missing input" in capsys.readouterr().err

    def test_unknown_format_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["index", "--corpus", "x.csv", "--format", "xml"])


class TestSearch:
    def test_matches_in_process_engine(self, workspace, engine, capsys):
        rc = main(["search", "--bundle", str(workspace["bundle"]),
                   "--query", "machine translation", "--k", "5"])
        assert rc == 0
        expected = search("machine translation", 5, engine)
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            f"{i} {r} {s:.6f}" for i, (r, s) in enumerate(expected.results, start=1)
        ]

    def test_no_terms_goes_to_stderr(self, workspace, capsys):
        rc = main(["search", "--bundle", str(workspace["bundle"]),
                   "--query", "zzqqxx unknown"])
        assert rc == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "no recognized terms" in captured.err

    def test_missing_bundle_dir(self, tmp_path, capsys):
        rc = main(["search", "--bundle", str(tmp_path / "missing"), "--query", "x"])
        assert rc == 2
        assert "bundle directory not found" in capsys.readouterr().err

    def test_corrupt_snapshot_is_runtime_error(self, tmp_path, capsys):
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "dictionary.snap").write_bytes(b"not a snapshot at all")
        rc = main(["search", "--bundle", str(bad), "--query", "x"])
        assert rc == 1


class TestSuggest:
    def test_prefix_listing(self, workspace, capsys):
        rc = main(["suggest", "--bundle", str(workspace["bundle"]), "--query", "mach"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        terms = [line.split("\t")[0] for line in lines]
        assert set(terms) == {"machine translation", "machine learning"}
        freqs = [int(line.split("\t")[1]) for line in lines]
        assert freqs == sorted(freqs, reverse=True)

    def test_too_short_prefix(self, workspace, capsys):
        rc = main(["suggest", "--bundle", str(workspace["bundle"]), "--query", "ma"])
        assert rc == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "at least 3 characters" in captured.err

    def test_wiki_only_terms_carry_zero_frequency(self, workspace, capsys):
        rc = main(["suggest", "--bundle", str(workspace["bundle"]), "--query", "rout"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out == "routing protocols\t0\n"


class TestBrowse:
    def test_writes_parseable_tree(self, workspace, tmp_path, capsys):
        out = tmp_path / "browse.json"
        rc = main(["browse", "--bundle", str(workspace["bundle"]), "--out", str(out)])
        assert rc == 0
        placed = parse_browse_json(out.read_bytes())
        leaves_with_people = {label for label, rs in placed.items() if rs}
        assert "computer network" in leaves_with_people
        for rs in placed.values():
            scores = [s for _, s in rs]
            assert scores == sorted(scores, reverse=True)

    def test_two_runs_byte_identical(self, workspace, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert main(["browse", "--bundle", str(workspace["bundle"]),
                         "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestExportLibfm:
    def test_line_shape(self, workspace, tmp_path, capsys):
        out = tmp_path / "scores.libfm"
        rc = main(["export-libfm", "--bundle", str(workspace["bundle"]),
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines
        pattern = re.compile(r"^\S+ \d+:1 \d+:1$")
        assert all(pattern.match(line) for line in lines)
        assert f"wrote {len(lines)} observation lines" in capsys.readouterr().out


class TestEval:
    def test_produces_table_and_figures(self, workspace, tmp_path, capsys):
        queries = tmp_path / "queries.txt"
        queries.write_text("machine translation\ncomputer network\n", encoding="utf-8")
        out_dir = tmp_path / "report"
        rc = main(["eval", "--bundle", str(workspace["bundle"]),
                   "--queries", str(queries), "--out-dir", str(out_dir),
                   "--latent-k", "3"])
        assert rc == 0
        table = out_dir / "overlap.tsv"
        rows = table.read_text(encoding="utf-8").splitlines()
        assert rows[0].startswith("query\t")
        assert len(rows) == 3
        for figure in ("overlap.png", "nmf_objective.png"):
            data = (out_dir / figure).read_bytes()
            assert data.startswith(b"\x89PNG"), figure

    def test_empty_queries_is_usage_error(self, workspace, tmp_path, capsys):
        queries = tmp_path / "queries.txt"
        queries.write_text("\n\n", encoding="utf-8")
        rc = main(["eval", "--bundle", str(workspace["bundle"]),
                   "--queries", str(queries), "--out-dir", str(tmp_path / "r")])
        assert rc == 2


class TestConfigFile:
    def test_config_supplies_flags(self, workspace, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "bundle": str(workspace["bundle"]),
            "query": "machine translation",
            "k": 2,
        }), encoding="utf-8")
        rc = main(["search", "--config", str(config)])
        assert rc == 0
        assert len(capsys.readouterr().out.splitlines()) <= 2

    def test_flag_beats_config(self, workspace, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "bundle": str(workspace["bundle"]),
            "query": "machine translation",
        }), encoding="utf-8")
        rc = main(["search", "--config", str(config), "--query", "zzqqxx"])
        assert rc == 0
        assert "no recognized terms" in capsys.readouterr().err

    def test_non_object_config_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(SystemExit):
            main(["search", "--config", str(config), "--query", "x"])

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err.lower()


class TestServe:
    def test_port_in_use_fails_cleanly(self, workspace, capsys):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            rc = main(["serve", "--bundle", str(workspace["bundle"]),
                       "--port", str(port)])
        finally:
            blocker.close()
        assert rc == 1
        assert "cannot listen" in capsys.readouterr().err

    def test_subprocess_serving_and_signal_drain(self, workspace):
        env = dict(os.environ, EXPERTSEARCH_ADDRESS="127.0.0.1:0")
        proc = subprocess.Popen(
            [sys.executable, "-m", "expertsearch.cli", "serve",
             "--bundle", str(workspace["bundle"]), "--port", "7777"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True, env=env,
        )
        try:
            banner = proc.stdout.readline().strip()
            match = re.fullmatch(r"serving on 127\.0\.0\.1:(\d+)", banner)
            assert match, banner
            port = int(match.group(1))
            with ServiceClient("127.0.0.1", port) as client:
                assert client.request("ping")["status"] == "ok"
                got = client.request("search", query="machine translation", k=3)
                assert got["status"] == "ok" and got["payload"]
            proc.send_signal(signal.SIGINT)
            out, err = proc.communicate(timeout=15)
        finally:
            if proc.poll() is None:
                proc.kill()
                proc.communicate()
        assert proc.returncode == 0, err
        assert "draining connections" in out

    def test_bad_address_env(self, workspace, monkeypatch, capsys):
        monkeypatch.setenv("EXPERTSEARCH_ADDRESS", "not-an-address")
        rc = main(["serve", "--bundle", str(workspace["bundle"])])
        assert rc == 2
        assert "EXPERTSEARCH_ADDRESS" in capsys.readouterr().err
