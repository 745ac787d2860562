"""TCP query service speaking newline-delimited JSON frames.

One request object per line; each response echoes the request_id and
responses on a connection always follow request order.  All engine state
is an immutable snapshot bundle, so concurrent connections share it
without locks.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .browse import BrowseCriteria, ConceptTree, classify, default_tree, load_tree, render_browse
from .corpus import load_authorship
from .index import PaperTermIndex
from .knowledge import KnowledgeBase, SearchEngine, extract_query_terms, hybrid_scores, search
from .lexicon import TermDictionary, load_stop_words
from .suggest import SuggestTrie, suggest

MAX_FRAME_BYTES = 1 << 20
IDLE_TIMEOUT = 30.0
_POLL_SECONDS = 0.2

REQUEST_KINDS = ("search", "suggest", "browse", "ping")

# Snapshot bundle layout: file name per engine part, all in one directory.
BUNDLE_FILES = {
    "dictionary": "dictionary.snap",
    "paper_term": "paper_term.snap",
    "kb": "kb.snap",
    "authorship": "authorship.snap",
    "trie": "trie.snap",
}


@dataclass
class ServiceState:
    """Read-only snapshot of everything the request handlers consult."""

    engine: SearchEngine
    trie: SuggestTrie
    browse_payload: dict = field(default_factory=dict)


def browse_assignment(
    engine: SearchEngine, tree: ConceptTree, criteria: BrowseCriteria = BrowseCriteria()
):
    """Classify every known researcher, scoring each leaf label as a query."""
    researchers = sorted({r for authors in engine.authorship.values() for r in authors})
    leaf_labels = list(tree.leaf_label_map())
    per_leaf = {
        label: hybrid_scores(extract_query_terms(engine, label), engine)
        for label in leaf_labels
    }
    scores = {
        r: {label: per_leaf[label].get(r, 0.0) for label in leaf_labels} for r in researchers
    }
    return classify(tree, scores, criteria)


def build_browse_payload(
    engine: SearchEngine, tree: ConceptTree, criteria: BrowseCriteria = BrowseCriteria()
) -> dict:
    return render_browse(tree, browse_assignment(engine, tree, criteria))


def load_state(bundle_dir: str | Path, tree_path: str | Path | None = None) -> ServiceState:
    """Assemble service state from a snapshot bundle directory."""
    bundle = Path(bundle_dir)
    engine = SearchEngine(
        dictionary=TermDictionary.load(bundle / BUNDLE_FILES["dictionary"]),
        stop_words=load_stop_words(),
        index=PaperTermIndex.load(bundle / BUNDLE_FILES["paper_term"]),
        kb=KnowledgeBase.load(bundle / BUNDLE_FILES["kb"]),
        authorship=load_authorship(bundle / BUNDLE_FILES["authorship"]),
    )
    trie = SuggestTrie.load(bundle / BUNDLE_FILES["trie"])
    tree = load_tree(tree_path) if tree_path else default_tree()
    return ServiceState(engine=engine, trie=trie, browse_payload=build_browse_payload(engine, tree))


def handle_request(state: ServiceState, request: dict) -> dict:
    """Answer one decoded request object; never raises on bad input."""
    request_id = request.get("request_id") if isinstance(request, dict) else None
    if not isinstance(request, dict):
        return _error(request_id, "request must be a JSON object")
    kind = request.get("kind")
    try:
        if kind == "ping":
            return {"request_id": request_id, "status": "ok", "payload": None}
        if kind == "search":
            query = request.get("query")
            if not isinstance(query, str):
                return _error(request_id, "search needs a string query")
            response = search(query, int(request.get("k", 10)), state.engine)
            payload = [{"researcher": r, "score": s} for r, s in response.results]
            return {"request_id": request_id, "status": response.status, "payload": payload}
        if kind == "suggest":
            query = request.get("query")
            if not isinstance(query, str):
                return _error(request_id, "suggest needs a string query")
            result = suggest(state.trie, query, int(request.get("limit", 10)))
            payload = [{"term": t, "frequency": f} for t, f in result.suggestions]
            return {"request_id": request_id, "status": result.status, "payload": payload}
        if kind == "browse":
            return {"request_id": request_id, "status": "ok", "payload": state.browse_payload}
        return _error(request_id, f"unknown request kind: {kind!r}")
    except Exception as exc:  # noqa: BLE001 - protocol boundary must not crash
        return _error(request_id, f"internal error: {exc}")


def handle_request_line(state: ServiceState, line: str) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return _error(None, f"malformed frame: {exc.msg}")
    return handle_request(state, request)


def _error(request_id, message: str) -> dict:
    return {"request_id": request_id, "status": "error", "error_message": message}


def encode_frame(obj: dict) -> bytes:
    return (json.dumps(obj, ensure_ascii=False) + "\n").encode("utf-8")


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        sock: socket.socket = self.request
        server: ExpertSearchServer = self.server
        buffer = b""
        discarding = False
        idle = 0.0
        sock.settimeout(_POLL_SECONDS)
        while not server.draining and idle < server.idle_timeout:
            try:
                chunk = sock.recv(65536)
            except socket.timeout:
                idle += _POLL_SECONDS
                continue
            except OSError:
                return
            if not chunk:
                return
            idle = 0.0
            buffer += chunk
            while True:
                newline = buffer.find(b"\n")
                if newline < 0:
                    break
                frame, buffer = buffer[:newline], buffer[newline + 1 :]
                if discarding:
                    discarding = False
                    continue
                if len(frame) > server.max_frame:
                    response = _error(None, "frame exceeds maximum size")
                else:
                    response = handle_request_line(server.state, frame.decode("utf-8", "replace"))
                if not self._send(sock, response):
                    return
            if discarding:
                # Residue without a newline is still the oversize frame.
                buffer = b""
            elif len(buffer) > server.max_frame:
                # Drop bytes until the next newline, then resume framing.
                discarding = True
                buffer = b""
                if not self._send(sock, _error(None, "frame exceeds maximum size")):
                    return

    def _send(self, sock: socket.socket, response: dict) -> bool:
        try:
            sock.sendall(encode_frame(response))
            return True
        except OSError:
            return False


class ExpertSearchServer(socketserver.ThreadingTCPServer):
    """One thread per connection; handlers exit promptly once draining."""

    allow_reuse_address = True
    daemon_threads = False

    def __init__(self, address: tuple[str, int], state: ServiceState,
                 idle_timeout: float = IDLE_TIMEOUT, max_frame: int = MAX_FRAME_BYTES):
        super().__init__(address, _Handler)
        self.state = state
        self.idle_timeout = idle_timeout
        self.max_frame = max_frame
        self.draining = False

    def drain_and_shutdown(self) -> None:
        """Stop accepting, let in-flight requests finish, close sockets."""
        self.draining = True
        self.shutdown()
        self.server_close()


def start_server(state: ServiceState, host: str = "127.0.0.1", port: int = 0,
                 idle_timeout: float = IDLE_TIMEOUT) -> ExpertSearchServer:
    """Bind and serve in a background thread; port 0 picks a free port."""
    server = ExpertSearchServer((host, port), state, idle_timeout=idle_timeout)
    thread = threading.Thread(target=server.serve_forever, name="expertsearch-serve", daemon=True)
    thread.start()
    return server


class ServiceClient:
    """Blocking JSON-lines client for one long-lived connection."""

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._buffer = b""
        self._next_id = 0

    def send(self, request: dict) -> None:
        try:
            self._sock.sendall(encode_frame(request))
        except OSError as exc:
            raise ConnectionError(f"send failed: {exc}") from exc

    def read_response(self) -> dict:
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                frame, self._buffer = self._buffer[:newline], self._buffer[newline + 1 :]
                return json.loads(frame.decode("utf-8"))
            try:
                chunk = self._sock.recv(65536)
            except socket.timeout as exc:
                raise TimeoutError("timed out waiting for response") from exc
            except OSError as exc:
                raise ConnectionError(f"receive failed: {exc}") from exc
            if not chunk:
                raise ConnectionError("connection closed by server")
            self._buffer += chunk

    def request(self, kind: str, **fields) -> dict:
        """Send one request and block for its (in-order) response."""
        request_id = fields.pop("request_id", None)
        if request_id is None:
            self._next_id += 1
            request_id = self._next_id
        self.send({"kind": kind, "request_id": request_id, **fields})
        response = self.read_response()
        if response.get("request_id") != request_id:
            raise ConnectionError(
                f"out-of-order response: sent {request_id}, got {response.get('request_id')}"
            )
        return response

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def client_request(client: ServiceClient, request: dict, timeout: float | None = None) -> dict:
    """Functional form: issue one request object and await its response."""
    if timeout is not None:
        client._sock.settimeout(timeout)
    return client.request(request.get("kind", ""), **{
        k: v for k, v in request.items() if k != "kind"
    })
