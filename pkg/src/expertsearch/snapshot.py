"""Versioned single-file snapshot dumps shared by every persistent artifact.

Layout, in order:
  bytes 0..4   magic  b"XSNAP"
  bytes 5..6   format version, big-endian u16
  byte  7      kind length K
  bytes 8..8+K kind tag, ascii (e.g. "paper_term", "trie")
  rest         zlib-compressed canonical JSON payload

Canonical JSON (sorted keys, compact separators) plus a fixed compression
level keeps dumps byte-identical across runs on identical inputs.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

MAGIC = b"XSNAP"
FORMAT_VERSION = 1
_COMPRESSION_LEVEL = 6


class SnapshotError(ValueError):
    """Bad magic bytes, version mismatch, wrong kind, or corrupt body."""


def save_snapshot(path: str | Path, kind: str, payload) -> None:
    kind_bytes = kind.encode("ascii")
    if not 0 < len(kind_bytes) < 256:
        raise ValueError(f"snapshot kind out of range: {kind!r}")
    body = json.dumps(
        payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")
    blob = (
        MAGIC
        + struct.pack(">H", FORMAT_VERSION)
        + struct.pack("B", len(kind_bytes))
        + kind_bytes
        + zlib.compress(body, _COMPRESSION_LEVEL)
    )
    Path(path).write_bytes(blob)


def load_snapshot(path: str | Path, kind: str):
    blob = Path(path).read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise SnapshotError(f"{path}: not a snapshot file (bad magic)")
    try:
        offset = len(MAGIC)
        (version,) = struct.unpack(">H", blob[offset : offset + 2])
        if version != FORMAT_VERSION:
            raise SnapshotError(
                f"{path}: snapshot version {version} unsupported (expected {FORMAT_VERSION})"
            )
        offset += 2
        kind_len = blob[offset]
        offset += 1
        found_kind = blob[offset : offset + kind_len].decode("ascii")
        if found_kind != kind:
            raise SnapshotError(f"{path}: snapshot kind {found_kind!r}, expected {kind!r}")
        offset += kind_len
        return json.loads(zlib.decompress(blob[offset:]).decode("utf-8"))
    except (struct.error, IndexError, UnicodeDecodeError, zlib.error,
            json.JSONDecodeError) as exc:
        raise SnapshotError(f"{path}: corrupt snapshot ({exc})") from exc
