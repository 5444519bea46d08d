"""Deterministic JSON rendering used for every exported artifact.

All surfaces (file export, HTTP bodies, manifests, content digests) must
produce identical bytes for identical logical objects:

- object keys sorted ascending at every level
- 2-space indentation, LF line endings, single trailing newline
- UTF-8, non-ASCII passed through unescaped
- numbers in shortest round-trip form, NaN/Infinity rejected

``compact_line`` is the one-object-per-line variant used by event streams
and digest input.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_dumps(obj: Any) -> str:
    """Render ``obj`` as the canonical pretty-printed document text."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def compact_line(obj: Any) -> str:
    """Single-line canonical form (sorted keys, no insignificant whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def content_digest(obj: Any) -> str:
    """SHA-256 hex digest of the compact canonical form of ``obj``."""
    return sha256_hex(compact_line(obj).encode("utf-8"))
