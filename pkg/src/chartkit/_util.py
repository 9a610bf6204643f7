"""Small shared helpers: canonical JSON and content hashing."""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text for hashing: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def content_hash(obj: Any, length: int = 16) -> str:
    """Short stable hash of a JSON-able object."""
    return sha256_hex(canonical_json(obj))[:length]


def derive_seed(root_seed: int, label: str) -> int:
    """Stable 63-bit child seed for a named stage of a run."""
    digest = sha256_hex(f"{root_seed}:{label}")
    return int(digest[:16], 16) & (2**63 - 1)
