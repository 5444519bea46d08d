"""Seed derivation for splittable deterministic randomness.

A single job seed fans out into per-node seeds (and a batch seed fans out
into per-sample seeds) through one stated mixing function, so execution
order and parallelism can never change what any module sees.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def mix64(*parts: int | str) -> int:
    """Collapse the parts into a 64-bit seed via BLAKE2b.

    Integers and strings hash differently (``7`` vs ``"7"``), and the
    encoding is length-prefixed so concatenation cannot alias.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (int, str)):
            raise TypeError(f"mix64 accepts int and str parts, got {type(part).__name__}")
        if isinstance(part, int):
            token = b"i" + str(part & MASK64).encode("ascii")
        else:
            token = b"s" + part.encode("utf-8")
        h.update(len(token).to_bytes(4, "big"))
        h.update(token)
    return int.from_bytes(h.digest(), "big")


def node_seed(job_seed: int, node_id: str) -> int:
    """Seed for one node within a job."""
    return mix64(job_seed, node_id)


def sample_seed(base_seed: int, sample_index: int) -> int:
    """Job seed for one sample of a batch run."""
    return mix64(base_seed, sample_index)
