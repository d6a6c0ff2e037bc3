"""Stable sub-seed derivation so every random site is reproducible and order-independent."""

from __future__ import annotations

import hashlib


def derive_seed(seed: int, *labels: object) -> int:
    """Mix a master seed with site labels into a 63-bit seed via SHA-256."""
    h = hashlib.sha256(str(int(seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "big") >> 1
