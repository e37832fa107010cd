"""Named random substreams derived from one master seed."""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *names: object) -> int:
    """Stable 64-bit seed for the substream ``names`` under ``seed``."""
    h = hashlib.sha256(str(int(seed)).encode())
    for n in names:
        h.update(b"/")
        h.update(str(n).encode())
    return int.from_bytes(h.digest()[:8], "big")


def stream(seed: int, *names: object) -> random.Random:
    return random.Random(derive_seed(seed, *names))
