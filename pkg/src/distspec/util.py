"""Shared RNG plumbing.

All randomness in the package flows through Philox4x64 counter-based
generators keyed by explicit 64-bit seeds, so identical seeds reproduce
byte-identical results across platforms and runs.  Independent phases of
a pipeline derive their own keys with :func:`derive_seed` so each phase
can be rerun in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def derive_seed(seed: int, label: str) -> int:
    """Derive an independent 64-bit seed for a named sub-phase.

    Hashes (label, seed) with SHA-256 and keeps the low 8 bytes, so
    distinct labels give independent streams and the mapping is stable
    across runs and platforms.
    """
    digest = hashlib.sha256(f"{label}:{int(seed) & _MASK64}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
