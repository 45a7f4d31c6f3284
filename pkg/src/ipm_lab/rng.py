"""Deterministic stream splitting.

All randomness in the library flows from a single integer seed.  Independent
streams for distinct purposes ("instance", "sketch", "perturb-v", ...) are
derived by folding a label hash and optional indices into a SeedSequence, so
every consumer is reproducible and decoupled from the others.
"""

import zlib

import numpy as np


def derive_seed(seed, label, *indices):
    """Return a child integer seed for (seed, label, *indices)."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode("utf-8"))]
    key.extend(int(i) for i in indices)
    ss = np.random.SeedSequence(key)
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(seed, label, *indices):
    """Return a numpy Generator on the derived child stream."""
    return np.random.default_rng(derive_seed(seed, label, *indices))
