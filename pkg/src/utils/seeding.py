"""Seed derivation so one experiment seed fans out into independent streams."""

import secrets
import zlib
from typing import Tuple

import numpy as np

SESSION_STREAM = "session"
GROUND_TRUTH_STREAM = "ground-truth"


def derive_seed(root: int, *labels: str) -> int:
    """Deterministic 64-bit child seed of `root` for the given label path.

    Args:
        root: Parent seed
        labels: Names identifying the child stream, e.g. ("ground-truth", "warm")

    Returns:
        A seed in [0, 2**64)
    """
    entropy = [root] + [zlib.crc32(label.encode("utf-8")) for label in labels]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def fresh_seed() -> int:
    """A new root seed for runs where none was given; callers must report it."""
    return secrets.randbits(63)


def experiment_seeds(seed: int, workload: str) -> Tuple[int, int]:
    """(session_seed, ground_truth_seed) for one workload under one experiment seed.

    Both depend on the workload name, so workloads sharing an experiment seed
    never share random draws.
    """
    return derive_seed(seed, SESSION_STREAM, workload), derive_seed(seed, GROUND_TRUTH_STREAM, workload)
