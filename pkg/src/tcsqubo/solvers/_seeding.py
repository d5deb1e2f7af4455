import numpy as np

MASK64 = (1 << 64) - 1


def seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    """Independent child stream of ``seed`` identified by ``keys``."""
    return np.random.SeedSequence(entropy=int(seed) & MASK64, spawn_key=tuple(int(k) for k in keys))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed for the child stream ``keys`` of ``seed``."""
    return int(seed_sequence(seed, *keys).generate_state(1, np.uint64)[0])
