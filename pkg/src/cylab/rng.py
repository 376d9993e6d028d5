"""Counter-based random streams.

Each (master seed, experiment name, replicate index) triple maps to its own
Philox stream through ``numpy.random.SeedSequence`` spawn keys. Adding
replicates or experiments never changes the draws of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def experiment_key(name: str) -> int:
    """Stable 32-bit integer derived from an experiment name."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def _sequence(seed: int, experiment: str, replicate: int) -> np.random.SeedSequence:
    if seed < 0 or replicate < 0:
        raise ValueError("seed and replicate must be non-negative")
    return np.random.SeedSequence(entropy=int(seed),
                                  spawn_key=(experiment_key(experiment), int(replicate)))


def stream(seed: int, experiment: str = "default", replicate: int = 0) -> np.random.Generator:
    """Independent generator for one replicate of one experiment.

    Parameters
    ----------
    seed : int
        Master seed of the run.
    experiment : str
        Experiment name; hashed into the spawn key.
    replicate : int
        Replicate index.

    Returns
    -------
    numpy.random.Generator
        Philox-backed generator.
    """
    return np.random.Generator(np.random.Philox(_sequence(seed, experiment, replicate)))


def replicate_seed(seed: int, experiment: str, replicate: int) -> int:
    """64-bit fingerprint of a replicate stream, recorded next to its output."""
    state = _sequence(seed, experiment, replicate).generate_state(1, dtype=np.uint64)
    return int(state[0])


def as_generator(rng=None) -> np.random.Generator:
    """Coerce ``None``, an int seed or a generator into a generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.Generator(np.random.Philox())
    return stream(int(rng))
