"""Counter-based splittable random streams.

Every random draw in the package flows from a single 64-bit master seed.
Sub-streams are opened with ``stream(master, *path)`` where ``path`` is a
tuple of small integers naming the consumer (domain tag, trial index, ...).
Streams are backed by Philox, a counter-based generator, keyed on
``(master, mix(path))``: opening a new stream never perturbs any other
stream, and the same ``(master, path)`` always replays the same sequence.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Domain tags for stream paths.  New tags may be appended; renumbering
# existing ones breaks replay of old experiments.
DOMAIN_INSTANCE = 1
DOMAIN_TRIAL = 2
DOMAIN_TEST = 3


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_path(path: tuple[int, ...]) -> int:
    """Fold a path of integers into one 64-bit stream id."""
    acc = 0x243F6A8885A308D3
    for part in path:
        acc = _splitmix64(acc ^ (int(part) & _MASK64))
    return acc


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Open the sub-stream of ``master_seed`` named by ``path``."""
    key = np.array(
        [int(master_seed) & _MASK64, mix_path(path)], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def stream_id(master_seed: int, *path: int) -> int:
    """Stable identifier of a sub-stream, recorded in trial rows."""
    return mix_path((int(master_seed) & _MASK64,) + path)
