"""
Seed Substreams
Fans a single master seed out into named, independent rng streams
"""

import numpy as np


# Stream ids are part of the reproducibility contract; never renumber.
STREAMS = {
    'chain': 1,
    'replicate': 2,
    'split': 4,
    'synthetic': 5,
}


def substream(master_seed, name, *keys):
    """
    Build a Generator for a named substream

    Args:
        master_seed: Non-negative integer master seed
        name: Stream name (see STREAMS)
        *keys: Extra non-negative integers (replicate index, cell index, ...)

    Returns:
        numpy.random.Generator
    """
    if name not in STREAMS:
        raise KeyError(f"unknown rng stream '{name}', try: " + ", ".join(STREAMS))
    seq = np.random.SeedSequence(
        entropy=int(master_seed),
        spawn_key=(STREAMS[name],) + tuple(int(k) for k in keys),
    )
    return np.random.default_rng(seq)
