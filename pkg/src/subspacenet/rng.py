import numpy as np

# Stream keys, folded into the SeedSequence spawn key
GRAPH, SIGNAL, AGENTS, MONTE_CARLO = 0, 1, 2, 3

RETRY_STRIDE = 2**20


def make_generator(seed, *keys):
    """Philox generator for the stream ``(seed, *keys)``; streams never overlap."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *keys):
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])
