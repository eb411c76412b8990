import json
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from django.conf import settings

TWO_PI = 2.0 * math.pi


def worker_count():
    """Number of worker threads allowed by SHADOWFIT_THREADS (at least 1)."""
    return max(1, int(getattr(settings, 'SHADOWFIT_THREADS', 1) or 1))


def parallel_map(func, items):
    """Map func over items on a thread pool; results keep the input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def stream_rng(seed, *key):
    """Independent generator for one (seed, key) pair.

    Streams depend only on the seed and the key, never on which thread or
    in which order they are requested.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(sequence)


def wrap_phase(phi):
    """Reduce phases into [0, 2pi)."""
    wrapped = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # np.mod can round up to exactly 2pi for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def unwrap_phases(phi):
    """Nearest-branch continuation of phases ordered by increasing x.

    Exact half-turn jumps keep their sign, i.e. ties go toward zero winding.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.size < 2:
        return phi.copy()
    return np.unwrap(phi)


def format_float(value):
    """Shortest round-tripping text for a float, stable across runs."""
    return repr(float(value))


def dump_json(data, path):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(json.dumps(data, indent=2, sort_keys=True))
        handle.write('\n')


def load_json(path):
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)
