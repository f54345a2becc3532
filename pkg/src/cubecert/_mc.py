"""Reproducible chunked Monte Carlo.

Samples are split into fixed-size chunks; chunk ``c`` of stream ``tag`` draws
from ``default_rng([seed, tag, c])``. Results are gathered in chunk order, so
they depend only on (seed, tag, n_samples) and never on the worker count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096

# stream tags
FOOLING = 1
CUBE = 2
NESTED = 3
DIFFERENCES = 4


def chunk_rng(seed, tag, chunk):
    return np.random.default_rng([int(seed), int(tag), int(chunk)])


def chunk_sizes(n, chunk=CHUNK):
    return [min(chunk, n - lo) for lo in range(0, n, chunk)]


def map_chunks(fn, n, seed, tag, workers=1, chunk=CHUNK):
    """[fn(rng_c, size_c) for each chunk c], computed on up to ``workers`` threads."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(chunk_rng(seed, tag, c), k) for c, k in enumerate(sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(rng, k) for rng, k in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def mean_and_stderr(values):
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(n))
