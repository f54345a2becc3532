"""Tensor-product cubature on [0, 1]^d.

The grid of m^d nodes is never materialized: evaluation walks the linear
index range in fixed-size chunks, and each chunk is expanded into points and
product weights by the ``grid_chunk`` kernel. Chunk boundaries do not depend
on the worker count, and chunk partial sums are combined in index order with
``math.fsum``, so the result is the same for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import grid_chunk
from .quad1d import Rule1D

DEFAULT_CAP = 10**8
CHUNK = 1 << 14


class TooManyNodesError(ValueError):
    """Raised when m^d exceeds the evaluation cap."""

    def __init__(self, m: int, d: int, cap: int):
        self.m, self.d, self.cap = m, d, cap
        self.n = m**d
        super().__init__(f"n={_pretty_int(self.n)} ({m}^{d} nodes) exceeds cap {_pretty_int(cap)}")


def _pretty_int(n: int) -> str:
    """'10^k' for exact powers of ten, the plain integer otherwise."""
    s = str(n)
    if len(s) > 2 and s[0] == "1" and set(s[1:]) == {"0"}:
        return f"10^{len(s) - 1}"
    return s


@dataclass(frozen=True)
class ProductRule:
    base: Rule1D
    d: int

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def n(self) -> int:
        """Number of nodes m^d as an exact Python integer."""
        return self.base.m ** self.d

    def chunks(self, chunk_size: int = CHUNK):
        """Yield (points, weights) blocks in lexicographic multi-index order."""
        n = self.n
        for start in range(0, n, chunk_size):
            yield grid_chunk(self.base.nodes, self.base.weights, self.d, start, min(chunk_size, n - start))

    def __call__(self, f, **kwargs) -> float:
        return evaluate(self, f, **kwargs)


def product_rule(base: Rule1D, d: int) -> ProductRule:
    return ProductRule(base, d)


def evaluate(
    pr: ProductRule,
    f: Callable,
    *,
    vectorized: bool = False,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
    chunk_size: int = CHUNK,
) -> float:
    """Apply the product rule to ``f``.

    Parameters
    ----------
    pr : ProductRule
    f : callable
        With ``vectorized=False`` it is called once per node with a length-d
        array. With ``vectorized=True`` it receives a (k, d) array and must
        return k values.
    cap : int
        Maximum number of nodes; larger rules raise ``TooManyNodesError``.
    workers : int
        Threads used to process chunks. Does not change the result.
    """
    n = pr.n
    if n > cap:
        raise TooManyNodesError(pr.m, pr.d, cap)
    starts = range(0, n, chunk_size)

    def partial(start):
        pts, wts = grid_chunk(pr.base.nodes, pr.base.weights, pr.d, start, min(chunk_size, n - start))
        if vectorized:
            vals = np.asarray(f(pts), dtype=np.float64)
            if vals.shape != (pts.shape[0],):
                raise ValueError(f"vectorized integrand returned shape {vals.shape}, expected ({pts.shape[0]},)")
        else:
            vals = np.fromiter((f(p) for p in pts), dtype=np.float64, count=pts.shape[0])
        return math.fsum(wts * vals)

    if workers <= 1 or len(starts) == 1:
        partials = [partial(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(partial, starts))
    return math.fsum(partials)


def haber_factor(A: float, d: int) -> float:
    """sum_{j=0}^{d-1} A^j; equals d for positive rules (A = 1)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if A < 0:
        raise ValueError(f"A must be nonnegative, got {A}")
    if A == 1:
        return float(d)
    return math.fsum(A**j for j in range(d))


def product_error_bound(e1: float, A: float, d: int) -> float:
    """Worst-case error bound of the d-fold product rule from its 1-d bound ``e1``."""
    if e1 < 0:
        raise ValueError(f"e1 must be nonnegative, got {e1}")
    return haber_factor(A, d) * e1
