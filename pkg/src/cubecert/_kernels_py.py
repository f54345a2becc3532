"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

SNAP = 1e-12

# caps the (points x nodes) temporaries at a few MB
_BLOCK = 1 << 21


def min_l1_dist(points, nodes, periodic=False):
    x = np.ascontiguousarray(points, dtype=np.float64)
    p = np.ascontiguousarray(nodes, dtype=np.float64)
    k, d = x.shape
    n = p.shape[0]
    out = np.full(k, np.inf)
    if n == 0 or k == 0:
        return out
    step = max(1, _BLOCK // n)
    for lo in range(0, k, step):
        xb = x[lo:lo + step]
        acc = np.zeros((xb.shape[0], n))
        for j in range(d):
            t = np.abs(xb[:, j, None] - p[None, :, j])
            if periodic:
                t = np.fmod(t, 1.0)
                t = np.where(t > 0.5, 1.0 - t, t)
            acc += t
        out[lo:lo + step] = acc.min(axis=1)
    return out


def hat_values(points, nodes, rho, periodic=False):
    excess = min_l1_dist(points, nodes, periodic) - rho
    out = excess / rho
    out[excess >= rho * (1.0 - SNAP)] = 1.0
    out[excess <= rho * SNAP] = 0.0
    return out


def grid_chunk(nodes, weights, d, start, count):
    xs = np.asarray(nodes, dtype=np.float64)
    ws = np.asarray(weights, dtype=np.float64)
    m = xs.shape[0]
    lin = np.arange(start, start + count, dtype=np.int64)
    digits = np.empty((count, d), dtype=np.int64)
    for j in range(d - 1, -1, -1):
        lin, digits[:, j] = np.divmod(lin, m)
    pts = xs[digits]
    wts = np.ones(count)
    for j in range(d):
        wts = wts * ws[digits[:, j]]
    return pts, wts
