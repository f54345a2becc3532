"""The compiled kernels and the numpy fallback agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from cubecert import _backend

compiled = _backend.compiled_kernels
python = _backend.python_kernels

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


@needs_compiled
@pytest.mark.parametrize("periodic", [False, True])
@pytest.mark.parametrize("d", [1, 3, 7])
def test_min_dist_identical(periodic, d):
    rng = np.random.default_rng(d)
    pts = rng.random((500, d)) * 1.4 - 0.2
    nodes = rng.random((37, d))
    np.testing.assert_array_equal(compiled.min_l1_dist(pts, nodes, periodic), python.min_l1_dist(pts, nodes, periodic))


@needs_compiled
@pytest.mark.parametrize("periodic", [False, True])
def test_hat_identical(periodic):
    rng = np.random.default_rng(3)
    nodes = rng.random((10, 2))
    # include points exactly at, and exactly rho away from, nodes
    pts = np.concatenate([rng.random((2000, 2)), nodes, nodes + [0.05, 0.0]])
    a = compiled.hat_values(pts, nodes, 0.05, periodic)
    b = python.hat_values(pts, nodes, 0.05, periodic)
    np.testing.assert_array_equal(a, b)
    assert np.all(a[2000:2010] == 0.0)


@needs_compiled
def test_grid_chunk_identical():
    rng = np.random.default_rng(0)
    nodes = np.sort(rng.random(5))
    weights = rng.random(5)
    for d, start, count in [(1, 0, 5), (3, 7, 50), (6, 1000, 4000)]:
        pa, wa = compiled.grid_chunk(nodes, weights, d, start, count)
        pb, wb = python.grid_chunk(nodes, weights, d, start, count)
        np.testing.assert_array_equal(pa, pb)
        np.testing.assert_array_equal(wa, wb)


@pytest.mark.parametrize("kernels", [python] + ([compiled] if compiled is not None else []))
def test_empty_node_set(kernels):
    pts = np.zeros((3, 2))
    empty = np.empty((0, 2))
    assert np.all(np.isinf(kernels.min_l1_dist(pts, empty, False)))
    assert np.all(kernels.hat_values(pts, empty, 0.1, False) == 1.0)


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")


def _verify_report(tmp_path, backend):
    out = tmp_path / f"{backend}.json"
    env = dict(os.environ, CUBECERT_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", "import sys, cubecert, cubecert.cli as c; "
         "print(cubecert.BACKEND, file=sys.stderr); sys.exit(c.main(sys.argv[1:]))",
         "verify", "--suite", "adversary", "--seed", "3", "--format", "json", "--output", str(out)],
        env=env, capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stderr.strip(), out.read_bytes()


@needs_compiled
def test_reports_identical_across_backends(tmp_path):
    name_py, py = _verify_report(tmp_path, "python")
    name_c, c = _verify_report(tmp_path, "cython")
    assert (name_py, name_c) == ("python", "cython")
    assert py == c
