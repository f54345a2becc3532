"""Select the kernel backend at import time.

The compiled extension is used when importable. Setting the environment
variable ``CUBECERT_BACKEND=python`` forces the numpy fallback.
"""

import os

from . import _kernels_py

python_kernels = _kernels_py
compiled_kernels = None

try:
    from . import _kernels as compiled_kernels  # type: ignore[no-redef]
except ImportError:  # pragma: no cover - depends on build
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("CUBECERT_BACKEND", "").lower() != "python":
    kernels = compiled_kernels
    BACKEND = "cython"
else:
    kernels = _kernels_py
    BACKEND = "python"

min_l1_dist = kernels.min_l1_dist
hat_values = kernels.hat_values
grid_chunk = kernels.grid_chunk
