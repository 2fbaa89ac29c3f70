"""Kernel backend selection.

The hot inner loops (3x3 convolution, 2x2 pooling, the distance transform)
exist twice: numba-jitted scalar loops and a vectorized pure-numpy fallback.
The numba path is chosen when numba imports cleanly, unless the environment
variable DTSTYLE_NUMBA is set to 0/false/no, which forces the numpy path.

Both backends implement the same function signatures, so everything above
this module is backend-agnostic. `benchmarks/bench_kernels.py` times one
against the other.
"""

import os

ENV_FLAG = "DTSTYLE_NUMBA"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def _env_allows_numba() -> bool:
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "never")


USE_NUMBA = HAS_NUMBA and _env_allows_numba()


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
