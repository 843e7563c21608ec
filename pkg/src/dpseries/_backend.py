"""Select the compiled kernels when available, else the NumPy fallback.

Set ``DPSERIES_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if not os.environ.get("DPSERIES_PURE_PYTHON"):
    try:
        from ._kernels import circular_convolve, gram_lambda_max, interp_fill

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import circular_convolve, gram_lambda_max, interp_fill  # noqa: F811

__all__ = ["BACKEND", "circular_convolve", "gram_lambda_max", "interp_fill"]
