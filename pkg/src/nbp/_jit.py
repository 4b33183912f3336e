"""Kernel compilation switch.

Hot scalar kernels (random variate generators, special functions,
coordinate-descent loops) are written in numba-compatible style and compiled
with ``numba.njit`` by default.  Setting the environment variable
``NBP_DISABLE_JIT=1`` (or running without numba installed) runs the *same*
source as plain Python over numpy scalars.  Both paths execute identical
arithmetic, so seeded streams are bit-for-bit reproducible across modes.
"""

import os
import warnings

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

JIT_ENABLED = numba is not None and os.environ.get("NBP_DISABLE_JIT", "0").lower() not in (
    "1",
    "true",
    "yes",
)

if JIT_ENABLED:

    def kernel(func):
        """Compile a scalar/loop kernel; nogil so replications can thread."""
        return numba.njit(cache=True, nogil=True)(func)

else:
    # The fallback wraps uint64 ops in numpy scalars, which emit spurious
    # RuntimeWarnings on intended wraparound.  errstate cannot be used inside
    # shared kernel source (numba rejects it), so silence only that message.
    warnings.filterwarnings(
        "ignore", message="overflow encountered", category=RuntimeWarning, module=r"nbp\."
    )

    def kernel(func):
        return func
