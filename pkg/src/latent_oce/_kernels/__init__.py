"""Backend selection for the scalar special-function kernels.

Two interchangeable backends evaluate the same array functions:

* ``_numba``: scalar kernels compiled with ``numba.njit`` and looped over
  the flattened input.
* ``_numpy``: vectorised pure-array implementations (no compilation).

The numba backend is used when numba imports cleanly, unless the
``LATENT_OCE_DISABLE_NUMBA`` environment variable is set to a truthy value,
in which case ``numba_backend`` is ``None``. Tests and benchmarks that
compare the two import ``latent_oce._kernels._numba`` directly.
"""

import os

from . import _numpy as numpy_backend

_FLAG = os.environ.get("LATENT_OCE_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by LATENT_OCE_DISABLE_NUMBA")
    from . import _numba as numba_backend
except ImportError:
    numba_backend = None

USE_NUMBA = numba_backend is not None
backend = numba_backend if USE_NUMBA else numpy_backend
BACKEND_NAME = "numba" if USE_NUMBA else "numpy"

norm_cdf = backend.norm_cdf
norm_pdf = backend.norm_pdf
norm_ppf = backend.norm_ppf
owen_t = backend.owen_t
bvn_cdf = backend.bvn_cdf

__all__ = [
    "BACKEND_NAME",
    "USE_NUMBA",
    "backend",
    "numba_backend",
    "numpy_backend",
    "norm_cdf",
    "norm_pdf",
    "norm_ppf",
    "owen_t",
    "bvn_cdf",
]
