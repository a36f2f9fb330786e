"""Select the compiled kernels when available, else the numpy fallback.

Set ``GMEMI_PURE_PYTHON=1`` to force the fallback (used by the tests and the
benchmark to exercise both paths).
"""

import os

from . import _kernels_py

if os.environ.get("GMEMI_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _kernels_py

BACKEND = kernels.NAME
