"""Select the compiled kernel extension, falling back to pure Python."""

import os

from cvpol import _kernels_py

kernels = _kernels_py
COMPILED = False

if os.environ.get("CVPOL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from cvpol import _kernels as kernels  # noqa: F811

        COMPILED = True
    except ImportError:
        pass

BACKEND = "cython" if COMPILED else "python"
