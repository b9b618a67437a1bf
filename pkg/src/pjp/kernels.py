"""Kernel selection: the compiled extension when built, else pure Python.

Set ``PJP_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("PJP_PURE_PYTHON"):
    from pjp._kernels_py import *  # noqa: F401,F403
    from pjp import _kernels_py as impl
    COMPILED = False
else:
    try:
        from pjp._kernels import *  # noqa: F401,F403
        from pjp import _kernels as impl
        COMPILED = True
    except ImportError:
        from pjp._kernels_py import *  # noqa: F401,F403
        from pjp import _kernels_py as impl
        COMPILED = False

BACKEND = "compiled" if COMPILED else "python"
