"""Backend selection for the convolution kernels.

The compiled extension is used when it imports; setting
``SEMSTEG_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _im2col_py

BACKEND = "python"
im2col = _im2col_py.im2col
col2im = _im2col_py.col2im

if os.environ.get("SEMSTEG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _im2col as _compiled
    except ImportError:  # extension not built
        pass
    else:
        im2col = _compiled.im2col
        col2im = _compiled.col2im
        BACKEND = "cython"
