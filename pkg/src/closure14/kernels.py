"""Select the series evaluation kernel at import time.

The compiled extension is used when it was built; otherwise (or when the
environment variable ``CLOSURE14_PURE_PYTHON`` is set) the numpy fallback is
used.  Both share one contract, see :func:`closure14._pykernels.eval_batch`.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
eval_batch = _pykernels.eval_batch

if not os.environ.get("CLOSURE14_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        eval_batch = _ckernels.eval_batch
