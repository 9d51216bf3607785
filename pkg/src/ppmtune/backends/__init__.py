"""Backend selection.

The numba backend is used when available; set PPMTUNE_BACKEND=numpy to
force the pure-numpy fallback (or =numba to require the compiled path).
"""

import os

_requested = os.environ.get("PPMTUNE_BACKEND", "").strip().lower()

if _requested == "numpy":
    from . import _numpy as _impl
elif _requested == "numba":
    from . import _numba as _impl
elif _requested == "":
    try:
        from . import _numba as _impl
    except ImportError:
        from . import _numpy as _impl
else:
    raise RuntimeError(
        "PPMTUNE_BACKEND must be 'numba' or 'numpy', got %r" % _requested)

BACKEND_NAME = _impl.BACKEND_NAME
PROB_EPS = _impl.PROB_EPS
SEPARATION_COEF = _impl.SEPARATION_COEF
STATUS_OK = _impl.STATUS_OK
STATUS_RIDGE_RETRY = _impl.STATUS_RIDGE_RETRY
STATUS_MEAN_FALLBACK = _impl.STATUS_MEAN_FALLBACK
STATUS_SEPARATION = _impl.STATUS_SEPARATION

fit_irls = _impl.fit_irls
ppm_predict_multi = _impl.ppm_predict_multi
loess_smooth_values = _impl.loess_smooth_values
