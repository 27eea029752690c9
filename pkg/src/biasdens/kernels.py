"""Backend selection for the cosine-basis hot loops.

``cosine_moments(y, v, jmax)`` returns ``sum_l v[l] * phi_j(y[l])`` for
``j = 0..jmax`` and ``cosine_series(coeffs, x)`` returns
``sum_j coeffs[j] * phi_j(x)``.  The compiled extension is preferred; set
``BIASDENS_PURE_PYTHON=1`` before import to force the numpy versions.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("BIASDENS_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

cosine_moments = _impl.cosine_moments
cosine_series = _impl.cosine_series

__all__ = ["BACKEND", "cosine_moments", "cosine_series"]
