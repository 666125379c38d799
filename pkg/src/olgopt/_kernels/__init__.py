"""NLP evaluation kernels with a compiled core and a pure-python fallback.

The Cython extension is preferred when importable; set OLGOPT_BACKEND to
``python`` or ``cython`` to force a choice (forcing ``cython`` raises if the
extension is missing).
"""

import os

from . import _ref

_choice = os.environ.get("OLGOPT_BACKEND", "").strip().lower()

if _choice == "python":
    _impl = _ref
elif _choice == "cython":
    from . import _fast as _impl
else:
    try:
        from . import _fast as _impl
        if not hasattr(_impl, "eval_problem"):
            _impl = _ref
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND_NAME
pack_params = _ref.pack_params
forward_quantities = _impl.forward_quantities
eval_problem = _impl.eval_problem
weighted_gradient = _impl.weighted_gradient

reference = _ref
