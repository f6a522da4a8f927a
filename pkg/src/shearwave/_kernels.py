"""Select the Riccati integrator backend at import time.

The compiled extension is used when it was built; ``SHEARWAVE_PURE=1`` forces
the pure-Python fallback.  Both expose ``integrate`` and ``surface_many``.
"""

import os

from . import _riccati_py

BACKEND = "python"
_impl = _riccati_py

if not os.environ.get("SHEARWAVE_PURE"):
    try:
        from . import _riccati_ext as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:
        pass

integrate = _impl.integrate
surface_many = _impl.surface_many

STATUS_TEXT = {
    _riccati_py.OK: "ok",
    _riccati_py.MAX_STEPS: "step budget exhausted",
    _riccati_py.STEP_UNDERFLOW: "step size underflow",
    _riccati_py.NON_FINITE: "non-finite state",
}


def backends():
    """Mapping name -> module for every importable backend."""
    out = {"python": _riccati_py}
    try:
        from . import _riccati_ext
        out["compiled"] = _riccati_ext
    except ImportError:
        pass
    return out
