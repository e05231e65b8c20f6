"""Backend selection for the Hopf-Lax kernels.

The compiled extension is used when it imports; setting ``LOGSOB_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _hopflax_py

try:
    if os.environ.get("LOGSOB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _hopflax_ext as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _hopflax_py
    BACKEND = "python"

brute = _impl.brute
envelope_p2 = _impl.envelope_p2
monotone_dc = _impl.monotone_dc

BACKENDS = {"python": _hopflax_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl
