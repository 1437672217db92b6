"""Kernel backend selection.

The compiled extension is preferred when it built; set DITHERLAB_BACKEND to
"python" or "native" to force one side (the benchmark does, and it is handy
when chasing discrepancies).
"""

import os

from . import _pure

_FORCED = os.environ.get("DITHERLAB_BACKEND", "").strip().lower()

if _FORCED == "python":
    _impl = _pure
    BACKEND = "python"
elif _FORCED == "native":
    from . import _native as _impl  # noqa: F401  (ImportError is the point)

    BACKEND = "native"
elif _FORCED:
    raise ValueError(
        f"DITHERLAB_BACKEND must be 'python' or 'native', got {_FORCED!r}")
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        _impl = _pure
        BACKEND = "python"

em_batch = _impl.em_batch
ggml_batch = _impl.ggml_batch
nonlinear_batch = _impl.nonlinear_batch
