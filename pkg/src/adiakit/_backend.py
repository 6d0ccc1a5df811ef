"""Backend selection: compiled extension if available, pure Python otherwise.

``ADIAKIT_BACKEND`` forces the choice ("compiled" or "python"); anything else
raises at import so misconfiguration is loud.
"""

import os

_forced = os.environ.get("ADIAKIT_BACKEND")

if _forced == "python":
    from . import _kernels_py as kernels
elif _forced == "compiled":
    from . import _kernels as kernels  # type: ignore[no-redef]
elif _forced is None:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]
else:
    raise ImportError(f"unknown ADIAKIT_BACKEND={_forced!r}")


def backend_name() -> str:
    """Name of the active kernel backend ("compiled" or "python")."""
    return kernels.BACKEND
