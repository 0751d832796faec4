"""Pick the compiled kernels when built, else the pure-Python fallback.

Set ``ROSTERLEARN_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

kernels = _fallback
NAME = "python"

if os.environ.get("ROSTERLEARN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        NAME = "cython"
    except ImportError:
        pass


def get(name=None):
    """Kernel module by name (``"cython"`` / ``"python"``), default the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
