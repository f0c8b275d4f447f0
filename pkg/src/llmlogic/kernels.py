"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``LLMLOGIC_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os
from types import ModuleType

from . import _fallback

log = logging.getLogger(__name__)


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()

if _compiled is not None and not os.environ.get("LLMLOGIC_PURE_PYTHON"):
    _active: ModuleType = _compiled
    BACKEND = "compiled"
else:
    _active = _fallback
    BACKEND = "python"
    if _compiled is None:
        log.debug("compiled kernels unavailable; using pure-Python fallback")

FLAG_FALSE = 1
FLAG_GOAL = 2


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module by name (``compiled`` or ``python``); default is the active one."""
    if name is None:
        return _active
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")
