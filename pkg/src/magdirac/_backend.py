"""Kernel backend selection.

The compiled extension is used when importable.  ``MAGDIRAC_BACKEND`` may be
set to ``python`` or ``compiled`` to force a choice.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load() -> tuple[ModuleType, str]:
    want = os.environ.get("MAGDIRAC_BACKEND", "").strip().lower()
    if want == "python":
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        if want == "compiled":
            raise
        return _kernels_py, "python"
    return _kernels, "compiled"


kernels, BACKEND = _load()


def get_kernels(name: str | None = None) -> ModuleType:
    """Return the kernel module ``name`` (``"python"``/``"compiled"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels  # type: ignore[attr-defined]
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
