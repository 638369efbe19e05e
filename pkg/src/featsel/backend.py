"""Kernel backend selection: compiled core with a numpy fallback.

The hot inner loops (bulk normal generation, per-column moment sweeps, and
Gaussian discriminant fit/predict) exist twice: as a Cython extension
(``featsel._core``) and as numpy fallbacks (``featsel._kernels_py``).  At
import time the compiled core is chosen when present; set the environment
variable ``FEATSEL_BACKEND`` to ``c`` or ``python`` to force one side
(``c`` raises if the extension is missing).

``force()`` swaps the active backend at runtime; it exists for the
cross-backend tests and the benchmark, not for regular use.  Results are
deterministic within a backend; across backends, RNG streams and column
moments are bit-identical while discriminant scores agree to roundoff.
"""

from __future__ import annotations

import os

from . import _kernels_py

_active = None


def _load_compiled():
    from . import _core  # noqa: PLC0415 -- deferred, may not be built

    return _core


def _select_initial():
    choice = os.environ.get("FEATSEL_BACKEND", "auto").lower()
    if choice == "python":
        return _kernels_py
    if choice == "c":
        return _load_compiled()
    if choice != "auto":
        raise RuntimeError(
            f"FEATSEL_BACKEND must be 'auto', 'c' or 'python', got {choice!r}"
        )
    try:
        return _load_compiled()
    except ImportError:
        return _kernels_py


def get():
    """Return the active kernel module."""
    global _active
    if _active is None:
        _active = _select_initial()
    return _active


def name() -> str:
    """Name of the active backend: ``"c"`` or ``"python"``."""
    return get().name


def force(which: str):
    """Swap the active backend (test/benchmark hook). Returns the module."""
    global _active
    if which == "python":
        _active = _kernels_py
    elif which == "c":
        _active = _load_compiled()
    else:
        raise ValueError(f"unknown backend {which!r}")
    return _active


def available() -> list[str]:
    """Backends importable in this environment."""
    out = []
    try:
        _load_compiled()
        out.append("c")
    except ImportError:
        pass
    out.append("python")
    return out
