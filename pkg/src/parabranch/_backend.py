"""Backend selection: compiled extension if built, numpy fallback otherwise.

Set PARABRANCH_BACKEND=python or =compiled to force a lane (forcing
`compiled` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _pathops

_forced = os.environ.get("PARABRANCH_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _pathops
elif _forced == "compiled":
    from . import _core as _impl  # noqa: F401  (ImportError is the intended failure)
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pathops

walk_levy = _impl.walk_levy
BACKEND_NAME = _impl.BACKEND_NAME


def backend_name() -> str:
    """Which lane is active: 'compiled' or 'python'."""
    return BACKEND_NAME
