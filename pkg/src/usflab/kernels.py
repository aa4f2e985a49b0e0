"""Backend selection for the hot kernels.

The compiled extension is used when it imports; ``USFLAB_PURE_PYTHON=1``
forces the fallback.  :func:`use_backend` switches at runtime (for tests and
the benchmark).
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_active: ModuleType = _kernels_py
if _compiled is not None and os.environ.get("USFLAB_PURE_PYTHON", "") not in ("1", "true"):
    _active = _compiled


class RngHandle:
    """Random stream passed to the kernels.

    The compiled kernel reads doubles straight from ``bit_generator``; the
    Python kernel buffers ``generator.random`` blocks in ``uniforms``.  Both
    consume the same sequence.
    """

    __slots__ = ("generator", "bit_generator", "uniforms")

    def __init__(self, generator):
        self.generator = generator
        self.bit_generator = generator.bit_generator
        self.uniforms = None


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def compiled_available() -> bool:
    return _compiled is not None


def use_backend(name: str) -> None:
    global _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    elif name == "python":
        _active = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")


def wilson(*args):
    return _active.wilson(*args)


def subtree(parent, x):
    return _active.subtree(parent, x)
