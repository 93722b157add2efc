"""Backend selection for the hot kernels.

The compiled ``_core`` extension is used when importable; otherwise the numpy
versions in ``_fallback`` take over. Set ``REEFGPR_PURE_PYTHON=1`` to force
the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if not os.environ.get("REEFGPR_PURE_PYTHON"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

smo_solve = _impl.smo_solve
best_split = _impl.best_split
pair_step = _impl.pair_step
dual_objective = _impl.dual_objective


def backends() -> dict:
    """Every importable backend by name, for benchmarks and cross-checks."""
    out = {"python": _fallback}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:  # pragma: no cover
        pass
    return out
