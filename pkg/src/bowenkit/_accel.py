"""Optional numba acceleration layer.

Every hot kernel in :mod:`bowenkit.kernels` is written as a plain Python
function and decorated with :func:`njit` from this module.  When numba is
importable and the environment variable ``BOWENKIT_DISABLE_JIT`` is unset
(or set to ``0``/``false``/``no``/``""``), the decorator compiles the
function.  Otherwise the decorator is the identity and the same source runs
as pure numpy/Python, so results are identical either way, only slower.
"""

from __future__ import annotations

import os

DISABLE_FLAG = "BOWENKIT_DISABLE_JIT"


def _jit_enabled() -> bool:
    raw = os.environ.get(DISABLE_FLAG, "").strip().lower()
    if raw not in ("", "0", "false", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


JIT_ENABLED = _jit_enabled()

if JIT_ENABLED:
    # the default TBB layer warns on older TBB builds; workqueue is always
    # available and this package gains nothing from nested threading
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    import numba

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    prange = numba.prange

    def set_threads(n: int) -> None:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))

else:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap

    prange = range

    def set_threads(n: int) -> None:
        pass
