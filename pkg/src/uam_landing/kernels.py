"""Backend selection for the hot numerical kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is used. Set ``UAM_LANDING_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("UAM_LANDING_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import fk, fk_batch, jacobian, observer_run, observer_update

    BACKEND = "python"
else:
    try:
        from ._kernels import fk, fk_batch, jacobian, observer_run, observer_update

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import fk, fk_batch, jacobian, observer_run, observer_update

        BACKEND = "python"

__all__ = ["BACKEND", "fk", "fk_batch", "jacobian", "observer_run", "observer_update"]
