"""Backend selection for the union-find sweeps.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Set ``CLUSTERPERC_BACKEND=python`` to force the fallback.
"""

import os

from . import _purekernels

BACKEND = "python"
bond_sweep = _purekernels.bond_sweep
site_sweep = _purekernels.site_sweep

if os.environ.get("CLUSTERPERC_BACKEND", "").lower() != "python":
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        bond_sweep = _kernels.bond_sweep
        site_sweep = _kernels.site_sweep

__all__ = ["BACKEND", "bond_sweep", "site_sweep"]
