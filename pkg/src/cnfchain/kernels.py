"""Kernel backend selection.

The compiled Cython extension is used when importable; otherwise the pure
Python implementations take over.  Set ``CNFCHAIN_PURE_PYTHON=1`` to force
the fallback.
"""
import os

if os.environ.get("CNFCHAIN_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import chain_walk, ctmc_walk, mgc_sojourn, threshold_mass
    BACKEND = "python"
else:
    try:
        from ._ckernels import chain_walk, ctmc_walk, mgc_sojourn, threshold_mass
        BACKEND = "cython"
    except ImportError:
        from ._pykernels import chain_walk, ctmc_walk, mgc_sojourn, threshold_mass
        BACKEND = "python"

__all__ = ["BACKEND", "chain_walk", "ctmc_walk", "mgc_sojourn", "threshold_mass"]
