"""Lattice workbench for Haydys monopoles on R^3."""
import os as _os

# the bundled TBB is too old for numba; pick OpenMP before numba loads
_os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
