"""Lie point symmetry augmentations for PDE data, pseudo-spectral solvers,
and a joint-embedding pretraining + evaluation pipeline."""

import os as _os

# Honor the worker cap before numpy configures its thread pools.
_cap = _os.environ.get("LPDE_THREADS")
if _cap:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _cap)

__version__ = "0.1.0"

from . import dataio, evaluation, residuals, solvers, spectral, ssl, symmetry
from .fields import EquationSpec, InitialConditionParams, SolutionField
from .grid import Grid1D, Grid2D

__all__ = [
    "EquationSpec",
    "Grid1D",
    "Grid2D",
    "InitialConditionParams",
    "SolutionField",
    "__version__",
    "dataio",
    "evaluation",
    "residuals",
    "solvers",
    "spectral",
    "ssl",
    "symmetry",
]
