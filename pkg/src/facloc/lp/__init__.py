"""Linear programming: simplex engine, facility-location LP models and the
cutting-plane loop for the connectivity cut family."""

from .simplex import LpResult, simplex
from .model import (Constraint, FractionalSolution, LpModel, build_confl_lp, build_conpfl_lp,
                    solve_lp, write_lp)
from .cuts import (ConnectivityCut, CutPool, add_all_cuts, separate_cuts, separation_sweep,
                   solve_with_cuts)

__all__ = [
    "LpResult", "simplex", "Constraint", "FractionalSolution", "LpModel", "build_confl_lp",
    "build_conpfl_lp", "solve_lp", "write_lp", "ConnectivityCut", "CutPool", "add_all_cuts",
    "separate_cuts", "separation_sweep", "solve_with_cuts",
]
