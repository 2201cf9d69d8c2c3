"""Black-box sub-problem solvers and exhaustive oracles."""

from .exact import solve_ckc_exact, solve_conkc_exact, solve_exact
from .local_search import solve_cfl_local_search
from .rounding import round_confl, solve_confl, steiner_over

__all__ = ["solve_exact", "solve_ckc_exact", "solve_conkc_exact", "solve_cfl_local_search",
           "round_confl", "solve_confl", "steiner_over"]
