"""Facility location with connectivity, capacity and penalty constraints."""

from .combine import (BoundCertificate, WitnessEdge, combine_connected_capacitated, combine_kcenter,
                      combine_penalty, compose_guarantee)
from .errors import FaclocError
from .instance import (ClientSpec, FacilitySpec, GeneratorConfig, Instance, ProblemKind, drop_capacities,
                       drop_connectivity, drop_penalties, generate_euclidean, load_instance, make_instance,
                       save_instance)
from .pipelines import PipelineResult, solve
from .reductions import cpfl_to_cfl, lift_cfl_solution, solve_conpfl
from .solution import CostBreakdown, Solution, load_solution, save_solution
from .verify import ValidationPolicy, certify_bound, evaluate, validate

__version__ = "0.1.0"
