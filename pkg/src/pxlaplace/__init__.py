"""Weighted variable-exponent Sobolev spaces and the p(x)-Laplace Dirichlet problem on grids."""

from .energy import EnergyBreakdown, EnergyModel, Problem, energy, energy_gradient, weak_residual
from .fields import (
    ConditionReport,
    ExponentProfile,
    WeightProfile,
    check_embedding_hypotheses,
    check_jump_condition,
    check_log_holder,
    check_sobolev_embedding,
    check_weight_class,
    conjugate_exponent,
    dual_weight,
    sobolev_conjugate,
)
from .fieldspec import FieldExpr, evaluate, parse
from .mesh import GridFunction, Mesh, build_mesh, extend_by_zero, integrate, read_csv, write_csv
from .solvers import SolveConfig, SolveReport, solve_min, solve_mountain_pass
from .spaces import equivalent_norm, holder_pairing, luxemburg_norm, modular, sobolev_norm
from .verify import FieldConfig, SuiteReport

__version__ = "0.1.0"

__all__ = [
    "ConditionReport", "EnergyBreakdown", "EnergyModel", "ExponentProfile", "FieldConfig",
    "FieldExpr", "GridFunction", "Mesh", "Problem", "SolveConfig", "SolveReport", "SuiteReport",
    "WeightProfile", "build_mesh", "check_embedding_hypotheses", "check_jump_condition",
    "check_log_holder", "check_sobolev_embedding", "check_weight_class", "conjugate_exponent",
    "dual_weight", "energy", "energy_gradient", "equivalent_norm", "evaluate", "extend_by_zero",
    "holder_pairing", "integrate", "luxemburg_norm", "modular", "parse", "read_csv",
    "sobolev_conjugate", "sobolev_norm", "solve_min", "solve_mountain_pass", "weak_residual",
    "write_csv",
]
