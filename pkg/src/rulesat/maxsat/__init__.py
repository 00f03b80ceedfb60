from .cdcl import Solver, SolverTimeout, solve_sat
from .engine import (HARD_UNSAT, OPTIMAL, BackendConfig, EmbeddedTimeout, ExternalSolverError,
                     ExternalSolverTimeout, MalformedSolverOutput, SolveResult, SolverError,
                     brute_force, solve, verify)
from .wcnf import emit_wcnf, parse_external_result, parse_wcnf

__all__ = [
    "Solver", "SolverTimeout", "solve_sat", "HARD_UNSAT", "OPTIMAL", "BackendConfig",
    "EmbeddedTimeout", "ExternalSolverError", "ExternalSolverTimeout", "MalformedSolverOutput",
    "SolveResult", "SolverError", "brute_force", "solve", "verify", "emit_wcnf",
    "parse_external_result", "parse_wcnf",
]
