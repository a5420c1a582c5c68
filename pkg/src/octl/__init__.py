"""Bounded controls for a spectrally truncated Schrödinger equation.

Solvers for the optimal target, norm and time problems, the minimal-time and
minimal-norm null-control problems, and executable checks that these problems
share their optimal controls.
"""
__version__ = "0.1.0"

from .spectral_model import (ConfigError, Model, ModelConfig, build_model, coupling_matrix,
                             duhamel_interval, free_propagate)
from .dynamics import (ControlSignal, Trajectory, control_distance, interval_pairings,
                       pairing_residual, solve_adjoint, solve_forward, terminal_state)
from .op_solver import OpProblem, OpSolution, r_of, solve_op, verify_certificates
from .value_maps import (InfeasibleError, MapSample, ValueMapResult, latest_feasible_tau, m_tau,
                         sample_map, solve_nocp, solve_np, solve_tocp, solve_tp)
from .harness import (EquivalenceReport, check_time_norm, check_target_norm_time,
                      check_time_reversal, check_uniqueness)

__all__ = [
    "ConfigError", "Model", "ModelConfig", "build_model", "coupling_matrix",
    "duhamel_interval", "free_propagate",
    "ControlSignal", "Trajectory", "control_distance", "interval_pairings",
    "pairing_residual", "solve_adjoint", "solve_forward", "terminal_state",
    "OpProblem", "OpSolution", "r_of", "solve_op", "verify_certificates",
    "InfeasibleError", "MapSample", "ValueMapResult", "latest_feasible_tau", "m_tau",
    "sample_map", "solve_nocp", "solve_np", "solve_tocp", "solve_tp",
    "EquivalenceReport", "check_time_norm", "check_target_norm_time",
    "check_time_reversal", "check_uniqueness",
]
