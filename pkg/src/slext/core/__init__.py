"""Potentials, initial-value solvers, Wronskians and fundamental systems."""

from .ivp import (DEFAULT_CONTROLS, IvpControls, Method, extend_trajectory, fundamental_system,
                  integrate_endpoint, solve_ivp)
from .potential import (HALF_LINE, Constant, Interval, InverseSquare, Potential, Sum, Tabulated,
                        evaluate_potential, potential_from_dict, potential_to_dict)
from .solutions import (Combination, FrobeniusSolution, Solution, Trajectory, frobenius_pair,
                        wronskian)

__all__ = [
    "DEFAULT_CONTROLS", "IvpControls", "Method", "extend_trajectory", "fundamental_system",
    "integrate_endpoint", "solve_ivp", "HALF_LINE", "Constant", "Interval", "InverseSquare",
    "Potential", "Sum", "Tabulated", "evaluate_potential", "potential_from_dict",
    "potential_to_dict", "Combination", "FrobeniusSolution", "Solution", "Trajectory",
    "frobenius_pair", "wronskian",
]
