"""Distributed constrained formation tracking for underactuated
underwater vehicle fleets: vehicle model, consensus protocol, online
gain optimization, five inner-loop controllers, and a deterministic
simulation engine."""

from .consensus import FormationSpec, VirtualCommand, consensus_error, \
    extract_commands, virtual_law
from .controllers import (ControllerGains, InnerLoop, ShuntingParams,
                          ShuntingState, Variant, check_stability_conditions)
from .dynamics import (ControlInput, DisturbanceVector, SphericalSpeed,
                       VehicleParams, VehicleState, integrate_step,
                       spherical_transform, state_derivative,
                       transformed_kinematics)
from .engine import SimLog, disturbance_at, run
from .gainopt import (GainQpProblem, GainQpSolution, OptimizerConfig,
                      SolveStatus, apply_solution, build_problem, solve)
from .graph import FleetTopology, neighbor_view, validate_topology
from .metrics import MetricsReport, compute_metrics
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"

__all__ = [
    "ControlInput", "ControllerGains", "DisturbanceVector", "FleetTopology",
    "FormationSpec", "GainQpProblem", "GainQpSolution", "InnerLoop",
    "MetricsReport", "OptimizerConfig", "Scenario", "ShuntingParams",
    "ShuntingState", "SimLog", "SolveStatus", "SphericalSpeed", "Variant",
    "VehicleParams", "VehicleState", "VirtualCommand", "apply_solution",
    "build_problem", "check_stability_conditions", "compute_metrics",
    "consensus_error", "disturbance_at", "extract_commands", "integrate_step",
    "load_scenario", "neighbor_view", "run", "solve", "spherical_transform",
    "state_derivative", "transformed_kinematics", "validate_topology",
    "virtual_law",
]
