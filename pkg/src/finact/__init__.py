"""Simulation and design toolkit for a magnetically actuated elastic fin."""

__version__ = "0.1.0"

from .model import (PhysicalParams, State, SystemParams, magnetic_force, normalize, rhs,  # noqa: E402
                    table1_params, total_energy)
from .equilibria import (EquilibriumReport, FixedPoint, classify, critical_check,  # noqa: E402
                         equilibrium_residual, find_fixed_points, sweep_asymmetry)
from .sim import IntegratorConfig, Trajectory, integrate, phase_portrait  # noqa: E402
from .spectral import (FrequencyTable, Spectrum, build_frequency_table, dominant_frequency,  # noqa: E402
                       lookup, power_spectrum)
from .control import (PidGains, PidState, ReferencePlan, closed_loop, max_control_force,  # noqa: E402
                      pid_step, plan_reference)
from .design import (BeamSpec, MagnetSpec, SolenoidSpec, beam_stiffness, damping_from_Q,  # noqa: E402
                     magnet_constant, solenoid_geometry_factor, solenoid_turns)
