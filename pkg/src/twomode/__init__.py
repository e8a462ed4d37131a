"""Semi-classical self-organization of atoms in a two-mode optical cavity.

Ensemble integration of the coupled Langevin equations for atoms scattering
laser light into two commensurate cavity modes, under sudden, ramped,
two-step and temperature quench protocols, plus the mean-field free-energy
solver that predicts the stationary phases the dynamics relaxes into.
"""

__version__ = "0.1.0"

from .ensemble import GridSpec, RunSpec, run_ensemble, trajectory_rng
from .fieldmodel import FieldState, run_field_trajectory, step_field
from .integrators import IntegratorConfig, run_trajectory, step
from .meanfield import (
    find_minima,
    intensive_free_energy,
    landscape,
    phase_diagram,
    steady_observables,
)
from .model import (
    EnsembleState,
    SystemParams,
    adiabatic_force,
    alpha_from_pump,
    beta_of,
    corrected_temperature,
    effective_hamiltonian,
    order_parameter,
    pump_from_alpha,
    retardation_force,
    sample_adiabatic_noise,
    temperature_of,
    trap_frequency,
)
from .protocols import (
    LinearRamp,
    SuddenQuench,
    TemperatureQuench,
    TwoStepQuench,
    alpha_at,
    sample_initial_state,
)

__all__ = [
    "__version__",
    "SystemParams", "EnsembleState", "order_parameter", "beta_of",
    "temperature_of", "alpha_from_pump", "pump_from_alpha", "adiabatic_force",
    "retardation_force", "sample_adiabatic_noise", "effective_hamiltonian",
    "trap_frequency", "corrected_temperature",
    "IntegratorConfig", "step", "run_trajectory",
    "FieldState", "step_field", "run_field_trajectory",
    "SuddenQuench", "LinearRamp", "TwoStepQuench", "TemperatureQuench",
    "alpha_at", "sample_initial_state",
    "intensive_free_energy", "find_minima", "steady_observables",
    "landscape", "phase_diagram",
    "GridSpec", "RunSpec", "run_ensemble", "trajectory_rng",
]
