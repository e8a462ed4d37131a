"""Pump schedules alpha_n(t) and the initial-state recipes of the quench families.

All protocols start from a spatially homogeneous gas with Gaussian momenta
and drive the pair (alpha1, alpha2) to its final value; the detuning is held
constant throughout, so the target stationary temperature never changes
during a run.  Durations are in 1/omega_r like every internal time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import EnsembleState, SystemParams
from .units import TWO_PI

__all__ = [
    "SuddenQuench",
    "LinearRamp",
    "TwoStepQuench",
    "TemperatureQuench",
    "Protocol",
    "sample_initial_state",
    "alpha_at",
]

DEFAULT_EPSILON = 1e-3  # "vanishingly small" initial pump


def _check_pair(name, value):
    if len(value) != 2 or min(value) < 0:
        raise ValueError(f"{name} must be a pair of non-negative reals")
    return float(value[0]), float(value[1])


@dataclass(frozen=True)
class SuddenQuench:
    """Instantaneous switch to ``alpha_final`` at t = 0.

    ``alpha_initial`` only sets the (deep paramagnetic) state the ensemble is
    sampled from; the equations of motion see ``alpha_final`` from t = 0 on.
    """

    alpha_final: tuple[float, float]
    alpha_initial: tuple[float, float] = (DEFAULT_EPSILON, DEFAULT_EPSILON)

    def __post_init__(self):
        object.__setattr__(self, "alpha_final", _check_pair("alpha_final", self.alpha_final))
        object.__setattr__(self, "alpha_initial", _check_pair("alpha_initial", self.alpha_initial))

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        a1 = np.where(t < 0.0, self.alpha_initial[0], self.alpha_final[0])
        a2 = np.where(t < 0.0, self.alpha_initial[1], self.alpha_final[1])
        return (float(a1), float(a2)) if a1.ndim == 0 else (a1, a2)

    def kernel_coeffs(self):
        return 0, self.alpha_final[0], self.alpha_final[1], 0.0, 0.0, 0.0

    def initial_temperature(self, params: SystemParams) -> float:
        return params.temperature


@dataclass(frozen=True)
class LinearRamp:
    """Linear sweep alpha_n(t) = epsilon + alpha_final_n * t / ramp_time on [0, tau].

    Constant at ``alpha_final`` afterwards; the sudden quench is the
    ramp_time -> 0 limit.
    """

    alpha_final: tuple[float, float]
    ramp_time: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "alpha_final", _check_pair("alpha_final", self.alpha_final))
        if self.ramp_time < 0:
            raise ValueError("ramp_time must be non-negative")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        tau = self.ramp_time
        if tau == 0.0:
            frac = np.ones_like(t)
        else:
            frac = np.clip(t / tau, 0.0, None)
        ramping = (t < tau) if tau > 0 else np.zeros_like(t, dtype=bool)
        a1 = np.where(ramping, self.epsilon + self.alpha_final[0] * frac, self.alpha_final[0])
        a2 = np.where(ramping, self.epsilon + self.alpha_final[1] * frac, self.alpha_final[1])
        return (float(a1), float(a2)) if a1.ndim == 0 else (a1, a2)

    def kernel_coeffs(self):
        return 1, self.alpha_final[0], self.alpha_final[1], self.epsilon, self.epsilon, self.ramp_time

    def initial_temperature(self, params: SystemParams) -> float:
        return params.temperature


@dataclass(frozen=True)
class TwoStepQuench:
    """Quench to ``alpha_intermediate`` at t = 0, then to ``alpha_final`` at t = dwell_time."""

    alpha_intermediate: tuple[float, float]
    alpha_final: tuple[float, float]
    dwell_time: float

    def __post_init__(self):
        object.__setattr__(self, "alpha_intermediate",
                           _check_pair("alpha_intermediate", self.alpha_intermediate))
        object.__setattr__(self, "alpha_final", _check_pair("alpha_final", self.alpha_final))
        if self.dwell_time < 0:
            raise ValueError("dwell_time must be non-negative")

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        dwell = t < self.dwell_time
        a1 = np.where(dwell, self.alpha_intermediate[0], self.alpha_final[0])
        a2 = np.where(dwell, self.alpha_intermediate[1], self.alpha_final[1])
        return (float(a1), float(a2)) if a1.ndim == 0 else (a1, a2)

    def kernel_coeffs(self):
        return (2, self.alpha_final[0], self.alpha_final[1],
                self.alpha_intermediate[0], self.alpha_intermediate[1], self.dwell_time)

    def initial_temperature(self, params: SystemParams) -> float:
        return params.temperature


@dataclass(frozen=True)
class TemperatureQuench:
    """Sudden quench to ``alpha_final`` from a gas prepared at temperature
    ``t_initial_over_t0`` * T_0 (T_0 = kappa/2), instead of the stationary
    temperature of the detuning.
    """

    alpha_final: tuple[float, float]
    t_initial_over_t0: float

    def __post_init__(self):
        object.__setattr__(self, "alpha_final", _check_pair("alpha_final", self.alpha_final))
        if self.t_initial_over_t0 <= 0:
            raise ValueError("initial temperature must be positive")

    def alpha_at(self, t):
        t = np.asarray(t, dtype=float)
        a1 = np.full_like(t, self.alpha_final[0])
        a2 = np.full_like(t, self.alpha_final[1])
        return (float(a1), float(a2)) if a1.ndim == 0 else (a1, a2)

    def kernel_coeffs(self):
        return 0, self.alpha_final[0], self.alpha_final[1], 0.0, 0.0, 0.0

    def initial_temperature(self, params: SystemParams) -> float:
        return self.t_initial_over_t0 * params.t_min


Protocol = SuddenQuench | LinearRamp | TwoStepQuench | TemperatureQuench


def alpha_at(protocol: Protocol, t):
    """Pump pair (alpha1(t), alpha2(t)); accepts scalars or arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("protocol times must be non-negative")
    return protocol.alpha_at(t)


def sample_initial_state(
    protocol: Protocol, params: SystemParams, rng: np.random.Generator
) -> EnsembleState:
    """Draw the homogeneous thermal state the protocol starts from.

    Positions are uniform on [0, 2*pi) (deep paramagnetic phase) and momenta
    Gaussian with var(p) = m k_B T_ini = T_ini/2 in recoil units, where T_ini
    is the stationary temperature of the detuning except for temperature
    quenches, which override it.
    """
    t_ini = protocol.initial_temperature(params)
    var_p = 0.5 * t_ini
    if var_p <= 1.0:
        warnings.warn(
            "initial momentum spread is at or below one photon recoil "
            f"(var(p) = {var_p:.3g}); the semi-classical description assumes "
            "a momentum width far above hbar*k",
            stacklevel=2,
        )
    u = rng.uniform(0.0, TWO_PI, params.n_atoms)
    p = rng.normal(0.0, math.sqrt(var_p), params.n_atoms)
    return EnsembleState(time=0.0, positions=u, momenta=p)
