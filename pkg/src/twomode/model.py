"""Core model: parameters, state, forces, diffusion and order parameters.

The gas couples to two standing-wave cavity modes cos(u) and cos(2u) driven
by transverse lasers with dimensionless pump strengths (alpha1, alpha2).
After adiabatic elimination of the fields the atoms obey coupled Langevin
equations with a conservative long-range force, a collective retardation
(friction) force and a correlated multiplicative diffusion that share the
rank-1 mode structure sin(n u_j).

All quantities follow the recoil-unit convention of :mod:`twomode.units`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import DEFAULT_KAPPA, TWO_PI

__all__ = [
    "SystemParams",
    "EnsembleState",
    "order_parameter",
    "order_parameters",
    "mode_momentum",
    "beta_of",
    "temperature_of",
    "alpha_from_pump",
    "pump_from_alpha",
    "adiabatic_force",
    "retardation_force",
    "noise_mode_strengths",
    "sample_adiabatic_noise",
    "diffusion_matrix",
    "effective_hamiltonian",
    "trap_frequency",
    "corrected_temperature",
    "rescaled_alpha",
    "wrap_positions",
]


def beta_of(delta: float, kappa: float) -> float:
    """Inverse temperature of the stationary state, beta = -4*delta/(delta^2+kappa^2).

    Requires delta < 0 (red detuning) and kappa > 0; otherwise no stationary
    state exists.
    """
    if delta >= 0:
        raise ValueError(f"pump-cavity detuning must be negative, got {delta}")
    if kappa <= 0:
        raise ValueError(f"cavity linewidth must be positive, got {kappa}")
    return -4.0 * delta / (delta * delta + kappa * kappa)


def temperature_of(delta: float, kappa: float) -> float:
    """Stationary temperature k_B T = (delta^2 + kappa^2)/(-4*delta), in hbar*omega_r."""
    return 1.0 / beta_of(delta, kappa)


def alpha_from_pump(n_atoms: int, scatter: float, delta: float, kappa: float) -> float:
    """Dimensionless pump strength alpha = 4*N*S^2*delta^2/(delta^2+kappa^2)^2.

    ``scatter`` is the single-atom scattering amplitude S (a frequency, in
    omega_r).  At delta = -kappa this reduces to alpha = N S^2 / kappa^2.
    """
    if scatter < 0:
        raise ValueError("scattering amplitude must be non-negative")
    if delta >= 0 or kappa <= 0:
        raise ValueError("require delta < 0 and kappa > 0")
    d2k2 = delta * delta + kappa * kappa
    return 4.0 * n_atoms * scatter * scatter * delta * delta / (d2k2 * d2k2)


def pump_from_alpha(n_atoms: int, alpha: float, delta: float, kappa: float) -> float:
    """Inverse of :func:`alpha_from_pump`: the S >= 0 reproducing ``alpha``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if delta >= 0 or kappa <= 0:
        raise ValueError("require delta < 0 and kappa > 0")
    d2k2 = delta * delta + kappa * kappa
    return d2k2 / (2.0 * abs(delta)) * math.sqrt(alpha / n_atoms)


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the two-mode system, in recoil units.

    Both modes share the linewidth ``kappa`` and the detuning ``delta_c``
    (this is what makes a stationary thermal state exist), so there is a
    single inverse temperature ``beta``.
    """

    n_atoms: int
    kappa: float = DEFAULT_KAPPA
    delta_c: float = -DEFAULT_KAPPA
    alpha: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be a positive integer")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.delta_c >= 0:
            raise ValueError(
                "delta_c must be strictly negative for a stationary state"
            )
        if len(self.alpha) != 2 or min(self.alpha) < 0:
            raise ValueError("alpha must be a pair of non-negative reals")
        object.__setattr__(self, "alpha", (float(self.alpha[0]), float(self.alpha[1])))

    @property
    def beta(self) -> float:
        return beta_of(self.delta_c, self.kappa)

    @property
    def temperature(self) -> float:
        """k_B T of the stationary state, in hbar*omega_r."""
        return temperature_of(self.delta_c, self.kappa)

    @property
    def t_min(self) -> float:
        """k_B T_0 = kappa/2, the minimal cavity-cooling temperature (at delta=-kappa)."""
        return 0.5 * self.kappa

    @property
    def ekin0(self) -> float:
        """Reference kinetic energy per particle, kappa/4 (= T_0/2)."""
        return 0.25 * self.kappa

    @property
    def friction_ratio(self) -> float:
        """kappa / (-delta_c), the retardation prefactor."""
        return self.kappa / (-self.delta_c)

    def with_alpha(self, alpha: tuple[float, float]) -> "SystemParams":
        return SystemParams(self.n_atoms, self.kappa, self.delta_c, alpha)


def wrap_positions(u: np.ndarray) -> np.ndarray:
    """Wrap phases into [0, 2*pi)."""
    return np.mod(u, TWO_PI)


@dataclass
class EnsembleState:
    """Positions (phases u = k x) and momenta of the N atoms at one time."""

    time: float
    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        self.momenta = np.asarray(self.momenta, dtype=np.float64)
        if self.positions.shape != self.momenta.shape or self.positions.ndim != 1:
            raise ValueError("positions and momenta must be 1-d arrays of equal length")
        self.positions = wrap_positions(self.positions)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "EnsembleState":
        return EnsembleState(self.time, self.positions.copy(), self.momenta.copy())

    def kinetic_energy(self) -> float:
        """Kinetic energy per particle in hbar*omega_r (= mean squared momentum)."""
        return float(np.mean(self.momenta**2))


def order_parameter(state: EnsembleState, n: int) -> float:
    """Bragg order parameter Theta_n = mean(cos(n u_j)) for mode n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"mode index must be 1 or 2, got {n}")
    return float(np.mean(np.cos(n * state.positions)))


def order_parameters(positions: np.ndarray) -> tuple[float, float]:
    """(Theta_1, Theta_2) for an array of phases."""
    c = np.cos(positions)
    return float(np.mean(c)), float(np.mean(2.0 * c * c - 1.0))


def mode_momentum(state: EnsembleState, n: int) -> float:
    """Mode-projected momentum (1/N) sum_l p_l sin(n u_l)."""
    if n not in (1, 2):
        raise ValueError(f"mode index must be 1 or 2, got {n}")
    return float(np.mean(state.momenta * np.sin(n * state.positions)))


def adiabatic_force(state: EnsembleState, params: SystemParams) -> np.ndarray:
    """Conservative long-range force, -sum_n 2 n alpha_n kT sin(n u_j) Theta_n."""
    kt = params.temperature
    a1, a2 = params.alpha
    u = state.positions
    s1 = np.sin(u)
    c1 = np.cos(u)
    th1 = float(np.mean(c1))
    th2 = float(np.mean(2.0 * c1 * c1 - 1.0))
    return -2.0 * a1 * kt * th1 * s1 - 4.0 * a2 * kt * th2 * (2.0 * s1 * c1)


def retardation_force(state: EnsembleState, params: SystemParams) -> np.ndarray:
    """Collective friction from the finite cavity response time.

    F_j = -sum_n 2 n^2 alpha_n (kappa/-delta_c) sin(n u_j) * (1/N) sum_l p_l sin(n u_l)
    The mode sums are computed once, so the call is O(N).
    """
    r = params.friction_ratio
    a1, a2 = params.alpha
    u = state.positions
    s1 = np.sin(u)
    s2 = np.sin(2.0 * u)
    j1 = float(np.mean(state.momenta * s1))
    j2 = float(np.mean(state.momenta * s2))
    return -2.0 * a1 * r * j1 * s1 - 8.0 * a2 * r * j2 * s2


def noise_mode_strengths(params: SystemParams) -> tuple[float, float]:
    """Diffusion strengths c_n = n^2 alpha_n kT (kappa/-delta_c) / N per mode.

    The 1/N makes the diffusion matrix satisfy the fluctuation-dissipation
    relation D = m k_B T gamma with the friction matrix of
    :func:`retardation_force` (which carries the same 1/N through its
    collective mode sum); equivalently it is what the vacuum-level field
    fluctuations of the explicit-field model produce at fixed alpha.
    """
    kt = params.temperature
    r = params.friction_ratio
    a1, a2 = params.alpha
    n = params.n_atoms
    return a1 * kt * r / n, 4.0 * a2 * kt * r / n


def sample_adiabatic_noise(
    state: EnsembleState, params: SystemParams, dt: float, rng: np.random.Generator
) -> np.ndarray:
    """One momentum-increment sample dW_j = sum_n sqrt(2 c_n dt) sin(n u_j) eta_n.

    Two scalar standard-normal draws per call (one per mode) realize the full
    correlated increment: the noise originates from a single fluctuating
    intracavity amplitude per mode, so its atom-atom covariance is rank 1.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c1, c2 = noise_mode_strengths(params)
    u = state.positions
    eta = rng.standard_normal(2)
    return math.sqrt(2.0 * c1 * dt) * np.sin(u) * eta[0] + math.sqrt(
        2.0 * c2 * dt
    ) * np.sin(2.0 * u) * eta[1]


def diffusion_matrix(state: EnsembleState, params: SystemParams) -> np.ndarray:
    """Momentum diffusion matrix D_ij = sum_n c_n sin(n u_i) sin(n u_j).

    The noise increments satisfy <dW_i dW_j> = 2 D_ij dt.
    """
    c1, c2 = noise_mode_strengths(params)
    s1 = np.sin(state.positions)
    s2 = np.sin(2.0 * state.positions)
    return c1 * np.outer(s1, s1) + c2 * np.outer(s2, s2)


def effective_hamiltonian(state: EnsembleState, params: SystemParams) -> float:
    """Energy of the adiabatic model: sum_j p_j^2 - N kT (a1 Theta1^2 + a2 Theta2^2)."""
    kt = params.temperature
    a1, a2 = params.alpha
    th1, th2 = order_parameters(state.positions)
    kinetic = float(np.sum(state.momenta**2))
    return kinetic - state.n_atoms * kt * (a1 * th1 * th1 + a2 * th2 * th2)


def trap_frequency(params: SystemParams, theta1: float, theta2: float) -> float:
    """Oscillation frequency about the self-organized lattice minima.

    omega_0^2 = (delta_c^2 + kappa^2)/(-delta_c) * (alpha1*Theta1 + 4*alpha2*Theta2),
    in omega_r.  Raises if the curvature is negative (no harmonic minimum).
    """
    a1, a2 = params.alpha
    curv = a1 * theta1 + 4.0 * a2 * theta2
    if curv < 0:
        raise ValueError(
            "alpha1*Theta1 + 4*alpha2*Theta2 < 0: no harmonic trapping minimum"
        )
    d2k2 = params.delta_c**2 + params.kappa**2
    return math.sqrt(d2k2 / (-params.delta_c) * curv)


def corrected_temperature(params: SystemParams, theta1: float, theta2: float) -> float:
    """Stationary temperature including localization at the lattice minima.

    k_B T~ = (delta_c^2+kappa^2)/(4|delta_c|) + omega_0^2/|delta_c|; reduces to
    the homogeneous-gas temperature for Theta1 = Theta2 = 0.
    """
    w0 = trap_frequency(params, theta1, theta2)
    ad = abs(params.delta_c)
    return (params.delta_c**2 + params.kappa**2) / (4.0 * ad) + w0 * w0 / ad


def rescaled_alpha(
    params: SystemParams, theta1: float, theta2: float
) -> tuple[float, float]:
    """Pump strengths rescaled by the corrected temperature, alpha_n * T / T~.

    Always smaller than alpha_n for a positive localization correction; used
    to move the phase diagram to the hotter effective temperature.
    """
    scale = params.temperature / corrected_temperature(params, theta1, theta2)
    return params.alpha[0] * scale, params.alpha[1] * scale
