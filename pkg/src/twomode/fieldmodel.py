"""Integrator for the model with explicit cavity-field variables.

Keeps the two mode amplitudes (quadratures E_n = E_re + i E_im) as dynamical
variables driven by vacuum-level noise of variance kappa/2 per quadrature and
unit time, instead of eliminating them.  Used to cross-validate the adiabatic
model: in the bad-cavity regime both give the same coarse-grained dynamics up
to retardation corrections that leave the gas roughly 10% hotter when trapped
in deep lattices.

The pump enters through the single-atom amplitudes S_n, related to the
adiabatic pump pair by alpha_n = 4 N S_n^2 delta^2 / (delta^2+kappa^2)^2, so
protocols are shared between the two models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .integrators import IntegratorConfig, TrajectoryError, TrajectoryRecord, _grid_to_steps
from .model import EnsembleState, SystemParams, order_parameters, pump_from_alpha
from .protocols import Protocol, sample_initial_state

__all__ = [
    "FieldState",
    "field_time_step",
    "sample_initial_field_state",
    "steady_field",
    "step_field",
    "run_field_trajectory",
]

FIELD_DT_FRACTION = 0.05  # dt <= this over kappa and |delta_c|


@dataclass
class FieldState:
    """Particle state plus the two complex mode amplitudes (as quadratures)."""

    particle: EnsembleState
    field_re: np.ndarray
    field_im: np.ndarray

    def __post_init__(self):
        self.field_re = np.asarray(self.field_re, dtype=np.float64)
        self.field_im = np.asarray(self.field_im, dtype=np.float64)
        if self.field_re.shape != (2,) or self.field_im.shape != (2,):
            raise ValueError("field quadratures must be pairs (one per mode)")
        if not (np.isfinite(self.field_re).all() and np.isfinite(self.field_im).all()):
            raise ValueError("field components must be finite")

    @property
    def time(self) -> float:
        return self.particle.time

    def copy(self) -> "FieldState":
        return FieldState(self.particle.copy(), self.field_re.copy(), self.field_im.copy())

    def amplitudes(self) -> np.ndarray:
        return self.field_re + 1j * self.field_im


def field_time_step(params: SystemParams, cfg: IntegratorConfig) -> float:
    """Step small enough for the stiff field subsystem."""
    return min(
        cfg.dt,
        FIELD_DT_FRACTION / params.kappa,
        FIELD_DT_FRACTION / abs(params.delta_c),
    )


def _pump_prefactor(params: SystemParams) -> float:
    # S_n = _pump_prefactor * sqrt(alpha_n)
    return pump_from_alpha(params.n_atoms, 1.0, params.delta_c, params.kappa)


def sample_initial_field_state(
    protocol: Protocol, params: SystemParams, rng: np.random.Generator
) -> FieldState:
    """Initial particle state of the protocol plus fields drawn from the
    pump-free stationary distribution, N(0, 1/4) per quadrature."""
    particle = sample_initial_state(protocol, params, rng)
    quads = rng.normal(0.0, 0.5, 4)  # order: E1_re, E1_im, E2_re, E2_im
    return FieldState(particle, quads[[0, 2]], quads[[1, 3]])


def steady_field(params: SystemParams, scatter: float, theta: float) -> complex:
    """Mean-field fixed point of one mode at frozen order parameter Theta:
    E = N S Theta (delta_c - i kappa) / (delta_c^2 + kappa^2)."""
    d, k = params.delta_c, params.kappa
    return params.n_atoms * scatter * theta * (d - 1j * k) / (d * d + k * k)


def _unpack_fld(fld: np.ndarray):
    return fld[[0, 2]].copy(), fld[[1, 3]].copy()


def step_field(
    state: FieldState,
    params: SystemParams,
    cfg: IntegratorConfig,
    rng: np.random.Generator,
) -> FieldState:
    """One step at ``cfg.dt`` with the pump pair frozen at ``params.alpha``."""
    if cfg.dt * max(params.kappa, abs(params.delta_c)) > 0.5:
        raise ValueError(
            "dt too coarse for the field subsystem; use field_time_step()"
        )
    u = state.particle.positions.copy()
    p = state.particle.momenta.copy()
    fld = np.array([state.field_re[0], state.field_im[0],
                    state.field_re[1], state.field_im[1]])
    n = u.shape[0]
    sbuf = np.empty(n)
    cbuf = np.empty(n)
    a1, a2 = params.alpha
    _kernels.field_steps(
        u, p, fld, sbuf, cbuf, 0, 1, cfg.dt, params.kappa, params.delta_c,
        0, a1, a2, 0.0, 0.0, 0.0, _pump_prefactor(params), cfg.wrap, rng,
    )
    t_new = state.time + cfg.dt
    if not (np.isfinite(u).all() and np.isfinite(p).all() and np.isfinite(fld).all()):
        raise TrajectoryError(f"non-finite field-model state at t = {t_new:.6g}", t_new)
    re, im = _unpack_fld(fld)
    return FieldState(EnsembleState(t_new, u, p), re, im)


def run_field_trajectory(
    initial: FieldState,
    params: SystemParams,
    protocol: Protocol,
    cfg: IntegratorConfig,
    output_grid,
    rng: np.random.Generator,
    observers=(),
) -> tuple[TrajectoryRecord, FieldState]:
    """Field-model analogue of :func:`twomode.integrators.run_trajectory`.

    Returns the particle-observable record plus the final field state.
    ``cfg.dt`` should come from :func:`field_time_step`.
    """
    dt = cfg.dt
    t0 = initial.time
    targets = _grid_to_steps(output_grid, t0, dt)
    n_out = targets.size
    u = initial.particle.positions.copy()
    p = initial.particle.momenta.copy()
    fld = np.array([initial.field_re[0], initial.field_im[0],
                    initial.field_re[1], initial.field_im[1]])
    n = u.shape[0]
    sbuf = np.empty(n)
    cbuf = np.empty(n)
    kind, a1f, a2f, a1b, a2b, tau = protocol.kernel_coeffs()
    s_pref = _pump_prefactor(params)
    step0 = int(round(t0 / dt))

    times = np.empty(n_out)
    th1 = np.empty(n_out)
    th2 = np.empty(n_out)
    psq = np.empty(n_out)
    p4 = np.empty(n_out)
    cur = 0
    for i in range(n_out):
        target = int(targets[i])
        if target > cur:
            _kernels.field_steps(
                u, p, fld, sbuf, cbuf, step0 + cur, target - cur, dt,
                params.kappa, params.delta_c,
                kind, a1f, a2f, a1b, a2b, tau, s_pref, cfg.wrap, rng,
            )
            cur = target
        t = t0 + cur * dt
        if not (np.isfinite(u).all() and np.isfinite(p).all()
                and np.isfinite(fld).all()):
            raise TrajectoryError(f"non-finite field-model state at t = {t:.6g}", t)
        times[i] = t
        th1[i], th2[i] = order_parameters(u)
        p2 = p * p
        psq[i] = float(np.mean(p2))
        p4[i] = float(np.mean(p2 * p2))
        if observers:
            re, im = _unpack_fld(fld)
            snapshot = FieldState(EnsembleState(t, u.copy(), p.copy()), re, im)
            for obs in observers:
                obs(snapshot)
    re, im = _unpack_fld(fld)
    final = FieldState(EnsembleState(times[-1], u, p), re, im)
    return TrajectoryRecord(times, th1, th2, psq, p4, final.particle), final
