"""Trajectory integration for the adiabatic (field-eliminated) model.

A single scheme is supported: Euler-Maruyama with the position drift applied
before the momentum kick (the kick sees the updated positions).  The
sequential ordering is what keeps atoms oscillating in deep lattices stable
over the 10^6-step runs the quench protocols need.

``resolve_time_step`` applies the hard stability guards (dt*kappa <= 0.5 and
dt*omega_0 <= 0.1 for the largest reachable trap frequency) and then halves
dt until a short step-halving probe on a common refined noise path passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .model import EnsembleState, SystemParams, order_parameters
from .protocols import Protocol, sample_initial_state
from .units import TWO_PI

__all__ = [
    "IntegratorConfig",
    "TrajectoryError",
    "TrajectoryRecord",
    "step",
    "run_trajectory",
    "resolve_time_step",
]

KAPPA_GUARD = 0.5     # max dt * kappa
TRAP_GUARD = 0.1      # max dt * omega_0 at full ordering
HALVING_TOL = 0.05    # relative strong error accepted by the setup probe
PROBE_HORIZON = 0.1   # probe length in 1/omega_r; longer windows measure chaos
MAX_HALVINGS = 8


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step configuration; ``dt`` is in 1/omega_r."""

    dt: float = 1e-2
    scheme: str = "euler-maruyama"
    wrap: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme != "euler-maruyama":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


class TrajectoryError(RuntimeError):
    """Non-finite state encountered; carries the time of failure."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass
class TrajectoryRecord:
    """Per-grid-point observables of one trajectory."""

    times: np.ndarray    # actual (step-snapped) times, 1/omega_r
    theta1: np.ndarray
    theta2: np.ndarray
    psq: np.ndarray      # mean p^2 per atom = kinetic energy per particle
    p4: np.ndarray       # mean p^4 per atom
    final_state: EnsembleState


def _check_finite(u: np.ndarray, p: np.ndarray, t: float):
    if not (np.isfinite(u).all() and np.isfinite(p).all()):
        raise TrajectoryError(
            f"non-finite positions or momenta at t = {t:.6g}/omega_r", time=t
        )


def step(
    state: EnsembleState,
    params: SystemParams,
    cfg: IntegratorConfig,
    rng: np.random.Generator,
) -> EnsembleState:
    """One integration step with the pump pair frozen at ``params.alpha``."""
    u = state.positions.copy()
    p = state.momenta.copy()
    n = u.shape[0]
    sbuf = np.empty(n)
    cbuf = np.empty(n)
    a1, a2 = params.alpha
    _kernels.adiabatic_steps(
        u, p, sbuf, cbuf, 0, 1, cfg.dt, params.kappa, params.delta_c,
        0, a1, a2, 0.0, 0.0, 0.0, cfg.wrap, rng,
    )
    t_new = state.time + cfg.dt
    _check_finite(u, p, t_new)
    return EnsembleState(time=t_new, positions=u, momenta=p)


def _grid_to_steps(output_grid, t0: float, dt: float) -> np.ndarray:
    grid = np.asarray(output_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("output grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("output grid must be strictly increasing")
    if grid[0] < t0 - 1e-12:
        raise ValueError("output grid starts before the initial time")
    steps = np.rint((grid - t0) / dt).astype(np.int64)
    return np.maximum.accumulate(np.maximum(steps, 0))


def run_trajectory(
    initial: EnsembleState,
    params: SystemParams,
    protocol: Protocol,
    cfg: IntegratorConfig,
    output_grid,
    rng: np.random.Generator,
    observers=(),
) -> TrajectoryRecord:
    """Integrate from ``initial.time`` to the last grid time, observing at each
    grid point (snapped to the step lattice).  Deterministic given the rng
    state and the configuration."""
    dt = cfg.dt
    targets = _grid_to_steps(output_grid, initial.time, dt)
    n_out = targets.size
    u = initial.positions.copy()
    p = initial.momenta.copy()
    n = u.shape[0]
    sbuf = np.empty(n)
    cbuf = np.empty(n)
    kind, a1f, a2f, a1b, a2b, tau = protocol.kernel_coeffs()
    step0 = int(round(initial.time / dt))

    times = np.empty(n_out)
    th1 = np.empty(n_out)
    th2 = np.empty(n_out)
    psq = np.empty(n_out)
    p4 = np.empty(n_out)
    cur = 0
    for i in range(n_out):
        target = int(targets[i])
        if target > cur:
            _kernels.adiabatic_steps(
                u, p, sbuf, cbuf, step0 + cur, target - cur, dt,
                params.kappa, params.delta_c,
                kind, a1f, a2f, a1b, a2b, tau, cfg.wrap, rng,
            )
            cur = target
        t = initial.time + cur * dt
        _check_finite(u, p, t)
        times[i] = t
        th1[i], th2[i] = order_parameters(u)
        p2 = p * p
        psq[i] = float(np.mean(p2))
        p4[i] = float(np.mean(p2 * p2))
        if observers:
            snapshot = EnsembleState(time=t, positions=u.copy(), momenta=p.copy())
            for obs in observers:
                obs(snapshot)
    final = EnsembleState(time=times[-1], positions=u, momenta=p)
    return TrajectoryRecord(times, th1, th2, psq, p4, final)


# -- reference stepper (numpy, used by the setup probe and as a test oracle) --

def reference_steps(u, p, t0, n_steps, dt, params: SystemParams, protocol, normals):
    """Pure-numpy drift-kick stepper with externally supplied normals.

    ``normals`` has shape (n_steps, 2).  Same update rule as the jitted
    kernel, written independently with numpy trig.
    """
    u = u.copy()
    p = p.copy()
    kt = params.temperature
    r = params.friction_ratio
    n = u.shape[0]
    for s in range(n_steps):
        a1, a2 = protocol.alpha_at(t0 + s * dt)
        u = np.mod(u + 2.0 * p * dt, TWO_PI)
        s1 = np.sin(u)
        c1 = np.cos(u)
        s2 = 2.0 * s1 * c1
        th1 = np.mean(c1)
        th2 = np.mean(2.0 * c1 * c1 - 1.0)
        j1 = np.mean(p * s1)
        j2 = np.mean(p * s2)
        w1 = math.sqrt(2.0 * a1 * kt * r / n * dt) * normals[s, 0]
        w2 = math.sqrt(8.0 * a2 * kt * r / n * dt) * normals[s, 1]
        f1 = -2.0 * a1 * (kt * th1 + r * j1)
        f2 = -4.0 * a2 * (kt * th2 + 2.0 * r * j2)
        p = p + (f1 * s1 + f2 * s2) * dt + w1 * s1 + w2 * s2
    return u, p


def _halving_error(params, protocol, dt: float, seed: int) -> float:
    """Relative strong error between one dt-run and a dt/2-run on a common
    refined noise path, over a short probe horizon."""
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(2**32)]))
    state = sample_initial_state(protocol, params, rng)
    n_steps = max(8, int(round(PROBE_HORIZON / dt)))
    half = rng.standard_normal((2 * n_steps, 2))
    coarse = (half[0::2] + half[1::2]) / math.sqrt(2.0)
    u1, p1 = reference_steps(state.positions, state.momenta, 0.0, n_steps, dt,
                             params, protocol, coarse)
    u2, p2 = reference_steps(state.positions, state.momenta, 0.0, 2 * n_steps,
                             dt / 2.0, params, protocol, half)
    scale = math.sqrt(float(np.mean(p2 * p2))) + 1e-30
    return math.sqrt(float(np.mean((p1 - p2) ** 2))) / scale


def resolve_time_step(
    params: SystemParams,
    protocol: Protocol,
    cfg: IntegratorConfig,
    seed: int = 0,
) -> float:
    """Time step actually used for a run.

    Starts from ``cfg.dt``, clamps it under the linewidth and trap-frequency
    guards (the trap frequency is bounded with full ordering, Theta_n = 1),
    then halves until the step-halving probe error drops below
    ``HALVING_TOL``.  Deterministic given the seed.
    """
    dt = cfg.dt
    dt = min(dt, KAPPA_GUARD / params.kappa)
    kind, a1f, a2f, a1b, a2b, tau = protocol.kernel_coeffs()
    a1max = max(a1f, a1b)
    a2max = max(a2f, a2b)
    if kind == 1:
        a1max = a1f + a1b
        a2max = a2f + a2b
    curv = a1max + 4.0 * a2max
    if curv > 0:
        w0_bound = math.sqrt(
            (params.delta_c**2 + params.kappa**2) / (-params.delta_c) * curv
        )
        dt = min(dt, TRAP_GUARD / w0_bound)
    for _ in range(MAX_HALVINGS):
        if _halving_error(params, protocol, dt, seed) < HALVING_TOL:
            return dt
        dt /= 2.0
    raise ValueError(
        f"step-halving probe did not converge above dt = {dt:.3g}; "
        "the configured time step is far too coarse"
    )


def configured(cfg: IntegratorConfig, dt: float) -> IntegratorConfig:
    """Copy of ``cfg`` with the resolved time step."""
    return replace(cfg, dt=dt)
