"""Ensembles of independent trajectories with reproducible parallelism.

Every trajectory gets its own counter-based random stream, keyed by
(base_seed, trajectory index) through the Philox generator, so results are
bit-identical for any worker count or scheduling order: workers fill
disjoint rows of preallocated record arrays and all reductions run in index
order afterwards.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fieldmodel, observables
from .integrators import (
    IntegratorConfig,
    TrajectoryError,
    resolve_time_step,
    run_trajectory,
)
from .model import SystemParams
from .protocols import Protocol, sample_initial_state

__all__ = [
    "GridSpec",
    "RunSpec",
    "EnsembleError",
    "EnsembleResult",
    "TrajectorySummary",
    "trajectory_rng",
    "run_ensemble",
    "default_workers",
]

WORKERS_ENV = "TWOMODE_WORKERS"
MODELS = ("adiabatic", "field")


@dataclass(frozen=True)
class GridSpec:
    """Geometric output grid, bounds in units of 1/kappa (figure convention).

    ``include_initial`` prepends a t = 0 observation of the prepared state.
    """

    t_min_kappa: float = 1.0
    t_max_kappa: float = 3.77e6
    points_per_decade: int = 40
    include_initial: bool = True

    def __post_init__(self):
        if self.t_min_kappa <= 0 or self.t_max_kappa <= self.t_min_kappa:
            raise ValueError("need 0 < t_min_kappa < t_max_kappa")
        if self.points_per_decade < 1:
            raise ValueError("points_per_decade must be >= 1")

    def times(self, kappa: float) -> np.ndarray:
        """Observation times in 1/omega_r."""
        decades = math.log10(self.t_max_kappa / self.t_min_kappa)
        n = max(2, int(math.ceil(self.points_per_decade * decades)) + 1)
        grid = np.geomspace(self.t_min_kappa, self.t_max_kappa, n) / kappa
        if self.include_initial:
            grid = np.concatenate(([0.0], grid))
        return grid


@dataclass(frozen=True)
class RunSpec:
    """Everything that defines an ensemble run."""

    params: SystemParams
    protocol: Protocol
    n_traj: int
    model: str = "adiabatic"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    base_seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.n_traj < 1:
            raise ValueError("need at least one trajectory")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ValueError("base_seed must fit in 64 bits")


class EnsembleError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrajectorySummary:
    """Terminal state digest of one trajectory."""

    index: int
    theta1: float
    theta2: float
    ekin: float
    nematic: bool
    failed: bool


@dataclass
class EnsembleResult:
    spec: RunSpec
    dt: float                     # resolved time step actually used
    times: np.ndarray             # (T,)
    theta1: np.ndarray            # (M_ok, T), failed trajectories removed
    theta2: np.ndarray
    psq: np.ndarray
    p4: np.ndarray
    series: observables.ObservableSeries
    hist_theta1: observables.HistogramSeries
    hist_theta2: observables.HistogramSeries
    summaries: list[TrajectorySummary]
    n_failed: int
    failures: list[tuple[int, float]]  # (trajectory index, failure time)


def trajectory_rng(base_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory.

    The Philox key is the 128-bit word (base_seed, index); this mapping is the
    package's reproducibility contract and must not change.
    """
    key = np.array([base_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_ensemble(spec: RunSpec, workers: int | None = None,
                 theta_c: float = 0.5,
                 bin_width: float = observables.DEFAULT_BIN_WIDTH) -> EnsembleResult:
    """Run ``spec.n_traj`` independent trajectories and aggregate.

    Trajectories that leave the finite domain are excluded from the
    statistics and counted; everything else is deterministic given
    ``spec.base_seed`` regardless of ``workers``.
    """
    params = spec.params
    protocol = spec.protocol
    grid = spec.grid.times(params.kappa)
    dt = resolve_time_step(params, protocol, spec.integrator, seed=spec.base_seed)
    if spec.model == "field":
        dt = fieldmodel.field_time_step(params, replace(spec.integrator, dt=dt))
    cfg = replace(spec.integrator, dt=dt)

    m = spec.n_traj
    t = grid.size
    theta1 = np.full((m, t), np.nan)
    theta2 = np.full((m, t), np.nan)
    psq = np.full((m, t), np.nan)
    p4 = np.full((m, t), np.nan)
    failed = np.zeros(m, dtype=bool)
    fail_time = np.zeros(m)
    finals: list = [None] * m

    def _one(i: int):
        rng = trajectory_rng(spec.base_seed, i)
        try:
            if spec.model == "adiabatic":
                init = sample_initial_state(protocol, params, rng)
                rec = run_trajectory(init, params, protocol, cfg, grid, rng)
                finals[i] = rec.final_state
            else:
                init = fieldmodel.sample_initial_field_state(protocol, params, rng)
                rec, final = fieldmodel.run_field_trajectory(
                    init, params, protocol, cfg, grid, rng)
                finals[i] = final
            theta1[i] = rec.theta1
            theta2[i] = rec.theta2
            psq[i] = rec.psq
            p4[i] = rec.p4
        except TrajectoryError as err:
            failed[i] = True
            fail_time[i] = err.time

    n_workers = workers if workers is not None else default_workers()
    if n_workers <= 1 or m == 1:
        for i in range(m):
            _one(i)
    else:
        with ThreadPoolExecutor(max_workers=min(n_workers, m)) as pool:
            list(pool.map(_one, range(m)))

    ok = ~failed
    if not np.any(ok):
        raise EnsembleError(
            f"all {m} trajectories failed; first failure at "
            f"t = {fail_time[failed][0]:.6g}/omega_r"
        )
    th1 = theta1[ok]
    th2 = theta2[ok]
    ps = psq[ok]
    pf = p4[ok]
    series = observables.assemble_series(grid, th1, th2, ps, pf, theta_c=theta_c)
    hist1 = observables.HistogramSeries.build(grid, th1, bin_width)
    hist2 = observables.HistogramSeries.build(grid, th2, bin_width)
    summaries = []
    for i in range(m):
        if failed[i]:
            summaries.append(TrajectorySummary(i, math.nan, math.nan, math.nan,
                                               False, True))
        else:
            summaries.append(TrajectorySummary(
                i, float(theta1[i, -1]), float(theta2[i, -1]),
                float(psq[i, -1]), bool(abs(theta1[i, -1]) < theta_c), False))
    failures = [(int(i), float(fail_time[i])) for i in np.nonzero(failed)[0]]
    return EnsembleResult(
        spec=spec, dt=dt, times=grid,
        theta1=th1, theta2=th2, psq=ps, p4=pf,
        series=series, hist_theta1=hist1, hist_theta2=hist2,
        summaries=summaries, n_failed=int(failed.sum()), failures=failures,
    )
