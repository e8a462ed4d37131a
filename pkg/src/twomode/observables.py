"""Ensemble statistics and histograms over trajectory records.

All reductions are pure functions of immutable snapshot arrays, evaluated in
a fixed order, so aggregated results do not depend on how trajectories were
scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_BIN_WIDTH",
    "theta_bin_edges",
    "histogram_at",
    "HistogramSeries",
    "time_averaged_histogram",
    "prob_theta2_negative",
    "kurtosis",
    "order_stats",
    "nematic_fraction",
    "ObservableSeries",
    "assemble_series",
]

DEFAULT_BIN_WIDTH = 2.0 / 111.0


def theta_bin_edges(bin_width: float = DEFAULT_BIN_WIDTH) -> np.ndarray:
    """Uniform bin edges spanning [-1, 1] with (approximately) the given width."""
    if not 0 < bin_width <= 2:
        raise ValueError("bin width must lie in (0, 2]")
    n_bins = max(1, int(round(2.0 / bin_width)))
    return np.linspace(-1.0, 1.0, n_bins + 1)


def histogram_at(values, bin_width: float = DEFAULT_BIN_WIDTH):
    """Normalized density of an order-parameter ensemble at one time.

    Returns (edges, density) with density = counts / (n_values * width), so
    sum(density) * width == 1 for values inside [-1, 1].
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty ensemble")
    edges = theta_bin_edges(bin_width)
    width = edges[1] - edges[0]
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts / (values.size * width)


@dataclass
class HistogramSeries:
    """Time sequence of normalized order-parameter histograms."""

    times: np.ndarray       # (T,)
    bin_edges: np.ndarray   # (B+1,)
    density: np.ndarray     # (T, B)

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @classmethod
    def build(cls, times, theta: np.ndarray, bin_width: float = DEFAULT_BIN_WIDTH):
        """From a (trajectories x times) matrix of order-parameter values."""
        times = np.asarray(times, dtype=float)
        edges = theta_bin_edges(bin_width)
        width = edges[1] - edges[0]
        m, t = theta.shape
        if t != times.size:
            raise ValueError("theta matrix does not match the time grid")
        dens = np.empty((t, edges.size - 1))
        for k in range(t):
            counts, _ = np.histogram(theta[:, k], bins=edges)
            dens[k] = counts / (m * width)
        return cls(times, edges, dens)


def time_averaged_histogram(series: HistogramSeries, t_start: float, t_end: float) -> np.ndarray:
    """Arithmetic mean of the per-time densities with times in [t_start, t_end]."""
    sel = (series.times >= t_start) & (series.times <= t_end)
    if not np.any(sel):
        raise ValueError("no histogram slices in the requested window")
    return series.density[sel].mean(axis=0)


def prob_theta2_negative(values) -> float:
    """Fraction of trajectories with Theta_2 < 0."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty ensemble")
    return float(np.mean(values < 0.0))


def kurtosis(momenta) -> float:
    """<p^4> / <p^2>^2 of the pooled momentum sample (3 for a Gaussian)."""
    p = np.asarray(momenta, dtype=float).ravel()
    m2 = float(np.mean(p * p))
    if m2 == 0.0:
        raise ValueError("degenerate (all-zero) momentum sample")
    m4 = float(np.mean(p**4))
    return m4 / (m2 * m2)


def order_stats(values) -> tuple[float, float]:
    """(<|Theta|>, delta_Theta) with delta = sqrt(<Theta^2> - <|Theta|>^2)."""
    v = np.asarray(values, dtype=float)
    mean_abs = float(np.mean(np.abs(v)))
    var = float(np.mean(v * v)) - mean_abs * mean_abs
    return mean_abs, float(np.sqrt(max(var, 0.0)))


def nematic_fraction(theta1_values, threshold: float = 0.5) -> float:
    """Fraction of trajectories with |Theta_1| below the trapping threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    v = np.asarray(theta1_values, dtype=float)
    return float(np.mean(np.abs(v) < threshold))


@dataclass
class ObservableSeries:
    """Per-time ensemble statistics (times in 1/omega_r)."""

    times: np.ndarray
    mean_abs_theta1: np.ndarray
    mean_abs_theta2: np.ndarray
    dtheta1: np.ndarray
    dtheta2: np.ndarray
    ekin: np.ndarray            # kinetic energy per particle, hbar*omega_r
    kurtosis: np.ndarray
    p_theta2_neg: np.ndarray
    nematic_fraction: np.ndarray
    n_traj: int


def assemble_series(times, theta1, theta2, psq, p4, theta_c: float = 0.5) -> ObservableSeries:
    """Reduce per-trajectory records (rows) into an :class:`ObservableSeries`.

    ``psq``/``p4`` hold the per-trajectory mean p^2 and p^4 per atom, so the
    ensemble kurtosis pools atoms and trajectories with equal weight.
    """
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    psq = np.asarray(psq, dtype=float)
    p4 = np.asarray(p4, dtype=float)
    if theta1.ndim != 2:
        raise ValueError("expected (trajectories x times) record matrices")
    m = theta1.shape[0]
    abs1 = np.abs(theta1)
    abs2 = np.abs(theta2)
    mean_abs1 = abs1.mean(axis=0)
    mean_abs2 = abs2.mean(axis=0)
    d1 = np.sqrt(np.maximum((theta1**2).mean(axis=0) - mean_abs1**2, 0.0))
    d2 = np.sqrt(np.maximum((theta2**2).mean(axis=0) - mean_abs2**2, 0.0))
    m2 = psq.mean(axis=0)
    kurt = p4.mean(axis=0) / np.maximum(m2 * m2, 1e-300)
    return ObservableSeries(
        times=np.asarray(times, dtype=float),
        mean_abs_theta1=mean_abs1,
        mean_abs_theta2=mean_abs2,
        dtheta1=d1,
        dtheta2=d2,
        ekin=m2,
        kurtosis=kurt,
        p_theta2_neg=(theta2 < 0.0).mean(axis=0),
        nematic_fraction=(abs1 < theta_c).mean(axis=0),
        n_traj=m,
    )
