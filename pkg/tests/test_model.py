import math

import numpy as np
import pytest
from scipy import linalg, stats

from twomode.model import (
    EnsembleState,
    SystemParams,
    adiabatic_force,
    alpha_from_pump,
    beta_of,
    corrected_temperature,
    diffusion_matrix,
    effective_hamiltonian,
    mode_momentum,
    noise_mode_strengths,
    order_parameter,
    order_parameters,
    pump_from_alpha,
    rescaled_alpha,
    retardation_force,
    sample_adiabatic_noise,
    temperature_of,
    trap_frequency,
)
from twomode.units import TWO_PI, recoil_check

KAPPA = 388.6


def make_state(u, p=None, t=0.0):
    u = np.asarray(u, dtype=float)
    if p is None:
        p = np.zeros_like(u)
    return EnsembleState(time=t, positions=u, momenta=np.asarray(p, dtype=float))


def random_state(rng, n, p_scale=10.0):
    return make_state(rng.uniform(0, TWO_PI, n), rng.normal(0, p_scale, n))


def test_unit_convention():
    assert recoil_check() == 1.0


class TestOrderParameter:
    def test_perfectly_ordered(self):
        s = make_state(np.zeros(7))
        assert order_parameter(s, 1) == pytest.approx(1.0)
        assert order_parameter(s, 2) == pytest.approx(1.0)

    def test_mode1_cancellation(self):
        s = make_state([0.0, math.pi])
        assert order_parameter(s, 1) == pytest.approx(0.0, abs=1e-15)
        assert order_parameter(s, 2) == pytest.approx(1.0)

    def test_uniform_finite_size_magnitude(self, rng):
        # <|Theta_n|> -> 1/sqrt(pi N) for homogeneous ensembles
        n, draws = 100, 3000
        u = rng.uniform(0, TWO_PI, (draws, n))
        for mode in (1, 2):
            vals = np.abs(np.mean(np.cos(mode * u), axis=1))
            expected = 1.0 / math.sqrt(math.pi * n)
            se = vals.std(ddof=1) / math.sqrt(draws)
            assert abs(vals.mean() - expected) < 3 * se + 2e-4

    def test_bounds_and_extremes(self, rng):
        for _ in range(50):
            s = random_state(rng, 17)
            for mode in (1, 2):
                assert -1.0 <= order_parameter(s, mode) <= 1.0
        # |Theta_1| = 1 only when every cos(u_j) is the same sign of 1
        s = make_state([0.0, math.pi])
        assert abs(order_parameter(s, 1)) < 1.0

    def test_invalid_mode(self):
        s = make_state([0.0])
        with pytest.raises(ValueError):
            order_parameter(s, 3)

    def test_uniform_variance(self, rng):
        # Var(Theta_n) = 1/(2N) for uniform positions
        n, draws = 50, 4000
        u = rng.uniform(0, TWO_PI, (draws, n))
        var = np.var(np.mean(np.cos(u), axis=1))
        assert var == pytest.approx(1.0 / (2 * n), rel=0.1)


class TestTemperature:
    def test_minimal_at_delta_equals_minus_kappa(self):
        assert temperature_of(-KAPPA, KAPPA) == pytest.approx(KAPPA / 2)
        deltas = -np.geomspace(KAPPA / 30, 30 * KAPPA, 301)
        temps = [temperature_of(d, KAPPA) for d in deltas]
        assert min(temps) >= KAPPA / 2 - 1e-9

    def test_delta_minus_two_kappa(self):
        # direct evaluation: (4k^2 + k^2)/(8k) = 5k/8
        assert temperature_of(-2 * KAPPA, KAPPA) == pytest.approx(5 * KAPPA / 8)

    def test_beta_inverse(self):
        assert beta_of(-1.7, 3.3) * temperature_of(-1.7, 3.3) == pytest.approx(1.0)

    def test_rejects_non_negative_delta(self):
        with pytest.raises(ValueError):
            beta_of(0.0, KAPPA)
        with pytest.raises(ValueError):
            beta_of(1.0, KAPPA)


class TestPumpConversion:
    def test_resonant_identity(self):
        # at delta = -kappa: N S^2 = alpha kappa^2
        n, s = 100, 55.0
        alpha = alpha_from_pump(n, s, -KAPPA, KAPPA)
        assert n * s * s == pytest.approx(alpha * KAPPA * KAPPA)

    def test_zero_pump(self):
        assert alpha_from_pump(10, 0.0, -KAPPA, KAPPA) == 0.0

    def test_round_trip(self):
        for s in (0.3, 7.0, 120.0):
            alpha = alpha_from_pump(42, s, -0.7 * KAPPA, KAPPA)
            assert pump_from_alpha(42, alpha, -0.7 * KAPPA, KAPPA) == pytest.approx(s)


class TestForces:
    def params(self, n=4, alpha=(1.0, 0.0)):
        return SystemParams(n_atoms=n, kappa=KAPPA, delta_c=-KAPPA, alpha=alpha)

    def test_zero_at_lattice_sites(self):
        p = self.params(alpha=(1.5, 0.7))
        f = adiabatic_force(make_state(np.zeros(4)), p)
        np.testing.assert_allclose(f, 0.0, atol=1e-14)

    def test_zero_couplings(self, rng):
        p = self.params(alpha=(0.0, 0.0))
        s = random_state(rng, 6)
        np.testing.assert_allclose(adiabatic_force(s, p), 0.0)
        np.testing.assert_allclose(retardation_force(s, p), 0.0)

    def test_single_atom_closed_form(self):
        # one atom at pi/4 with only mode 1 pumped:
        # F = -2 alpha kT sin(u) cos(u) = -alpha kT sin(2u) -> -kT at u = pi/4
        p = self.params(n=1, alpha=(1.0, 0.0))
        kt = p.temperature
        f = adiabatic_force(make_state([math.pi / 4]), p)
        assert f[0] == pytest.approx(-kt * math.sin(math.pi / 2))
        assert f[0] == pytest.approx(-KAPPA / 2)
        # theta1 = 0 at u = pi/2, so no force
        f = adiabatic_force(make_state([math.pi / 2]), p)
        assert f[0] == pytest.approx(0.0, abs=1e-12)

    def test_adiabatic_force_vs_direct_sum(self, rng):
        p = self.params(n=9, alpha=(1.3, 0.4))
        s = random_state(rng, 9)
        kt = p.temperature
        th1 = np.mean(np.cos(s.positions))
        th2 = np.mean(np.cos(2 * s.positions))
        expected = (-2 * 1.3 * kt * np.sin(s.positions) * th1
                    - 4 * 0.4 * kt * np.sin(2 * s.positions) * th2)
        np.testing.assert_allclose(adiabatic_force(s, p), expected, rtol=1e-12)

    def test_single_particle_friction_damps(self, rng):
        p = self.params(n=1, alpha=(0.8, 0.6))
        for _ in range(20):
            s = random_state(rng, 1)
            f = retardation_force(s, p)
            assert f[0] * s.momenta[0] <= 0.0

    def test_dissipation_inequality(self, rng):
        # total mode-projected dissipated power is never positive
        p = self.params(n=12, alpha=(2.0, 1.0))
        for _ in range(1000):
            s = random_state(rng, 12)
            assert np.dot(retardation_force(s, p), s.momenta) <= 1e-12


class TestNoise:
    def params(self, n, alpha=(1.0, 0.5)):
        return SystemParams(n_atoms=n, kappa=KAPPA, delta_c=-KAPPA, alpha=alpha)

    def test_zero_couplings(self, rng):
        p = self.params(5, alpha=(0.0, 0.0))
        s = random_state(rng, 5)
        np.testing.assert_allclose(sample_adiabatic_noise(s, p, 1e-3, rng), 0.0)

    def test_fluctuation_dissipation_matrix(self, rng):
        # D must equal m kT gamma with gamma_jl = -dF_ret_j/dp_l, exactly
        p = self.params(6, alpha=(1.7, 0.9))
        s = random_state(rng, 6)
        gamma = np.empty((6, 6))
        for l in range(6):
            e = np.zeros(6)
            e[l] = 1.0
            plus = make_state(s.positions, s.momenta + e)
            minus = make_state(s.positions, s.momenta - e)
            gamma[:, l] = -(retardation_force(plus, p) - retardation_force(minus, p)) / 2
        m_kt = 0.5 * p.temperature  # var(p) at equilibrium in recoil units
        np.testing.assert_allclose(diffusion_matrix(s, p), m_kt * gamma,
                                   rtol=1e-9, atol=1e-12)

    def test_mode_strength_friction_ratio(self):
        # c_n over the mode friction coefficient (same 1/N in both) = m kT
        p = self.params(25, alpha=(2.0, 0.5))
        c1, c2 = noise_mode_strengths(p)
        r = p.friction_ratio
        gamma1 = 2.0 * p.alpha[0] * r / p.n_atoms
        gamma2 = 8.0 * p.alpha[1] * r / p.n_atoms
        assert c1 / gamma1 == pytest.approx(0.5 * p.temperature)
        assert c2 / gamma2 == pytest.approx(0.5 * p.temperature)

    def test_empirical_covariance(self, rng):
        # sampled increments reproduce <dW_i dW_j> = 2 D_ij dt within 5 sigma
        n, dt, draws = 5, 1e-3, 100_000
        p = self.params(n)
        s = random_state(rng, n)
        d = diffusion_matrix(s, p)
        c1, c2 = noise_mode_strengths(p)
        b = np.vstack([
            math.sqrt(2 * c1 * dt) * np.sin(s.positions),
            math.sqrt(2 * c2 * dt) * np.sin(2 * s.positions),
        ])
        eta = rng.standard_normal((draws, 2))
        dw = eta @ b
        emp = dw.T @ dw / draws
        expected = 2 * d * dt
        # var of the sample covariance of a gaussian product
        sig = np.sqrt((np.outer(np.diag(expected), np.diag(expected))
                       + expected**2) / draws)
        assert np.all(np.abs(emp - expected) < 5 * sig + 1e-18)

    def test_rank1_matches_dense_factorization(self, rng):
        # brute-force oracle: sampling with the matrix square root of 2 D dt
        # is distributionally identical to the two-draw construction
        n, dt, draws = 6, 2e-3, 60_000
        p = self.params(n, alpha=(1.2, 0.8))
        s = random_state(rng, n)
        cov = 2 * diffusion_matrix(s, p) * dt
        root = np.real(linalg.sqrtm(cov))
        dense = rng.standard_normal((draws, n)) @ root.T
        rank1 = np.array([
            sample_adiabatic_noise(s, p, dt, rng) for _ in range(draws)
        ])
        for j in range(n):
            ks = stats.ks_2samp(dense[:, j], rank1[:, j])
            assert ks.pvalue > 1e-4
        # pairwise products agree in the mean
        for i in range(n):
            for j in range(i + 1, n):
                a = dense[:, i] * dense[:, j]
                b2 = rank1[:, i] * rank1[:, j]
                se = math.hypot(a.std() / math.sqrt(draws), b2.std() / math.sqrt(draws))
                assert abs(a.mean() - b2.mean()) < 5 * se + 1e-18

    def test_rejects_bad_dt(self, rng):
        p = self.params(3)
        with pytest.raises(ValueError):
            sample_adiabatic_noise(random_state(rng, 3), p, 0.0, rng)


class TestEffectiveHamiltonian:
    def test_rest_at_lattice(self):
        p = SystemParams(n_atoms=8, alpha=(1.5, 0.25))
        s = make_state(np.zeros(8))
        expected = -8 * p.temperature * (1.5 + 0.25)
        assert effective_hamiltonian(s, p) == pytest.approx(expected)

    def test_uniform_is_kinetic(self, rng):
        p = SystemParams(n_atoms=4000, alpha=(1.0, 1.0))
        s = random_state(rng, 4000, p_scale=3.0)
        h = effective_hamiltonian(s, p)
        kinetic = np.sum(s.momenta**2)
        assert abs(h - kinetic) / kinetic < 0.05

    def test_recomputation(self, rng):
        p = SystemParams(n_atoms=11, alpha=(0.7, 1.9))
        s = random_state(rng, 11)
        kt = p.temperature
        th1, th2 = order_parameters(s.positions)
        by_hand = float(np.sum(s.momenta**2)) - 11 * kt * (0.7 * th1**2 + 1.9 * th2**2)
        assert effective_hamiltonian(s, p) == pytest.approx(by_hand, rel=1e-14)


class TestCorrectedTemperature:
    def test_no_lattice_reduces_to_stationary(self):
        p = SystemParams(n_atoms=10, alpha=(2.0, 2.0))
        assert corrected_temperature(p, 0.0, 0.0) == pytest.approx(p.temperature)

    def test_deep_lattice_value(self):
        # alpha = (2, 2), Theta = (0.97, 0.88) at delta = -kappa gives ~1.1 T0
        p = SystemParams(n_atoms=100, alpha=(2.0, 2.0))
        ratio = corrected_temperature(p, 0.97, 0.88) / p.t_min
        assert ratio == pytest.approx(1.1, abs=0.02)

    def test_trap_frequency_consistency(self):
        p = SystemParams(n_atoms=100, alpha=(2.0, 2.0))
        w0 = trap_frequency(p, 0.97, 0.88)
        expected = math.sqrt(2 * p.kappa * (2 * 0.97 + 8 * 0.88))
        assert w0 == pytest.approx(expected, rel=1e-9)

    def test_negative_curvature_rejected(self):
        p = SystemParams(n_atoms=10, alpha=(0.0, 2.0))
        with pytest.raises(ValueError):
            corrected_temperature(p, 0.0, -0.5)

    def test_rescaled_alpha_shrinks(self):
        p = SystemParams(n_atoms=10, alpha=(2.0, 2.0))
        a1, a2 = rescaled_alpha(p, 0.97, 0.88)
        assert 0 < a1 < 2.0 and 0 < a2 < 2.0


class TestState:
    def test_wraps_on_construction(self):
        s = make_state([-0.5, 7.0])
        assert np.all((s.positions >= 0) & (s.positions < TWO_PI))

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            EnsembleState(0.0, np.zeros(3), np.zeros(4))

    def test_mode_momentum(self, rng):
        s = random_state(rng, 5)
        expected = np.mean(s.momenta * np.sin(2 * s.positions))
        assert mode_momentum(s, 2) == pytest.approx(expected)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            SystemParams(n_atoms=0)
        with pytest.raises(ValueError):
            SystemParams(n_atoms=5, kappa=-1.0)
        with pytest.raises(ValueError):
            SystemParams(n_atoms=5, delta_c=0.1)
        with pytest.raises(ValueError):
            SystemParams(n_atoms=5, alpha=(-0.1, 0.0))

    def test_defaults_match_reference_system(self):
        p = SystemParams(n_atoms=100)
        assert p.kappa == pytest.approx(388.6, abs=0.2)
        assert p.delta_c == -p.kappa
        assert p.ekin0 == pytest.approx(p.kappa / 4)
