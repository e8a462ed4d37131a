import itertools
import math

import numpy as np
import pytest

from twomode.meanfield import (
    FERROMAGNETIC,
    NEMATIC,
    PARAMAGNETIC,
    classify_transition,
    find_minima,
    free_energy_gradient,
    free_energy_hessian,
    intensive_free_energy,
    landscape,
    phase_diagram,
    steady_observables,
)


class TestFreeEnergy:
    def test_paramagnetic_reference(self):
        assert intensive_free_energy(0.0, 0.0, 2.0, 2.0) == 0.0

    def test_mirror_symmetry(self, rng):
        for _ in range(30):
            t1, t2 = rng.uniform(-1, 1, 2)
            a1, a2 = rng.uniform(0, 4, 2)
            f = intensive_free_energy(t1, t2, a1, a2)
            assert intensive_free_energy(-t1, t2, a1, a2) == pytest.approx(f, abs=1e-13)

    def test_even_in_theta2_without_mode1(self, rng):
        for _ in range(20):
            t2 = rng.uniform(-1, 1)
            a2 = rng.uniform(0, 4)
            f = intensive_free_energy(0.0, t2, 0.0, a2)
            assert intensive_free_energy(0.0, -t2, 0.0, a2) == pytest.approx(f, abs=1e-13)

    def test_rejects_negative_alpha(self):
        with pytest.raises(ValueError):
            intensive_free_energy(0.1, 0.1, -1.0, 0.0)

    def test_gradient_matches_finite_differences(self, rng):
        h = 1e-6
        for _ in range(25):
            t1, t2 = rng.uniform(-0.9, 0.9, 2)
            a1, a2 = rng.uniform(0.1, 3.5, 2)
            g = free_energy_gradient(t1, t2, a1, a2)
            fd1 = (intensive_free_energy(t1 + h, t2, a1, a2)
                   - intensive_free_energy(t1 - h, t2, a1, a2)) / (2 * h)
            fd2 = (intensive_free_energy(t1, t2 + h, a1, a2)
                   - intensive_free_energy(t1, t2 - h, a1, a2)) / (2 * h)
            scale = max(1.0, abs(fd1), abs(fd2))
            assert abs(g[0] - fd1) / scale < 1e-6
            assert abs(g[1] - fd2) / scale < 1e-6

    def test_landau_curvature_at_origin(self):
        # d^2(beta f)/dtheta_n^2 at 0 is 2 alpha_n (1 - alpha_n)
        for a in (0.3, 0.8, 1.0, 1.5, 2.5):
            h = free_energy_hessian(0.0, 0.0, a, a)
            assert h[0, 0] == pytest.approx(2 * a * (1 - a), abs=1e-9)
            assert h[1, 1] == pytest.approx(2 * a * (1 - a), abs=1e-9)
            assert h[0, 1] == pytest.approx(0.0, abs=1e-12)


class TestMinima:
    def test_bistable_point(self):
        # ferromagnetic global minima at (+-0.97, 0.88), nematic local at
        # (0, -0.83), all within +-0.01
        ms = find_minima(2.0, 2.0)
        globals_ = ms.global_minima
        assert len(globals_) == 2
        for g in globals_:
            assert g.phase == FERROMAGNETIC
            assert abs(g.theta1) == pytest.approx(0.97, abs=0.01)
            assert g.theta2 == pytest.approx(0.88, abs=0.01)
        nem = [m for m in ms.minima if m.phase == NEMATIC]
        assert len(nem) == 1
        assert nem[0].theta1 == pytest.approx(0.0, abs=1e-6)
        assert nem[0].theta2 == pytest.approx(-0.83, abs=0.01)
        assert not nem[0].is_global

    def test_deep_paramagnetic(self):
        ms = find_minima(0.5, 0.5)
        assert len(ms.minima) == 1
        assert ms.minima[0].phase == PARAMAGNETIC
        assert ms.minima[0].is_global

    def test_pure_mode2_sign_symmetric(self):
        ms = find_minima(0.0, 2.0)
        nem = [m for m in ms.minima if m.phase == NEMATIC]
        assert len(nem) == 2
        t2s = sorted(m.theta2 for m in nem)
        assert t2s[0] == pytest.approx(-t2s[1], abs=1e-8)
        assert t2s[1] > 0.5
        assert all(m.is_global for m in nem)

    def test_self_consistency_at_minima(self):
        # stationarity theta_n = <cos(n u)> under the tilted site weight
        for alpha in ((2.0, 2.0), (2.5, 0.5), (1.1, 1.1)):
            for m in find_minima(*alpha).minima:
                g = free_energy_gradient(m.theta1, m.theta2, *alpha)
                assert np.max(np.abs(g)) < 1e-8

    def test_frozen_reference_values(self):
        # regression constants established with the small-N oracle below
        t1, t2 = steady_observables(2.5, 0.5)
        assert t1 == pytest.approx(0.9228, abs=0.002)
        assert t2 == pytest.approx(0.7320, abs=0.002)
        t1, t2 = steady_observables(2.0, 2.0)
        assert t1 == pytest.approx(0.9683, abs=0.002)
        assert t2 == pytest.approx(0.8836, abs=0.002)

    def test_deep_paramagnetic_observables(self):
        assert steady_observables(0.1, 0.02) == pytest.approx((0.0, 0.0), abs=1e-8)

    def test_small_n_partition_function_oracle(self):
        # quadrature over (u1, u2, u3) of exp(-beta H_eff) puts the histogram
        # mode at the landscape minimum once ordering is well developed
        nodes = np.linspace(0, 2 * math.pi, 48, endpoint=False)
        for alpha, tol in (((1.5, 0.75), 0.25), ((3.0, 1.5), 0.1)):
            a1, a2 = alpha
            edges = np.linspace(-1, 1, 25)
            hist = np.zeros((24, 24))
            for u1, u2 in itertools.product(nodes, repeat=2):
                c = np.cos(np.array([u1, u2])[:, None] + 0 * nodes)  # broadcast helper
                cos1 = (math.cos(u1) + math.cos(u2) + np.cos(nodes)) / 3
                cos2 = (math.cos(2 * u1) + math.cos(2 * u2) + np.cos(2 * nodes)) / 3
                w = np.exp(3 * (a1 * cos1**2 + a2 * cos2**2))
                i = np.clip(np.digitize(cos1, edges) - 1, 0, 23)
                j = np.clip(np.digitize(cos2, edges) - 1, 0, 23)
                np.add.at(hist, (i, j), w)
            i, j = np.unravel_index(np.argmax(hist), hist.shape)
            mode_t1 = abs((edges[i] + edges[i + 1]) / 2)
            mode_t2 = (edges[j] + edges[j + 1]) / 2
            t1_star, t2_star = steady_observables(a1, a2)
            assert abs(mode_t1 - t1_star) < tol
            assert abs(mode_t2 - t2_star) < tol


class TestPhaseDiagram:
    def test_axis_thresholds(self):
        pd = phase_diagram(alpha_max=2.0, resolution=41, classify_boundaries=False)
        # along alpha2 = 0: paramagnetic up to alpha1 = 1, ferromagnetic after
        row = [pd.label_name(i, 0) for i in range(41)]
        crossings = [i for i in range(40) if row[i] != row[i + 1]]
        assert len(crossings) == 1
        assert abs(pd.alpha1_axis[crossings[0]] - 1.0) <= 0.05 + 1e-9
        assert row[0] == PARAMAGNETIC and row[-1] == FERROMAGNETIC
        # along alpha1 = 0: paramagnetic -> nematic at alpha2 = 1
        col = [pd.label_name(0, j) for j in range(41)]
        crossings = [j for j in range(40) if col[j] != col[j + 1]]
        assert len(crossings) == 1
        assert abs(pd.alpha2_axis[crossings[0]] - 1.0) <= 0.05 + 1e-9
        assert col[0] == PARAMAGNETIC and col[-1] == NEMATIC

    def test_bistable_flag_at_2_2(self):
        pd = phase_diagram(alpha_max=2.0, resolution=21, classify_boundaries=False)
        assert pd.label_name(-1, -1) == FERROMAGNETIC
        assert pd.nematic_metastable[-1, -1]
        assert pd.theta1[-1, -1] == pytest.approx(0.9683, abs=0.005)

    def test_degenerate_grid_labels_corners(self):
        pd = phase_diagram(alpha_max=3.0, resolution=2, classify_boundaries=False)
        assert pd.label_name(0, 0) == PARAMAGNETIC
        assert pd.label_name(1, 1) == FERROMAGNETIC

    def test_transition_orders(self):
        # second order crossing the alpha1 axis threshold, and the pure-mode-2
        # threshold; first order from nematic into ferromagnetic
        assert classify_transition((0.9, 0.0), (1.1, 0.0)) == "second"
        assert classify_transition((0.0, 0.9), (0.0, 1.1)) == "second"
        assert classify_transition((0.4, 2.0), (1.2, 2.0)) == "first"

    def test_boundary_segments_present(self):
        pd = phase_diagram(alpha_max=2.0, resolution=11, classify_boundaries=True)
        assert pd.boundaries
        orders = {order for _, _, order in pd.boundaries}
        assert orders <= {"first", "second"}
        assert "second" in orders


class TestLandscape:
    def test_symmetric_and_consistent(self):
        surf = landscape(2.0, 2.0, grid_points=41)
        np.testing.assert_allclose(surf.values, surf.values[::-1], atol=1e-12)
        i = np.searchsorted(surf.theta1_axis, 0.5)
        j = np.searchsorted(surf.theta2_axis, -0.25)
        direct = intensive_free_energy(surf.theta1_axis[i], surf.theta2_axis[j], 2.0, 2.0)
        assert surf.values[i, j] == pytest.approx(direct, rel=1e-12)

    def test_minimum_location_on_grid(self):
        surf = landscape(2.0, 2.0, grid_points=201)
        i, j = np.unravel_index(np.argmin(surf.values), surf.values.shape)
        assert abs(surf.theta1_axis[i]) == pytest.approx(0.97, abs=0.02)
        assert surf.theta2_axis[j] == pytest.approx(0.88, abs=0.02)
