import math

import numpy as np
import pytest

from sparsebox.grid import (
    DerivativeOrderError,
    FieldError,
    Grid,
    InfeasibleExponentsError,
    MultiIndex,
    NonFiniteFieldError,
    PeriodicField,
    SpectralFilter,
    curl,
    divergence,
    gn_ratio,
    grid_for,
    lp_norm,
    multi_indices,
    spectral_derivative,
    spectral_energy,
    sup_norm,
    trilinear_interpolate,
)

G = grid_for(32)


def single_mode(grid, axis=0, kappa=1, amplitude=1.0, component=0):
    mesh = grid.meshgrid()
    data = np.zeros((3, grid.n, grid.n, grid.n))
    data[component] = amplitude * np.sin(kappa * mesh[axis])
    return PeriodicField(grid, data)


def random_bandlimited(grid, seed, kappa_cut=5):
    import scipy.fft as fft

    rng = np.random.default_rng(seed)
    spec = fft.rfftn(rng.standard_normal((3, grid.n, grid.n, grid.n)), axes=(1, 2, 3))
    keep = grid.k_sq <= kappa_cut**2 + 1e-9
    f = PeriodicField.from_spectral(grid, spec * keep)
    return f * (1.0 / sup_norm(f))


class TestGridConstruction:
    def test_power_of_two_required(self):
        with pytest.raises(FieldError):
            Grid(24)
        with pytest.raises(FieldError):
            Grid(4)

    def test_collocation_points(self):
        g = grid_for(16)
        assert g.x[0] == 0.0
        assert g.x[1] == pytest.approx(2 * math.pi / 16)

    def test_nonfinite_rejected(self):
        data = np.zeros((3, 32, 32, 32))
        data[1, 0, 0, 0] = np.nan
        with pytest.raises(NonFiniteFieldError):
            PeriodicField(G, data)

    def test_fields_are_immutable(self):
        f = single_mode(G)
        with pytest.raises(ValueError):
            f.data[0, 0, 0, 0] = 1.0


class TestDerivatives:
    def test_first_derivative_of_sine(self):
        f = single_mode(G)
        d = spectral_derivative(f, (1, 0, 0))
        x = G.meshgrid()[0]
        assert np.max(np.abs(d.data[0] - np.cos(x))) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 12])
    def test_high_order_sine_sup_is_one(self, k):
        f = single_mode(G)
        d = spectral_derivative(f, (k, 0, 0))
        # the spectral noise floor of the transform is amplified by kappa^k
        tol = max(1e-12, (G.n / 2) ** k * 1e-15)
        assert sup_norm(d) == pytest.approx(1.0, abs=tol)

    def test_second_derivative_mode_three(self):
        amplitude = 2.5
        f = single_mode(G, axis=1, kappa=3, amplitude=amplitude, component=1)
        d = spectral_derivative(f, (0, 2, 0))
        y = G.meshgrid()[1]
        assert np.max(np.abs(d.data[1] + 9 * amplitude * np.sin(3 * y))) < 1e-10
        assert sup_norm(d) == pytest.approx(9 * amplitude, rel=1e-12)

    def test_order_above_k_max_rejected(self):
        f = single_mode(G)
        with pytest.raises(DerivativeOrderError, match="k_max=12"):
            spectral_derivative(f, (13, 0, 0))

    def test_composition_matches_second_order(self):
        f = random_bandlimited(G, seed=3)
        once = spectral_derivative(spectral_derivative(f, (1, 0, 0)), (1, 0, 0))
        twice = spectral_derivative(f, (2, 0, 0))
        scale = sup_norm(twice)
        assert np.max(np.abs(once.data - twice.data)) < 1e-10 * scale

    def test_filter_damps_high_orders(self):
        f = random_bandlimited(G, seed=4, kappa_cut=10)
        plain = spectral_derivative(f, (8, 0, 0))
        filtered = spectral_derivative(f, (8, 0, 0), spectral_filter=SpectralFilter())
        assert sup_norm(filtered) < sup_norm(plain)

    def test_multi_index_total(self):
        z = MultiIndex((2, 1, 0))
        assert z.total == 3
        assert len(multi_indices(3)) == 10  # C(3+2, 2)


class TestNorms:
    def test_sup_norm_is_max_component(self):
        data = np.zeros((3, 32, 32, 32))
        data[0] = 1.0
        data[1] = -2.0
        data[2] = 0.5
        assert sup_norm(PeriodicField(G, data)) == 2.0

    def test_sup_norm_single_mode(self):
        assert sup_norm(single_mode(G)) == pytest.approx(1.0)

    def test_zero_field(self):
        z = PeriodicField.zeros(G)
        assert sup_norm(z) == 0.0
        assert lp_norm(z, 3.7) == 0.0

    def test_l2_of_sine(self):
        # integral of sin^2 over one period is pi, so the squared norm is 4 pi^3
        assert lp_norm(single_mode(G), 2) == pytest.approx(math.sqrt(4 * math.pi**3), rel=1e-12)

    def test_l2_of_constant(self):
        data = np.zeros((3, 32, 32, 32))
        data[0] = 0.7
        f = PeriodicField(G, data)
        assert lp_norm(f, 2) == pytest.approx(0.7 * (2 * math.pi) ** 1.5, rel=1e-12)

    def test_p_below_one_rejected(self):
        with pytest.raises(FieldError, match="p >= 1"):
            lp_norm(single_mode(G), 0.5)

    def test_p_infinity_delegates_to_sup(self):
        f = random_bandlimited(G, seed=5)
        assert lp_norm(f, math.inf) == sup_norm(f)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_plancherel(self, seed):
        f = random_bandlimited(G, seed=seed, kappa_cut=9)
        assert spectral_energy(f) == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-10)

    @pytest.mark.parametrize("seed", [0, 7])
    def test_round_trip(self, seed):
        f = random_bandlimited(G, seed=seed, kappa_cut=10)
        back = PeriodicField.from_spectral(G, f.spectral)
        assert np.max(np.abs(back.data - f.data)) < 1e-12 * max(sup_norm(f), 1.0)


class TestCurl:
    def test_abc_field_is_curl_eigenfield(self):
        x, y, z = G.meshgrid()
        f = PeriodicField.from_components(
            G, np.sin(z) + np.cos(y), np.sin(x) + np.cos(z), np.sin(y) + np.cos(x)
        )
        c = curl(f)
        assert np.max(np.abs(c.data - f.data)) < 1e-12

    def test_constant_field_curl_is_zero(self):
        data = np.ones((3, 32, 32, 32))
        assert sup_norm(curl(PeriodicField(G, data))) < 1e-13

    def test_single_component_curl(self):
        # right-handed convention (pinned by the Beltrami identity above):
        # curl(0, 0, sin x1) = (0, -cos x1, 0)
        x = G.meshgrid()[0]
        f = PeriodicField.from_components(
            G, np.zeros_like(x), np.zeros_like(x), np.sin(x)
        )
        c = curl(f)
        assert np.max(np.abs(c.data[1] + np.cos(x))) < 1e-12
        assert np.max(np.abs(c.data[0])) < 1e-13
        assert np.max(np.abs(c.data[2])) < 1e-13
        assert sup_norm(c) == pytest.approx(1.0, rel=1e-12)

    def test_curl_of_gradient_vanishes(self):
        phi_spec = None
        rng = np.random.default_rng(11)
        import scipy.fft as fft

        phi = rng.standard_normal((32, 32, 32))
        spec = fft.rfftn(phi)
        spec *= G.k_sq <= 36.0
        grad = np.stack(
            [
                fft.irfftn(1j * G.kx * spec, s=(32,) * 3),
                fft.irfftn(1j * G.ky * spec, s=(32,) * 3),
                fft.irfftn(1j * G.kz * spec, s=(32,) * 3),
            ]
        )
        f = PeriodicField(G, grad)
        assert sup_norm(curl(f)) < 1e-10 * max(sup_norm(f), 1.0)


class TestGnRatio:
    def test_single_mode_ratio_is_one(self):
        for kappa in (1, 2, 4):
            f = single_mode(G, axis=0, kappa=kappa, component=1)
            ratio = gn_ratio(f, j=1, m=2, p=math.inf, q=math.inf, r=math.inf)
            assert ratio == pytest.approx(1.0, rel=1e-9)

    def test_constant_field_s_zero(self):
        data = np.zeros((3, 32, 32, 32))
        data[0] = 2.0
        f = PeriodicField(G, data)
        # j=0 with p=q forces s=0 and the ratio collapses to 1
        assert gn_ratio(f, j=0, m=2, p=4.0, q=4.0, r=2.0) == pytest.approx(1.0)

    def test_infeasible_exponents_rejected(self):
        f = single_mode(G)
        # solves to s = -1/4, below the admissible floor j/m = 1/2
        with pytest.raises(InfeasibleExponentsError):
            gn_ratio(f, j=1, m=2, p=2.0, q=math.inf, r=math.inf)

    def test_random_ensemble_bounded(self):
        # empirical interpolation constant over a seeded ensemble
        worst = 0.0
        for seed in range(100):
            f = random_bandlimited(G, seed=seed, kappa_cut=6)
            worst = max(worst, gn_ratio(f, 1, 2, math.inf, math.inf, math.inf))
        assert math.isfinite(worst)
        assert worst <= 1.05  # frozen from this ensemble; single modes attain 1


class TestInterpolation:
    def test_exact_at_grid_points(self):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal((32, 32, 32))
        pts = G.h * np.array([[3, 4, 5], [0, 0, 0], [31, 31, 31]], dtype=float)
        out = trilinear_interpolate(vals, G, pts)
        assert out == pytest.approx([vals[3, 4, 5], vals[0, 0, 0], vals[31, 31, 31]])

    def test_linear_midpoint(self):
        vals = np.zeros((32, 32, 32))
        vals[4, 7, 9] = 2.0
        p = G.h * np.array([4.5, 7.0, 9.0])
        assert trilinear_interpolate(vals, G, p) == pytest.approx(1.0)

    def test_periodic_wrap(self):
        vals = np.zeros((32, 32, 32))
        vals[0, 0, 0] = 4.0
        p = G.h * np.array([31.5, 0.0, 0.0])
        assert trilinear_interpolate(vals, G, p) == pytest.approx(2.0)
