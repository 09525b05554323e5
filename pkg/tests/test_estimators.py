import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticespec.estimators import (
    FOUR_PI2,
    DesignError,
    detrend_least_squares,
    equivalence_gap,
    estimate_on_grid,
    estimated_field_report,
    kernel_density_estimate,
    kernel_density_grid,
    lag_window_estimate,
    polynomial_basis,
    polynomial_trend,
)
from latticespec.fields import FieldGrid, LinearMA, WhiteNoise, simulate
from latticespec.kernels import KernelSpec, build_weights, inverse_transform_k, kernel_value
from latticespec.lattice import LatticeSpec
from latticespec.rng import split_seed
from latticespec.spectra import autocovariance_brute_force, dft_naive_oracle, field_periodogram

MA = LinearMA({(0, 0): 1.0, (1, 0): 0.5})
EPAN = KernelSpec("epanechnikov", (0.4, 0.4))
QUADRATIC = ((1, 0, 2.0), (0, 1, -1.0), (2, 0, 1.5), (1, 1, 1.0), (0, 2, -2.0))


def white_flat(l1, l2):
    return np.full(np.broadcast(l1, l2).shape, 1.0 / FOUR_PI2)


def smoothed_periodogram_loop(v, kernel, lam):
    """Direct double loop over one period of frequencies, with explicit 2 pi shifts."""
    d1, d2 = v.spec.shape
    h1, h2 = kernel.bandwidth
    coef = dft_naive_oracle(v)
    I = coef.x**2 + coef.y**2
    I[-1, -1] = 0.0
    num = 0.0
    for j1 in range(1, d1 + 1):
        for j2 in range(1, d2 + 1):
            for c1 in range(-2, 3):
                for c2 in range(-2, 3):
                    u = (lam[0] - 2 * math.pi * j1 / d1 - 2 * math.pi * c1) / h1
                    w = (lam[1] - 2 * math.pi * j2 / d2 - 2 * math.pi * c2) / h2
                    num += float(kernel_value(kernel, (u, w))) * I[j1 - 1, j2 - 1]
    den = 0.0
    for k1 in range(-3 * d1, 3 * d1 + 1):
        for k2 in range(-3 * d2, 3 * d2 + 1):
            den += float(kernel_value(kernel, (2 * math.pi * k1 / (d1 * h1), 2 * math.pi * k2 / (d2 * h2))))
    return num / den / FOUR_PI2


def lag_window_loop(v, kernel, lam):
    ac = autocovariance_brute_force(v)
    d1, d2 = v.spec.shape
    h1, h2 = kernel.bandwidth
    total = 0.0 + 0.0j
    for r1 in range(-(d1 - 1), d1):
        for r2 in range(-(d2 - 1), d2):
            k = float(inverse_transform_k(kernel, (r1 * h1, r2 * h2)))
            total += ac.at(r1, r2) * k * np.exp(-1j * (r1 * lam[0] + r2 * lam[1]))
    return total / FOUR_PI2


def test_constant_field_gives_zero():
    v = FieldGrid(LatticeSpec(8, 8), np.full((8, 8), 2.5))
    assert kernel_density_estimate(field_periodogram(v), KernelSpec("epanechnikov", (0.5, 0.5)), (1.0, 2.0)) == pytest.approx(0.0, abs=1e-25)
    assert lag_window_estimate(v, KernelSpec("epanechnikov", (0.5, 0.5)), (1.0, 2.0)) == pytest.approx(0.0, abs=1e-25)


def test_single_bin_uniform_returns_scaled_periodogram():
    # step 2 pi / (h d) = pi / 2 exceeds the unit support, so only s = 0 enters
    spec = LatticeSpec(8, 8)
    v = simulate(MA, spec, seed=7)
    pg = field_periodogram(v)
    k = KernelSpec("uniform", (0.5, 0.5))
    for j in [(1, 2), (3, 5), (6, 1)]:
        lam = (2 * math.pi * j[0] / 8, 2 * math.pi * j[1] / 8)
        assert kernel_density_estimate(pg, k, lam) == pytest.approx(pg.at(*j) / FOUR_PI2, rel=1e-12)


@pytest.mark.parametrize("family, h", [("epanechnikov", (0.9, 1.2)), ("gaussian", (0.7, 0.5)), ("uniform", (1.0, 0.8))])
def test_kernel_estimate_matches_direct_loop(family, h):
    v = simulate(MA, LatticeSpec(6, 7), seed=2)
    k = KernelSpec(family, h)
    pg = field_periodogram(v)
    for lam in [(0.3, 1.7), (math.pi, math.pi), (5.9, 0.05)]:
        assert kernel_density_estimate(pg, k, lam) == pytest.approx(smoothed_periodogram_loop(v, k, lam), rel=1e-10)


@pytest.mark.parametrize("family", ["epanechnikov", "gaussian", "uniform"])
def test_lag_window_matches_direct_loop(family):
    v = simulate(MA, LatticeSpec(7, 6), seed=3)
    k = KernelSpec(family, (0.6, 0.9))
    for lam in [(0.3, 1.7), (2.0, 4.0)]:
        oracle = lag_window_loop(v, k, lam)
        assert abs(oracle.imag) < 1e-12
        assert lag_window_estimate(v, k, lam) == pytest.approx(oracle.real, abs=1e-12)


def test_lag_window_imaginary_part_cancels():
    v = simulate(MA, LatticeSpec(16, 16), seed=4)
    for lam in [(0.1, 0.2), (1.3, 5.5), (math.pi, 0.7)]:
        z = lag_window_estimate(v, EPAN, lam, return_complex=True)
        assert abs(z.imag) < 1e-10


def test_fourier_grid_equals_pointwise():
    spec = LatticeSpec(9, 8)
    v = simulate(MA, spec, seed=5)
    pg = field_periodogram(v)
    k = KernelSpec("epanechnikov", (0.5, 0.5))
    est = estimate_on_grid(pg, k, "fourier")
    for a in range(9):
        for b in range(8):
            lam = (est.lam1[a], est.lam2[b])
            assert est.values[a, b] == pytest.approx(kernel_density_estimate(pg, k, lam), rel=1e-12, abs=1e-18)


def test_uniform_grid_spacing():
    est = estimate_on_grid(simulate(MA, LatticeSpec(16, 16), seed=0), EPAN, "uniform:64")
    assert est.values.shape == (64, 64)
    np.testing.assert_allclose(np.diff(est.lam1), 2 * math.pi / 64)
    assert est.lam1[0] == 0.0 and est.lam1[-1] < 2 * math.pi


def test_lag_method_needs_field():
    v = simulate(MA, LatticeSpec(8, 8), seed=0)
    with pytest.raises(TypeError):
        estimate_on_grid(field_periodogram(v), EPAN, method="lag")


def test_unknown_grid_rejected():
    with pytest.raises(ValueError):
        estimate_on_grid(simulate(MA, LatticeSpec(8, 8), seed=0), EPAN, "hexagonal")


def test_white_noise_mean_at_pi():
    spec = LatticeSpec(64, 64)
    vals = [kernel_density_estimate(field_periodogram(simulate(WhiteNoise(), spec, seed=split_seed(11, r))), EPAN,
                                    (math.pi, math.pi)) for r in range(50)]
    assert np.mean(vals) == pytest.approx(1 / FOUR_PI2, abs=0.1 / FOUR_PI2)


def test_white_noise_sup_error_median():
    # flat truth: the Gaussian kernel at the default bandwidth averages enough bins
    spec = LatticeSpec(64, 64)
    k = KernelSpec("gaussian", (0.4, 0.4))
    errs = [estimate_on_grid(simulate(WhiteNoise(), spec, seed=split_seed(1, r)), k, "fourier",
                             reference=white_flat).sup_error() for r in range(20)]
    assert np.median(errs) <= 0.2 / FOUR_PI2


def test_equivalence_of_the_two_forms_at_48():
    # sup over Fourier frequencies of |smoothed periodogram - lag window| against 5% of sup of the former
    v = simulate(MA, LatticeSpec(48, 48), seed=1)
    assert equivalence_gap(v, EPAN) <= 0.05


def test_equivalence_gap_shrinks_with_lattice():
    k = KernelSpec("gaussian", (0.4, 0.4))
    gaps = [np.median([equivalence_gap(simulate(MA, LatticeSpec(d, d), seed=split_seed(2, r)), k) for r in range(5)])
            for d in (16, 32, 64)]
    assert gaps[0] > gaps[1] > gaps[2]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.floats(-50, 50))
def test_estimate_invariant_to_constant_shift(seed, c):
    v = simulate(MA, LatticeSpec(12, 10), seed=seed)
    k = KernelSpec("gaussian", (0.5, 0.5))
    a = estimate_on_grid(v, k).values
    b = estimate_on_grid(v + c, k).values
    np.testing.assert_allclose(a, b, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["uniform", "epanechnikov", "gaussian"]))
def test_estimate_nonnegative(seed, family):
    v = simulate(MA, LatticeSpec(10, 12), seed=seed)
    assert np.all(estimate_on_grid(v, KernelSpec(family, (0.5, 0.5)), "uniform:16").values >= 0)


def test_grid_and_pointwise_share_normalization():
    spec = LatticeSpec(10, 10)
    pg = field_periodogram(simulate(WhiteNoise(), spec, seed=0))
    k = KernelSpec("epanechnikov", (0.5, 0.5))
    g = kernel_density_grid(pg, k, np.array([0.4]), np.array([2.2]))
    assert g[0, 0] == pytest.approx(kernel_density_estimate(pg, k, (0.4, 2.2)), rel=1e-13)


# --- detrending -------------------------------------------------------------


def test_pure_quadratic_is_removed():
    spec = LatticeSpec(20, 24)
    res = detrend_least_squares(polynomial_trend(spec, QUADRATIC), 2)
    assert np.max(np.abs(res.v_hat.values)) < 1e-8


def test_degree_zero_is_mean_removal():
    y = simulate(MA, LatticeSpec(9, 11), seed=1)
    res = detrend_least_squares(y, 0)
    np.testing.assert_allclose(res.v_hat.values, y.values - y.values.mean(), atol=1e-13)


def test_residuals_orthogonal_and_reconstruct():
    spec = LatticeSpec(16, 12)
    y = simulate(MA, spec, seed=2) + polynomial_trend(spec, QUADRATIC)
    res = detrend_least_squares(y, 2)
    x = polynomial_basis(spec, 2)
    assert np.max(np.abs(x.T @ res.v_hat.flat())) < 1e-8
    np.testing.assert_allclose(res.v_hat.values + res.trend.values, y.values, atol=1e-12)


def test_linear_detrend_mse_projection_rate():
    # white noise: E mse = (basis size) / |T| for a least-squares projection
    out = []
    for d in (16, 32, 64):
        spec = LatticeSpec(d, d)
        trend = polynomial_trend(spec, ((1, 0, 3.0), (0, 1, -2.0)))
        mses = []
        for r in range(20):
            v = simulate(WhiteNoise(), spec, seed=split_seed(d, r))
            mses.append(detrend_least_squares(v + trend, 1, truth=v).mse_vs_truth)
        out.append(np.mean(mses))
        assert np.mean(mses) * spec.size == pytest.approx(3.0, rel=0.35)
    assert out[0] > out[1] > out[2]


def test_design_errors():
    with pytest.raises(DesignError):
        detrend_least_squares(simulate(MA, LatticeSpec(4, 4), seed=0), 3)
    with pytest.raises(DesignError):
        # t1 takes two values, so t1^2 lies in the span of 1 and t1
        detrend_least_squares(simulate(MA, LatticeSpec(2, 40), seed=0), 2)


# --- estimated-field report ---------------------------------------------------


def test_report_identical_fields_zero():
    spec = LatticeSpec(16, 16)
    v = simulate(MA, spec, seed=3)
    rep = estimated_field_report(v, v, EPAN, None, np.full(spec.shape, 0.05))
    for name, val in rep.items():
        assert val == 0.0, name


def test_report_perturbation_bound():
    spec = LatticeSpec(24, 24)
    v = simulate(MA, spec, seed=4)
    rng = np.random.default_rng(0)
    e = rng.choice([-1.0, 1.0], size=spec.shape) / spec.size
    w = v + FieldGrid(spec, e)
    rep = estimated_field_report(v, w, EPAN, None, np.full(spec.shape, 0.05))
    # |F_e(j)| <= sum|e| / sqrt|T| and |I_V - I_W| <= |F_e| (2 |F_V| + |F_e|); weights sum to 1
    fe = np.abs(e).sum() / math.sqrt(spec.size)
    coef = dft_naive_oracle(v)
    fv = np.sqrt(coef.x**2 + coef.y**2).max()
    bound = fe * (2 * fv + fe) / FOUR_PI2
    assert 0 < rep["a"] <= bound
    assert rep["mse"] == pytest.approx(1 / spec.size**2)
    assert all(np.isfinite(val) for val in rep.values())


def test_report_rejects_mismatch():
    with pytest.raises(ValueError):
        estimated_field_report(simulate(MA, LatticeSpec(8, 8), seed=0), simulate(MA, LatticeSpec(8, 9), seed=0),
                               EPAN, None, np.zeros((8, 8)))


def test_quadratic_workflow_statistics_shrink():
    med = {}
    for d in (32, 64):
        spec = LatticeSpec(d, d)
        kernel = KernelSpec("gaussian", (d ** (-1 / 6), d ** (-1 / 6)))
        weights = build_weights(spec, kernel)
        trend = polynomial_trend(spec, QUADRATIC)
        f = np.full(spec.shape, 1 / FOUR_PI2)
        reps = []
        for r in range(20):
            v = simulate(WhiteNoise(), spec, seed=split_seed(9, r))
            res = detrend_least_squares(v + trend, 2)
            reps.append(estimated_field_report(v, res.v_hat, kernel, weights, f))
        med[d] = {name: np.median([rep[name] for rep in reps]) for name in reps[0]}
    for name in med[32]:
        assert med[64][name] < med[32][name], name

