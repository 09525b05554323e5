import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate

from latticespec.kernels import (
    FAMILIES,
    BandwidthError,
    KernelSpec,
    build_weights,
    inverse_transform_k,
    kernel_value,
    make_kernel,
    resolve_bandwidth,
    riemann_sum,
    validate_kernel,
    wrapped_kernel,
)
from latticespec.lattice import LatticeSpec


def test_family_aliases_and_validation():
    assert KernelSpec("EpanechnikovProduct", (0.4, 0.4)).family == "epanechnikov"
    assert KernelSpec("UniformProduct", (1, 1)).family == "uniform"
    with pytest.raises(ValueError):
        KernelSpec("triangle", (0.4, 0.4))
    with pytest.raises(ValueError):
        KernelSpec("gaussian", (0.4, 0.0))


def test_kernel_values_at_origin():
    assert kernel_value(KernelSpec("epanechnikov", (1, 1)), (0.0, 0.0)) == pytest.approx(9 / 16)
    assert kernel_value(KernelSpec("gaussian", (1, 1)), (0.0, 0.0)) == pytest.approx(1 / (2 * math.pi))
    assert kernel_value(KernelSpec("uniform", (1, 1)), (0.0, 0.0)) == pytest.approx(1 / 4)
    assert kernel_value(KernelSpec("uniform", (1, 1)), (1.5, 0.0)) == 0.0
    # closed support boundary
    assert kernel_value(KernelSpec("uniform", (1, 1)), (1.0, -1.0)) == pytest.approx(1 / 4)


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_nonnegative_and_even(family):
    rng = np.random.default_rng(0)
    t = rng.uniform(-3, 3, size=(2, 10_000))
    k = KernelSpec(family, (1, 1))
    a = kernel_value(k, t)
    assert np.all(a >= 0)
    np.testing.assert_array_equal(a, kernel_value(k, -t))


@pytest.mark.parametrize("family", FAMILIES)
def test_kernel_integrates_to_one(family):
    k = KernelSpec(family, (1, 1))
    lim = 9.0 if family == "gaussian" else 1.0
    one_d, _ = integrate.quad(lambda t: float(kernel_value(k, (t, 0.0)) / kernel_value(k, (0.0, 0.0))), -lim, lim,
                              points=[-1, 1] if lim > 1 else None, epsabs=1e-13)
    k0 = math.sqrt(float(kernel_value(k, (0.0, 0.0))))
    assert (one_d * k0) ** 2 == pytest.approx(1.0, abs=1e-6)


def test_inverse_transform_closed_forms_frozen():
    # 30-digit values of sin(2)/2, 3(sin 2 - 2 cos 2)/8 and exp(-2)
    assert inverse_transform_k(KernelSpec("uniform", (1, 1)), (2.0, 0.0)) == pytest.approx(0.454648713412840848, rel=1e-14)
    assert inverse_transform_k(KernelSpec("epanechnikov", (1, 1)), (2.0, 0.0)) == pytest.approx(0.653096662469987426, rel=1e-14)
    assert inverse_transform_k(KernelSpec("gaussian", (1, 1)), (2.0, 0.0)) == pytest.approx(0.135335283236612692, rel=1e-14)
    assert inverse_transform_k(KernelSpec("gaussian", (1, 1)), (1.0, 0.0)) == pytest.approx(math.exp(-0.5))


@pytest.mark.parametrize("family", FAMILIES)
def test_inverse_transform_at_zero_and_small_arguments(family):
    k = KernelSpec(family, (1, 1))
    assert inverse_transform_k(k, (0.0, 0.0)) == pytest.approx(1.0, abs=1e-15)
    # both sides of the series switch point against 30-digit evaluation
    exact = {
        "uniform": lambda x: mpmath.sin(x) / x,
        "epanechnikov": lambda x: 3 * (mpmath.sin(x) - x * mpmath.cos(x)) / x**3,
        "gaussian": lambda x: mpmath.exp(-x * x / 2),
    }[family]
    with mpmath.workdps(30):
        for x in (1e-3, 0.0999, 0.1001, 0.5):
            assert inverse_transform_k(k, (x, 0.0)) == pytest.approx(float(exact(mpmath.mpf(x))), abs=1e-13)


@pytest.mark.parametrize("family", FAMILIES)
def test_inverse_transform_matches_quadrature(family):
    # product kernel: the 2-D integral factors into two 1-D cosine integrals
    k = KernelSpec(family, (1, 1))
    k1 = lambda t: float(kernel_value(k, (t, 0.0))) / math.sqrt(float(kernel_value(k, (0.0, 0.0))))  # noqa: E731
    lim = 8.0 if family == "gaussian" else 1.0

    def axis(x):
        val, _ = integrate.quad(lambda t: k1(t) * math.cos(x * t), -lim, lim, limit=200, epsabs=1e-12)
        return val

    rng = np.random.default_rng(1)
    for x1, x2 in rng.uniform(-6, 6, size=(20, 2)):
        assert inverse_transform_k(k, (x1, x2)) == pytest.approx(axis(x1) * axis(x2), abs=1e-6)


def test_wrapped_uniform_single_shift():
    assert wrapped_kernel(KernelSpec("uniform", (0.5, 0.5)), (0.0, 0.0)) == pytest.approx(1.0)


def test_wrapped_frozen_values():
    # (1/h) K1(x/h) for epanechnikov, h=0.4, x=0.1 on one axis; x=0 on the other gives 0.75/h
    k = KernelSpec("epanechnikov", (0.4, 0.4))
    assert wrapped_kernel(k, (0.1, 0.0)) == pytest.approx(1.7578125 * 0.75 / 0.4, rel=1e-14)
    # periodized gaussian with h=3 at x=1, summed to convergence at 30 digits
    g = KernelSpec("gaussian", (3.0, 3.0))
    axis0 = float(wrapped_kernel(g, (0.0, 0.0))) ** 0.5
    assert float(wrapped_kernel(g, (1.0, 0.0))) / axis0 == pytest.approx(0.161065505908092108, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FAMILIES), st.floats(0.2, 2.0), st.floats(-10, 10), st.floats(-10, 10))
def test_wrapped_is_periodic(family, h, a, b):
    k = KernelSpec(family, (h, h))
    # keep away from the jump of the compact-support families, where rounding picks the side
    for x in (a, b):
        r = abs(x - 2 * math.pi * round(x / (2 * math.pi)))
        assume(abs(r - h) > 1e-9 and abs(2 * math.pi - r - h) > 1e-9)
    base = wrapped_kernel(k, (a, b))
    assert wrapped_kernel(k, (a + 2 * math.pi, b)) == pytest.approx(base, abs=1e-12)
    assert wrapped_kernel(k, (a, b - 2 * math.pi)) == pytest.approx(base, abs=1e-12)


@pytest.mark.parametrize("family", ["epanechnikov", "gaussian"])
def test_riemann_sum_near_one(family):
    assert riemann_sum(LatticeSpec(64, 64), KernelSpec(family, (0.4, 0.4))) == pytest.approx(1.0, abs=0.02)


def test_riemann_sum_uniform_counts_grid_points():
    # step 2 pi / 25.6 puts nine grid points inside [-1, 1] on each axis; the
    # indicator has a jump so the sum stays at (9 * step / 2)^2, not near 1
    step = 2 * math.pi / 25.6
    assert riemann_sum(LatticeSpec(64, 64), KernelSpec("uniform", (0.4, 0.4))) == pytest.approx((4.5 * step) ** 2, rel=1e-14)


def test_riemann_sum_direct_enumeration():
    spec = LatticeSpec(64, 64)
    k = KernelSpec("epanechnikov", (0.4, 0.4))
    s = np.arange(-40, 41)
    g1, g2 = np.meshgrid(2 * np.pi * s / (0.4 * 64), 2 * np.pi * s / (0.4 * 64), indexing="ij")
    direct = 4 * np.pi**2 / (0.16 * spec.size) * np.sum(kernel_value(k, (g1, g2)))
    assert riemann_sum(spec, k) == pytest.approx(direct, rel=1e-13)


def test_weights_uniform_nine_equal():
    # step 2 pi / (h d) = pi / 4 keeps |s| <= 1 inside the unit support
    w = build_weights(LatticeSpec(8, 8), KernelSpec("uniform", (1.0, 1.0)))
    d = w.as_dict()
    assert set(d) == {(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    for v in d.values():
        assert v == pytest.approx(1 / 9)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(4, 80), st.integers(4, 80), st.floats(0.1, 1.5))
def test_weights_normalized_and_even(family, d1, d2, h):
    spec = LatticeSpec(d1, d2)
    k = KernelSpec(family, (max(h, 2.0 / d1), max(h, 2.0 / d2)))
    w = build_weights(spec, k)
    assert w.weights.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_array_equal(w.weights, w.weights[::-1, ::-1])
    assert w.weight((1, 0)) == w.weight((-1, 0))


def test_weights_reject_small_bandwidth():
    with pytest.raises(BandwidthError):
        build_weights(LatticeSpec(8, 8), KernelSpec("epanechnikov", (0.2, 0.4)))


def test_smooth_matches_explicit_sum():
    spec = LatticeSpec(7, 9)
    w = build_weights(spec, KernelSpec("epanechnikov", (1.0, 0.8)))
    rng = np.random.default_rng(2)
    grid = rng.normal(size=spec.shape)
    out = w.smooth(grid)
    table = w.as_dict()
    for j1 in range(7):
        for j2 in range(9):
            expect = sum(p * grid[(j1 + s1) % 7, (j2 + s2) % 9] for (s1, s2), p in table.items())
            assert out[j1, j2] == pytest.approx(expect, abs=1e-13)


def test_bandwidth_rules():
    spec = LatticeSpec(64, 16)
    assert resolve_bandwidth("pow:0.5", spec) == pytest.approx((1 / 8, 1 / 4))
    assert resolve_bandwidth([0.3, 0.2], spec) == (0.3, 0.2)
    with pytest.raises(ValueError):
        resolve_bandwidth("sqrt", spec)
    assert make_kernel("gaussian", "pow:0.25", spec).bandwidth == pytest.approx((64**-0.25, 16**-0.25))


def test_validate_gaussian_report():
    rep = validate_kernel(KernelSpec("gaussian", (0.4, 0.4)), LatticeSpec(64, 64))
    assert rep.k1_residual < 0.02
    assert rep.k3_integral == pytest.approx(1.0, abs=1e-9)
    assert 0 < rep.k4_outside_l2_fraction < 1


def test_validate_uniform_integral():
    rep = validate_kernel(KernelSpec("uniform", (0.4, 0.4)), LatticeSpec(64, 64))
    assert rep.k3_integral == pytest.approx(1.0, abs=1e-9)


def test_validate_epanechnikov_lipschitz_stable():
    ratios = [validate_kernel(KernelSpec("epanechnikov", (h, h)), LatticeSpec(64, 64)).k5_lipschitz_ratio
              for h in (0.6, 0.4, 0.3)]
    assert max(ratios) / min(ratios) < 2.0


def test_k2_scaled_sup_is_order_one():
    for h in (0.6, 0.4, 0.3):
        rep = validate_kernel(KernelSpec("epanechnikov", (h, h)), LatticeSpec(64, 64))
        assert rep.k2_sup_scaled == pytest.approx(9 / 16, rel=1e-9)
