"""Smoothing kernels on R^2, their periodized versions and discrete weights.

All shipped families are products of a one-dimensional even density, which
the implementation exploits: wrapped kernels, weights and lag windows all
factor over the two axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from scipy import integrate

from .lattice import LatticeSpec, fourier_grid

TWO_PI = 2.0 * np.pi
GAUSS_CUTOFF = 8.0

FAMILIES = ("uniform", "epanechnikov", "gaussian")
_ALIASES = {
    "uniformproduct": "uniform",
    "epanechnikovproduct": "epanechnikov",
}


class BandwidthError(ValueError):
    pass


def _factor(family: str, t):
    t = np.asarray(t, dtype=float)
    if family == "uniform":
        return np.where(np.abs(t) <= 1.0, 0.5, 0.0)
    if family == "epanechnikov":
        return np.where(np.abs(t) <= 1.0, 0.75 * (1.0 - t * t), 0.0)
    out = np.exp(-0.5 * t * t) / np.sqrt(TWO_PI)
    return np.where(np.abs(t) <= GAUSS_CUTOFF, out, 0.0)


def _factor_untruncated(family: str, t):
    t = np.asarray(t, dtype=float)
    if family == "gaussian":
        return np.exp(-0.5 * t * t) / np.sqrt(TWO_PI)
    return _factor(family, t)


def _factor_transform(family: str, x):
    x = np.asarray(x, dtype=float)
    if family == "gaussian":
        return np.exp(-0.5 * x * x)
    # sin x - x cos x cancels to about x^3/3, so switch to the Taylor series
    # well before the closed form loses digits
    small = np.abs(x) < 0.1
    xs = np.where(small, 1.0, x)
    x2 = x * x
    if family == "uniform":
        out = np.sin(xs) / xs
        series = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    else:
        out = 3.0 * (np.sin(xs) - xs * np.cos(xs)) / xs**3
        series = 1.0 - x2 / 10.0 + x2**2 / 280.0 - x2**3 / 15120.0 + x2**4 / 1330560.0
    return np.where(small, series, out)


def _support(family: str) -> float:
    return GAUSS_CUTOFF if family == "gaussian" else 1.0


@dataclass(frozen=True)
class KernelSpec:
    family: str
    bandwidth: Tuple[float, float]

    def __post_init__(self):
        fam = _ALIASES.get(self.family.lower(), self.family.lower())
        if fam not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        h = tuple(float(v) for v in self.bandwidth)
        if len(h) != 2 or not all(v > 0 for v in h):
            raise ValueError(f"bandwidth must be a positive pair, got {self.bandwidth!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "bandwidth", h)

    @property
    def area(self) -> float:
        return self.bandwidth[0] * self.bandwidth[1]

    @property
    def support(self) -> float:
        return _support(self.family)


def resolve_bandwidth(rule: Union[str, Tuple[float, float], list], spec: LatticeSpec) -> Tuple[float, float]:
    """Explicit pair, or ``"pow:<beta>"`` meaning ``h_k = d_k ** -beta``."""
    if isinstance(rule, str):
        if not rule.startswith("pow:"):
            raise ValueError(f"bandwidth rule must be 'pow:<beta>' or a pair, got {rule!r}")
        beta = float(rule[4:])
        return (spec.d1**-beta, spec.d2**-beta)
    h = tuple(float(v) for v in rule)
    if len(h) != 2:
        raise ValueError(f"bandwidth pair expected, got {rule!r}")
    return h


def make_kernel(family: str, bandwidth, spec: LatticeSpec) -> KernelSpec:
    return KernelSpec(family, resolve_bandwidth(bandwidth, spec))


def kernel_value(kernel: KernelSpec, t) -> float:
    """K(t1, t2) with no bandwidth scaling."""
    return _factor(kernel.family, t[0]) * _factor(kernel.family, t[1])


def inverse_transform_k(kernel: KernelSpec, x):
    """``k(x) = integral K(l) exp(i x.l) dl``, closed form."""
    return _factor_transform(kernel.family, x[0]) * _factor_transform(kernel.family, x[1])


def _wrapped_axis(family: str, h: float, x) -> np.ndarray:
    """``(1/h) sum_c K1((x + 2 pi c) / h)`` for each entry of x."""
    x = np.asarray(x, dtype=float)
    base = x - TWO_PI * np.round(x / TWO_PI)
    reach = int(np.ceil(_support(family) * h / TWO_PI)) + 1
    out = np.zeros_like(base)
    for c in range(-reach, reach + 1):
        out += _factor(family, (base + TWO_PI * c) / h)
    return out / h


def wrapped_kernel(kernel: KernelSpec, lam):
    """Bandwidth-scaled kernel periodized with period 2 pi on each axis."""
    h1, h2 = kernel.bandwidth
    return _wrapped_axis(kernel.family, h1, lam[0]) * _wrapped_axis(kernel.family, h2, lam[1])


def _check_bandwidth(spec: LatticeSpec, kernel: KernelSpec):
    for h, d in zip(kernel.bandwidth, spec.shape):
        if h * d < 2:
            raise BandwidthError(f"bandwidth {h:g} too small for lattice side {d} (need h*d >= 2)")


@dataclass(frozen=True)
class AxisWeights:
    offsets: np.ndarray  # integer shifts s
    raw: np.ndarray  # K1(2 pi s / (h d))

    @property
    def total(self) -> float:
        return float(self.raw.sum())

    @property
    def normalized(self) -> np.ndarray:
        return self.raw / self.raw.sum()


def _axis_weights(family: str, h: float, d: int) -> AxisWeights:
    step = TWO_PI / (h * d)
    smax = int(np.floor(_support(family) / step))
    s = np.arange(-smax, smax + 1)
    return AxisWeights(s, _factor(family, s * step))


@dataclass(frozen=True)
class WeightTable:
    """Normalized weights ``p_s`` proportional to ``K(2 pi s1/(h1 d1), 2 pi s2/(h2 d2))``."""

    spec: LatticeSpec
    kernel: KernelSpec
    axis1: AxisWeights
    axis2: AxisWeights

    @property
    def offsets(self):
        return self.axis1.offsets, self.axis2.offsets

    @property
    def weights(self) -> np.ndarray:
        """Dense array ``weights[a, b]`` for ``s = (offsets1[a], offsets2[b])``."""
        return np.outer(self.axis1.normalized, self.axis2.normalized)

    def weight(self, s) -> float:
        i = s[0] + self.axis1.offsets[-1]
        k = s[1] + self.axis2.offsets[-1]
        if not (0 <= i < self.axis1.offsets.size and 0 <= k < self.axis2.offsets.size):
            return 0.0
        return float(self.axis1.normalized[i] * self.axis2.normalized[k])

    def as_dict(self):
        w = self.weights
        return {
            (int(a), int(b)): float(w[i, k])
            for i, a in enumerate(self.axis1.offsets)
            for k, b in enumerate(self.axis2.offsets)
            if w[i, k] > 0
        }

    @cached_property
    def _circulants(self):
        return (
            _circulant(self.axis1.offsets, self.axis1.normalized, self.spec.d1),
            _circulant(self.axis2.offsets, self.axis2.normalized, self.spec.d2),
        )

    def smooth(self, grid: np.ndarray) -> np.ndarray:
        """``out[j] = sum_s p_s grid[j + s]`` with periodic indexing on T."""
        c1, c2 = self._circulants
        return c1 @ grid @ c2.T


def _circulant(offsets, w, d) -> np.ndarray:
    # C[j, j'] = sum of w_s over s with j + s = j' (mod d)
    c = np.zeros((d, d))
    rows = np.arange(d)
    for s, ws in zip(offsets, w):
        c[rows, (rows + s) % d] += ws
    return c


def build_weights(spec: LatticeSpec, kernel: KernelSpec) -> WeightTable:
    _check_bandwidth(spec, kernel)
    h1, h2 = kernel.bandwidth
    return WeightTable(spec, kernel, _axis_weights(kernel.family, h1, spec.d1), _axis_weights(kernel.family, h2, spec.d2))


def riemann_sum(spec: LatticeSpec, kernel: KernelSpec) -> float:
    """``4 pi^2 / (|h||T|) * sum_j K(2 pi j1/(h1 d1), 2 pi j2/(h2 d2))``; tends to 1."""
    out = 1.0
    for h, d in zip(kernel.bandwidth, spec.shape):
        aw = _axis_weights(kernel.family, h, d)
        out *= TWO_PI / (h * d) * aw.total
    return out


@dataclass
class KernelReport:
    k1_residual: float
    k2_sup_scaled: float
    k3_integral: float
    k4_outside_l2_fraction: float
    k5_lipschitz_ratio: float

    def as_dict(self):
        return dict(self.__dict__)


def _axis_l1(family: str) -> float:
    s = _support(family) if family != "gaussian" else np.inf
    val, _ = integrate.quad(lambda t: abs(float(_factor_untruncated(family, t))), -s, s, epsabs=1e-13, epsrel=1e-13)
    return val


def _axis_k_inside_fraction(family: str) -> float:
    inside, _ = integrate.quad(lambda x: float(_factor_transform(family, x)) ** 2, -1.0, 1.0, epsabs=1e-13)
    if family == "gaussian":
        total = np.sqrt(np.pi)
    else:
        # Parseval: int k^2 dx = 2 pi int K1^2
        s = _support(family)
        k2, _ = integrate.quad(lambda t: float(_factor(family, t)) ** 2, -s, s, epsabs=1e-13)
        total = TWO_PI * k2
    return inside / total


def validate_kernel(kernel: KernelSpec, spec: LatticeSpec, uniform_points: int = 64) -> KernelReport:
    """Numerical probes of the kernel regularity conditions; diagnostics only."""
    fam = kernel.family
    h1, h2 = kernel.bandwidth
    k1 = abs(riemann_sum(spec, kernel) - 1.0)

    u = TWO_PI * np.arange(uniform_points) / uniform_points
    l1, l2 = fourier_grid(spec)
    g1 = np.concatenate([l1, u])
    g2 = np.concatenate([l2, u])
    kh = np.outer(_wrapped_axis(fam, h1, g1), _wrapped_axis(fam, h2, g2))
    k2 = float(np.max(np.abs(kh)) * kernel.area)

    k3 = _axis_l1(fam) ** 2
    k4 = 1.0 - _axis_k_inside_fraction(fam) ** 2

    kf = np.outer(_wrapped_axis(fam, h1, l1), _wrapped_axis(fam, h2, l2))
    diff1 = np.abs(np.roll(kf, -1, axis=0) - kf) / (TWO_PI / spec.d1)
    diff2 = np.abs(np.roll(kf, -1, axis=1) - kf) / (TWO_PI / spec.d2)
    k5 = float(kernel.area**1.5 * max(diff1.max(), diff2.max()))
    return KernelReport(k1, k2, k3, k4, k5)
