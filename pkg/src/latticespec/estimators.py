"""Kernel spectral density estimators and the estimated-field workflow."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .fields import FieldGrid
from .kernels import (
    KernelSpec,
    WeightTable,
    _axis_weights,
    _check_bandwidth,
    _factor,
    _factor_transform,
    build_weights,
)
from .lattice import LatticeSpec, build_partition, fourier_grid
from .spectra import (
    FourierTable,
    PeriodogramGrid,
    field_periodogram,
    fourier_coefficients,
    periodogram,
    sample_autocovariance,
)

FOUR_PI2 = 4.0 * np.pi**2
LAG_WINDOW_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# grids


def uniform_axis(m: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(m) / m


def grid_axes(spec: LatticeSpec, grid: Union[str, tuple]):
    """Per-axis evaluation frequencies for ``"fourier"``, ``"uniform:<m>"`` or ``("uniform", m)``."""
    if isinstance(grid, str):
        if grid == "fourier":
            return fourier_grid(spec)
        if grid.startswith("uniform:"):
            m = int(grid.split(":", 1)[1])
            return uniform_axis(m), uniform_axis(m)
    elif isinstance(grid, tuple) and len(grid) == 2 and grid[0] == "uniform":
        return uniform_axis(int(grid[1])), uniform_axis(int(grid[1]))
    raise ValueError(f"unknown grid {grid!r}; expected 'fourier' or 'uniform:<m>'")


# ---------------------------------------------------------------------------
# kernel-smoothed periodogram


def _axis_matrix(family: str, h: float, lam: np.ndarray, d: int) -> np.ndarray:
    """R[a, t] = sum_c K1((lam_a - lambda_t - 2 pi c) / h), t = 1..d."""
    lt = 2.0 * np.pi * np.arange(1, d + 1) / d
    x = np.asarray(lam, dtype=float)[:, None] - lt[None, :]
    x = x - 2.0 * np.pi * np.round(x / (2.0 * np.pi))
    reach = int(np.ceil((8.0 if family == "gaussian" else 1.0) * h / (2.0 * np.pi))) + 1
    out = np.zeros_like(x)
    for c in range(-reach, reach + 1):
        out += _factor(family, (x + 2.0 * np.pi * c) / h)
    return out


def _smoothed(values: np.ndarray, spec: LatticeSpec, kernel: KernelSpec, lam1, lam2) -> np.ndarray:
    _check_bandwidth(spec, kernel)
    h1, h2 = kernel.bandwidth
    r1 = _axis_matrix(kernel.family, h1, lam1, spec.d1)
    r2 = _axis_matrix(kernel.family, h2, lam2, spec.d2)
    denom = _axis_weights(kernel.family, h1, spec.d1).total * _axis_weights(kernel.family, h2, spec.d2).total
    return r1 @ values @ r2.T / denom


def kernel_density_estimate(pg: PeriodogramGrid, kernel: KernelSpec, lam) -> float:
    """Normalized kernel average of periodogram ordinates at frequency ``lam``."""
    out = _smoothed(pg.values, pg.spec, kernel, np.atleast_1d(lam[0]), np.atleast_1d(lam[1]))
    return float(out[0, 0]) / FOUR_PI2


def kernel_density_grid(pg: PeriodogramGrid, kernel: KernelSpec, lam1, lam2) -> np.ndarray:
    return _smoothed(pg.values, pg.spec, kernel, lam1, lam2) / FOUR_PI2


# ---------------------------------------------------------------------------
# lag-window form


def _lag_window_grid(field: FieldGrid, kernel: KernelSpec, lam1, lam2) -> np.ndarray:
    spec = field.spec
    acov = sample_autocovariance(field)
    r1, r2 = acov.lags()
    h1, h2 = kernel.bandwidth
    k1 = _factor_transform(kernel.family, r1 * h1)
    k2 = _factor_transform(kernel.family, r2 * h2)
    k1 = np.where(np.abs(k1) < LAG_WINDOW_FLOOR, 0.0, k1)
    k2 = np.where(np.abs(k2) < LAG_WINDOW_FLOOR, 0.0, k2)
    w = acov.r_hat * np.outer(k1, k2)
    e1 = np.exp(-1j * np.outer(np.asarray(lam1, dtype=float), r1))
    e2 = np.exp(-1j * np.outer(np.asarray(lam2, dtype=float), r2))
    return (e1 @ w @ e2.T) / FOUR_PI2


def lag_window_estimate(field: FieldGrid, kernel: KernelSpec, lam, return_complex: bool = False):
    """Lag-window estimate at ``lam`` from the mean-corrected sample autocovariance."""
    out = _lag_window_grid(field, kernel, np.atleast_1d(lam[0]), np.atleast_1d(lam[1]))[0, 0]
    return complex(out) if return_complex else float(out.real)


def lag_window_grid(field: FieldGrid, kernel: KernelSpec, lam1, lam2) -> np.ndarray:
    return _lag_window_grid(field, kernel, lam1, lam2).real


# ---------------------------------------------------------------------------
# batch evaluation


@dataclass
class SpectralEstimate:
    spec: LatticeSpec
    kernel: KernelSpec
    grid: str
    lam1: np.ndarray
    lam2: np.ndarray
    values: np.ndarray
    f_true: Optional[np.ndarray] = None

    @property
    def abs_err(self) -> Optional[np.ndarray]:
        return None if self.f_true is None else np.abs(self.values - self.f_true)

    def sup_error(self) -> float:
        if self.f_true is None:
            raise ValueError("no reference spectrum attached")
        return float(self.abs_err.max())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["lambda1", "lambda2", "f_hat"]
            if self.f_true is not None:
                header += ["f_true", "abs_err"]
            w.writerow(header)
            err = self.abs_err
            for b, l2 in enumerate(self.lam2):
                for a, l1 in enumerate(self.lam1):
                    row = [f"{l1:.17g}", f"{l2:.17g}", f"{self.values[a, b]:.17g}"]
                    if self.f_true is not None:
                        row += [f"{self.f_true[a, b]:.17g}", f"{err[a, b]:.17g}"]
                    w.writerow(row)


SpectrumFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def estimate_on_grid(source: Union[PeriodogramGrid, FieldGrid], kernel: KernelSpec, grid="fourier",
                     method: str = "kernel", reference: Optional[SpectrumFn] = None) -> SpectralEstimate:
    """Evaluate one of the two estimator forms on a frequency grid.

    ``method="kernel"`` smooths the periodogram; ``method="lag"`` uses the
    lag-window form and needs a field.  ``reference(l1, l2)`` attaches the
    true spectrum for error columns.
    """
    spec = source.spec
    lam1, lam2 = grid_axes(spec, grid)
    if method == "kernel":
        pg = source if isinstance(source, PeriodogramGrid) else field_periodogram(source)
        values = kernel_density_grid(pg, kernel, lam1, lam2)
    elif method == "lag":
        if not isinstance(source, FieldGrid):
            raise TypeError("the lag-window form needs the field itself")
        values = lag_window_grid(source, kernel, lam1, lam2)
    else:
        raise ValueError(f"unknown method {method!r}")
    f_true = None
    if reference is not None:
        f_true = np.asarray(reference(lam1[:, None], lam2[None, :]), dtype=float)
        f_true = np.broadcast_to(f_true, values.shape).copy()
    label = grid if isinstance(grid, str) else f"uniform:{grid[1]}"
    return SpectralEstimate(spec, kernel, label, lam1, lam2, values, f_true)


def equivalence_gap(field: FieldGrid, kernel: KernelSpec) -> float:
    """sup over the Fourier grid of |smoothed periodogram - lag window| / sup smoothed periodogram."""
    lam1, lam2 = fourier_grid(field.spec)
    f_hat = kernel_density_grid(field_periodogram(field), kernel, lam1, lam2)
    f_tilde = lag_window_grid(field, kernel, lam1, lam2)
    top = np.max(f_hat)
    if top == 0:
        return 0.0 if np.max(np.abs(f_tilde)) == 0 else float("inf")
    return float(np.max(np.abs(f_hat - f_tilde)) / top)


# ---------------------------------------------------------------------------
# estimated fields


class DesignError(ValueError):
    pass


@dataclass
class DetrendResult:
    v_hat: FieldGrid
    trend: FieldGrid
    coefficients: np.ndarray
    mse_vs_truth: Optional[float] = None


def polynomial_basis(spec: LatticeSpec, degree: int) -> np.ndarray:
    """Design matrix (|T|, p) of monomials in (t1/d1, t2/d2) up to total degree, t1 fastest."""
    t1, t2 = np.meshgrid(np.arange(1, spec.d1 + 1) / spec.d1, np.arange(1, spec.d2 + 1) / spec.d2, indexing="ij")
    u1 = t1.ravel(order="F")
    u2 = t2.ravel(order="F")
    cols = [u1**a * u2 ** (k - a) for k in range(degree + 1) for a in range(k, -1, -1)]
    return np.column_stack(cols)


def detrend_least_squares(y: FieldGrid, degree: int, truth: Optional[FieldGrid] = None) -> DetrendResult:
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    spec = y.spec
    p = (degree + 1) * (degree + 2) // 2
    if 4 * p > spec.size:
        raise DesignError(f"{p} basis functions need at least {4 * p} sites, lattice has {spec.size}")
    x = polynomial_basis(spec, degree)
    if np.linalg.matrix_rank(x) < p:
        raise DesignError("rank-deficient trend design")
    yv = y.flat()
    coef, *_ = np.linalg.lstsq(x, yv, rcond=None)
    fitted = x @ coef
    resid = yv - fitted
    v_hat = FieldGrid.from_flat(spec, resid)
    trend = FieldGrid.from_flat(spec, fitted)
    mse = None
    if truth is not None:
        mse = float(np.mean((truth.values - v_hat.values) ** 2))
    return DetrendResult(v_hat, trend, coef, mse)


def polynomial_trend(spec: LatticeSpec, terms) -> FieldGrid:
    """Trend ``sum c * (t1/d1)^a (t2/d2)^b`` from ``[(a, b, c), ...]``."""
    t1, t2 = np.meshgrid(np.arange(1, spec.d1 + 1) / spec.d1, np.arange(1, spec.d2 + 1) / spec.d2, indexing="ij")
    out = np.zeros(spec.shape)
    for a, b, c in terms:
        out += c * t1**a * t2**b
    return FieldGrid(spec, out)


THM5_STATS = ("mse", "a", "b_i", "b_ii", "b_iii", "b_iv", "c_i", "c_ii", "c_iii", "c_iv")


def estimated_field_report(v: FieldGrid, v_hat: FieldGrid, kernel: KernelSpec,
                           weights: Optional[WeightTable], f_grid: np.ndarray, q: float = 4.5) -> dict:
    """Discrepancies between spectral summaries of a field and of its estimate.

    ``f_grid`` holds the true spectrum at the Fourier frequencies, shape
    (d1, d2).  Signed averages and weighted sums are reported in absolute
    value so that every entry is a nonnegative distance.
    """
    if v.spec != v_hat.spec:
        raise ValueError(f"lattice mismatch: {v.spec.label()} vs {v_hat.spec.label()}")
    spec = v.spec
    if weights is None:
        weights = build_weights(spec, kernel)
    if weights.spec != spec:
        raise ValueError("weights were built for a different lattice")
    part = build_partition(spec)
    nidx = part.n_index

    tv, tw = fourier_coefficients(v), fourier_coefficients(v_hat)
    iv, iw = periodogram(tv).values, periodogram(tw).values
    lam1, lam2 = fourier_grid(spec)
    fhat_v = _smoothed(iv, spec, kernel, lam1, lam2) / FOUR_PI2
    fhat_w = _smoothed(iw, spec, kernel, lam1, lam2) / FOUR_PI2

    f = np.asarray(f_grid, dtype=float)
    dxy = (tv.x - tw.x) + (tv.y - tw.y)
    out = {
        "mse": float(np.mean((v.values - v_hat.values) ** 2)),
        "a": float(np.max(np.abs(fhat_v - fhat_w))),
        "b_i": abs(float(np.mean((dxy / np.sqrt(f))[nidx]))),
        "b_ii": abs(float(np.mean(((iv - iw) / f)[nidx]))),
        "b_iii": abs(float(np.mean(((iv**2 - iw**2) / f**2)[nidx]))),
        "b_iv": abs(float(np.mean(((iv**q - iw**q) / f**q)[nidx]))),
        "c_i": float(np.max(np.abs(weights.smooth(dxy)[nidx]))),
        "c_ii": float(np.max(np.abs(weights.smooth(iv - iw)[nidx]))),
        "c_iii": float(np.max(np.abs(weights.smooth(iv**2 - iw**2)[nidx]))),
        "c_iv": float(np.max(np.abs(weights.smooth(iv**q - iw**q)[nidx]))),
    }
    return out
