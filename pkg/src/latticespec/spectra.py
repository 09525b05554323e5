"""Fourier coefficients, periodogram and sample autocovariance on a lattice."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import FieldGrid
from .lattice import LatticeSpec, fourier_grid


@dataclass(frozen=True)
class FourierTable:
    """Real coefficients ``x[j1-1, j2-1]`` and ``y[j1-1, j2-1]`` for j in T.

    ``x(j) + i y(j) = |T|^{-1/2} sum_t V(t) exp(-i lambda_j . t)`` with the
    lattice sites t running from 1.
    """

    spec: LatticeSpec
    x: np.ndarray
    y: np.ndarray

    def at(self, j1, j2):
        """Coefficients at arbitrary integer indices (periodic)."""
        i1 = (np.asarray(j1) - 1) % self.spec.d1
        i2 = (np.asarray(j2) - 1) % self.spec.d2
        return self.x[i1, i2], self.y[i1, i2]


@dataclass(frozen=True)
class PeriodogramGrid:
    spec: LatticeSpec
    values: np.ndarray

    def at(self, j1, j2):
        """``I(j)`` for any integer pair, reduced modulo ``(d1, d2)``."""
        i1 = (np.asarray(j1) - 1) % self.spec.d1
        i2 = (np.asarray(j2) - 1) % self.spec.d2
        return self.values[i1, i2]

    def to_csv(self, path) -> None:
        l1, l2 = fourier_grid(self.spec)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j1", "j2", "lambda1", "lambda2", "I"])
            for j2 in range(1, self.spec.d2 + 1):
                for j1 in range(1, self.spec.d1 + 1):
                    w.writerow([j1, j2, f"{l1[j1 - 1]:.17g}", f"{l2[j2 - 1]:.17g}",
                                f"{self.values[j1 - 1, j2 - 1]:.17g}"])


@dataclass(frozen=True)
class AutocovTable:
    """Sample autocovariance ``r_hat[r1 + d1 - 1, r2 + d2 - 1]`` for |rk| < dk."""

    spec: LatticeSpec
    r_hat: np.ndarray

    def at(self, r1: int, r2: int) -> float:
        if abs(r1) >= self.spec.d1 or abs(r2) >= self.spec.d2:
            raise IndexError(f"lag ({r1}, {r2}) outside the lattice range")
        return float(self.r_hat[r1 + self.spec.d1 - 1, r2 + self.spec.d2 - 1])

    def lags(self):
        return (np.arange(-self.spec.d1 + 1, self.spec.d1), np.arange(-self.spec.d2 + 1, self.spec.d2))


def _phase(spec: LatticeSpec):
    # bin j (1..d) of a 0-based FFT needs exp(-i lambda_j) to account for t starting at 1
    l1, l2 = fourier_grid(spec)
    return np.exp(-1j * l1)[:, None] * np.exp(-1j * l2)[None, :]


def fourier_coefficients(field: FieldGrid) -> FourierTable:
    spec = field.spec
    z = np.fft.fft2(field.values)
    # FFT bin k corresponds to j = k for k >= 1 and to j = d for k = 0
    z = np.roll(z, shift=(-1, -1), axis=(0, 1))
    z = z * _phase(spec) / np.sqrt(spec.size)
    return FourierTable(spec, z.real.copy(), z.imag.copy())


def dft_naive_oracle(field: FieldGrid) -> FourierTable:
    """Direct evaluation of the coefficient sums, O(|T|^2).  Test oracle only."""
    spec = field.spec
    d1, d2 = spec.shape
    t1 = np.arange(1, d1 + 1)
    t2 = np.arange(1, d2 + 1)
    x = np.zeros(spec.shape)
    y = np.zeros(spec.shape)
    v = field.values
    norm = 1.0 / np.sqrt(spec.size)
    for j1 in range(1, d1 + 1):
        for j2 in range(1, d2 + 1):
            arg = 2.0 * np.pi * (j1 * t1[:, None] / d1 + j2 * t2[None, :] / d2)
            x[j1 - 1, j2 - 1] = norm * np.sum(v * np.cos(-arg))
            y[j1 - 1, j2 - 1] = norm * np.sum(v * np.sin(-arg))
    return FourierTable(spec, x, y)


def periodogram(table: FourierTable) -> PeriodogramGrid:
    values = table.x**2 + table.y**2
    # D intersected with T is the single index (d1, d2)
    values[-1, -1] = 0.0
    return PeriodogramGrid(table.spec, values)


def field_periodogram(field: FieldGrid) -> PeriodogramGrid:
    return periodogram(fourier_coefficients(field))


def sample_autocovariance(field: FieldGrid, mean: Optional[float] = None) -> AutocovTable:
    """Biased sample autocovariance, divided by |T| at every lag.

    ``mean=None`` centers at the sample mean; otherwise at the given known mean.
    """
    spec = field.spec
    d1, d2 = spec.shape
    c = field.values - (field.values.mean() if mean is None else mean)
    n1, n2 = 2 * d1 - 1, 2 * d2 - 1
    f = np.fft.fft2(c, s=(n1, n2))
    acf = np.fft.ifft2(f.conj() * f).real / spec.size
    # acf[r mod n] holds sum_j c(j) c(j + r)
    acf = np.roll(acf, shift=(d1 - 1, d2 - 1), axis=(0, 1))
    # symmetrize to remove rounding asymmetry
    acf = 0.5 * (acf + acf[::-1, ::-1])
    return AutocovTable(spec, acf)


def autocovariance_brute_force(field: FieldGrid, mean: Optional[float] = None) -> AutocovTable:
    """O(|T|^2) double loop over site pairs.  Test oracle only."""
    spec = field.spec
    d1, d2 = spec.shape
    c = field.values - (field.values.mean() if mean is None else mean)
    out = np.zeros((2 * d1 - 1, 2 * d2 - 1))
    for a1 in range(d1):
        for a2 in range(d2):
            for b1 in range(d1):
                for b2 in range(d2):
                    out[b1 - a1 + d1 - 1, b2 - a2 + d2 - 1] += c[a1, a2] * c[b1, b2]
    return AutocovTable(spec, out / spec.size)
