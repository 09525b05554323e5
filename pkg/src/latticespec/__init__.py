"""Spectral analysis of stationary random fields on two-dimensional lattices."""
from .lattice import LatticeSpec, Partition, build_partition, frequency, in_D, reflect_index
from .fields import (
    FieldGrid,
    InnovationSpec,
    LinearMA,
    ModelSpecError,
    NonlinearAR,
    Volterra2,
    WhiteNoise,
    coupled_simulate,
    geometric_ma,
    simulate,
    theoretical_autocovariance,
    theoretical_spectrum,
)
from .spectra import field_periodogram, fourier_coefficients, periodogram, sample_autocovariance
from .kernels import KernelSpec, build_weights, make_kernel, validate_kernel
from .estimators import (
    detrend_least_squares,
    estimate_on_grid,
    kernel_density_estimate,
    lag_window_estimate,
)

__version__ = "0.1.0"
