"""Quantum Fisher information of the long-range Kitaev chain."""

from .asymptotics import (
    EmConfig,
    FiniteSizeWindow,
    PerturbedFamily,
    euler_maclaurin_sum,
    finite_size_window,
    predict_delta_scaling,
    remainder_scaling_probe,
    sine_power_integral,
)
from .chain import (
    ChainParams,
    Channel,
    DecayKernel,
    KernelKind,
    dispersion,
    make_grid,
    mode_quantities,
    structure_factor,
    structure_factors,
    validate_kernel,
)
from .errors import DomainError, FitError, QuadratureError, ResourceError, SingularModeError
from .fitting import FitModel, ScalingFit, fit_polylog, fit_power
from .qfi import ProbeSpec, QfiResult, gamma, qfi, qfi_optimal, qfi_uncontrolled

__version__ = "0.1.0"
