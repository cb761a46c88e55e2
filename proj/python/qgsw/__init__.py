"""Spectrum and bifurcating branches of doubly-connected QGSW V-states."""

from ._core import (
    DomainError,
    PreconditionError,
    RangeError,
    SearchExhausted,
    bessel_i,
    bessel_k,
    beltrami_k0,
    discriminant,
    eigenvalues,
    euler_eigenvalues,
    find_threshold,
    g_functional,
    kernel_vector,
    lambda_coupling,
    linearization_check,
    omega_limits,
    omega_rankine,
    product_ik,
    product_ik_integral,
    run,
    spectral_matrix,
    trace_branch,
    transversality_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
