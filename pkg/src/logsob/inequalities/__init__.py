"""End-to-end verifiers for the log-Sobolev, hypercontractivity and Gaussian inequalities."""
from ..reports import SweepResult, VerificationReport
from .gaussian import (
    f_asymptotics,
    gaussian_G,
    gaussian_hyper_verify,
    gaussian_lsi_verify,
    gaussian_moments,
    gaussian_sharpness_sweep,
)
from .hyper import hyper_sharpness_probe, hypercontractivity_verify, log_ratio_limit, optimal_y
from .lsi import (
    implied_lsi_constant,
    isoperimetry_verify,
    lsi_gaussian_identity,
    lsi_sharpness_sweep,
    lsi_verify,
    onedim_lsi_verify,
)

__all__ = [
    "SweepResult",
    "VerificationReport",
    "f_asymptotics",
    "gaussian_G",
    "gaussian_hyper_verify",
    "gaussian_lsi_verify",
    "gaussian_moments",
    "gaussian_sharpness_sweep",
    "hyper_sharpness_probe",
    "hypercontractivity_verify",
    "implied_lsi_constant",
    "isoperimetry_verify",
    "log_ratio_limit",
    "lsi_gaussian_identity",
    "lsi_sharpness_sweep",
    "lsi_verify",
    "onedim_lsi_verify",
    "optimal_y",
]
