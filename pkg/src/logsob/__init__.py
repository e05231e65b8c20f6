"""Numerical verification of sharp L^p log-Sobolev, hypercontractivity and
Gaussian log-Sobolev inequalities on radial model cones."""
from .calculus import QuadratureSpec, RadialFunction, cheeger_energy, entropy, integrate_weighted, lp_norm
from .constants import SharpConstantSet, conjugate, hyper_prefactor, lsc_constant
from .hopf_lax import HopfLaxParams, hopf_lax_bruteforce, hopf_lax_fast, hopf_lax_transform
from .rearrange import distribution, polya_szego_check, rearrangement
from .reports import SweepResult, VerificationReport
from .spaces import SpaceDescriptor, SpaceKind, angle_deficit_cone, euclidean, model_cone

__version__ = "0.1.0"

__all__ = [
    "HopfLaxParams",
    "QuadratureSpec",
    "RadialFunction",
    "SharpConstantSet",
    "SpaceDescriptor",
    "SpaceKind",
    "SweepResult",
    "VerificationReport",
    "angle_deficit_cone",
    "cheeger_energy",
    "conjugate",
    "distribution",
    "entropy",
    "euclidean",
    "hopf_lax_bruteforce",
    "hopf_lax_fast",
    "hopf_lax_transform",
    "hyper_prefactor",
    "integrate_weighted",
    "lp_norm",
    "lsc_constant",
    "model_cone",
    "polya_szego_check",
    "rearrangement",
]
