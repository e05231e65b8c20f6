"""Radial model metric measure spaces.

Every space kind here reduces to the half-line ``[0, inf)`` with weight
``avr * N * sigma_N * r^(N-1)``. The kinds differ only in how ``avr`` is
interpreted (and forced).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constants import sigma


class SpaceKind(enum.Enum):
    EUCLIDEAN_RADIAL = "euclidean-radial"
    MODEL_CONE = "model-cone"
    ANGLE_DEFICIT_CONE = "angle-deficit-cone"

    @classmethod
    def parse(cls, text: str) -> "SpaceKind":
        key = text.strip().lower().replace("_", "").replace("-", "")
        aliases = {"euclidean": cls.EUCLIDEAN_RADIAL, "cone": cls.MODEL_CONE,
                   "angledeficit": cls.ANGLE_DEFICIT_CONE}
        for kind in cls:
            if kind.value.replace("-", "") == key:
                return kind
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown space kind {text!r}")


@dataclass(frozen=True)
class SpaceDescriptor:
    """An immutable radial model space.

    ``avr_param`` is forced to 1 for the Euclidean and model-cone kinds, so
    ``SpaceDescriptor(SpaceKind.MODEL_CONE, 2, 0.3).avr_param == 1``.
    """

    kind: SpaceKind
    N: float
    avr_param: float = 1.0
    base_point_label: str = "apex"

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, SpaceKind) else SpaceKind.parse(self.kind)
        N = float(self.N)
        if not N > 1.0 or math.isinf(N):
            raise ValueError(f"N must be a finite number > 1, got {self.N!r}")
        avr = 1.0 if kind is not SpaceKind.ANGLE_DEFICIT_CONE else float(self.avr_param)
        if not 0.0 < avr <= 1.0:
            raise ValueError(f"avr_param must lie in (0, 1], got {self.avr_param!r}")
        if self.base_point_label != "apex":
            raise ValueError("only the apex base point is modelled")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "avr_param", avr)

    @property
    def sigma_N(self) -> float:
        return sigma(self.N)

    def weight(self, r):
        """Radial density avr * N * sigma_N * r^(N-1) (vectorized)."""
        r = np.asarray(r, dtype=float)
        return self.avr_param * self.N * self.sigma_N * r ** (self.N - 1.0)

    def label(self) -> str:
        return f"{self.kind.value}(N={self.N:g},avr={self.avr_param:g})"

    def to_record(self) -> dict:
        return {"kind": self.kind.value, "N": repr(self.N), "avr": repr(self.avr_param)}

    @classmethod
    def from_record(cls, record: dict) -> "SpaceDescriptor":
        return cls(
            SpaceKind.parse(record["kind"]),
            float(record["N"]),
            float(record.get("avr", 1.0)),
        )


def model_cone(N: float) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.MODEL_CONE, N)


def angle_deficit_cone(N: float, alpha: float) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.ANGLE_DEFICIT_CONE, N, alpha)


def euclidean(N: float) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.EUCLIDEAN_RADIAL, N)


@dataclass(frozen=True)
class DensityPair:
    theta_at_base: float
    avr: float

    def __post_init__(self):
        if not 0.0 < self.avr <= 1.0:
            raise ValueError(f"avr must lie in (0, 1], got {self.avr!r}")
        if not self.theta_at_base >= self.avr:
            raise ValueError("theta must dominate avr")

    @property
    def ratio(self) -> float:
        return self.theta_at_base / self.avr


def ball_volume(space: SpaceDescriptor, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise ValueError("radius must be >= 0")
    out = space.avr_param * space.sigma_N * r_arr ** space.N
    return float(out) if out.ndim == 0 else out


def minkowski_surface(space: SpaceDescriptor, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise ValueError("radius must be > 0")
    out = space.weight(r_arr)
    return float(out) if out.ndim == 0 else out


def avr_analytic(space: SpaceDescriptor) -> float:
    return space.avr_param


def theta_plus(space: SpaceDescriptor, r):
    """theta^+_{N,r} = m^+(B_r) / (N sigma_N r^(N-1))."""
    r_arr = np.asarray(r, dtype=float)
    out = minkowski_surface(space, r_arr) / (space.N * space.sigma_N * r_arr ** (space.N - 1.0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    converged: bool


def avr_limit_estimate(space: SpaceDescriptor, r_max: float = 1e3, with_flag: bool = False):
    """Large-radius estimate of AVR via theta^+ at ``r_max``.

    With ``with_flag`` the result carries a convergence flag, comparing the
    ratio at ``r_max`` and ``r_max / 2``.
    """
    if not r_max > 0:
        raise ValueError("r_max must be > 0")
    value = theta_plus(space, r_max)
    if not with_flag:
        return value
    half = theta_plus(space, 0.5 * r_max)
    return LimitEstimate(value, abs(value - half) <= 1e-9 * max(abs(value), 1.0))


def density_theta(space: SpaceDescriptor) -> DensityPair:
    # ball_volume / (sigma_N r^N) is constant on these cones, so the
    # r -> 0 limit at the apex equals the r -> inf limit
    return DensityPair(space.avr_param, space.avr_param)


def pushforward_density(space: SpaceDescriptor, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise ValueError("radius must be > 0")
    return theta_plus(space, r_arr)


def synthetic_theta_profile(avr: float, scale: float = 1.0) -> Callable:
    """A decreasing surrogate theta^+ profile running from 1 at r=0 to ``avr``.

    Not claimed to come from an actual CD(0,N) space; used only for
    sweep demonstrations.
    """
    if not 0.0 < avr <= 1.0:
        raise ValueError("avr must lie in (0, 1]")

    def profile(r):
        r = np.asarray(r, dtype=float)
        return avr + (1.0 - avr) * np.exp(-r / scale)

    profile.synthetic = True
    profile.avr = avr
    return profile
