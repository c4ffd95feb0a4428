"""Uniform linear array geometry, spatial frequencies, and steering vectors.

All angles at the API boundary are in degrees; everything internal works on
the spatial frequency 2*pi*(d/lambda)*sin(angle), in radians per element.
"""

import numpy as np
from dataclasses import dataclass

__all__ = [
    "ArrayGeometry",
    "angle_to_spatial",
    "spatial_to_angle",
    "steering",
    "steering_matrix",
    "gain_kernel",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with `num_elements` elements spaced `element_spacing` wavelengths apart."""

    num_elements: int
    element_spacing: float = 0.5  # d / lambda

    def __post_init__(self):
        if self.num_elements < 1:
            raise ValueError(f"num_elements must be >= 1, got {self.num_elements}")
        if not self.element_spacing > 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing}")

    @property
    def spatial_limit(self) -> float:
        """Largest spatial frequency reachable by a physical angle, 2*pi*(d/lambda)."""
        return 2.0 * np.pi * self.element_spacing


def angle_to_spatial(angle_deg, geom: ArrayGeometry):
    """Map an angle in degrees to its spatial frequency 2*pi*(d/lambda)*sin(angle).

    Accepts scalars or arrays; raises ValueError outside [-90, 90] degrees.
    """
    a = np.asarray(angle_deg, dtype=float)
    if np.any(np.abs(a) > 90.0):
        raise ValueError(f"angle outside [-90, 90] degrees: {angle_deg}")
    sf = geom.spatial_limit * np.sin(np.radians(a))
    return float(sf) if np.isscalar(angle_deg) else sf


def spatial_to_angle(sf, geom: ArrayGeometry):
    """Inverse of angle_to_spatial, in degrees.

    Raises ValueError when |sf| exceeds the visible range 2*pi*(d/lambda),
    which signals an estimate outside visible space; callers clamp first.
    """
    s = np.asarray(sf, dtype=float)
    lim = geom.spatial_limit
    if np.any(np.abs(s) > lim):
        raise ValueError(f"spatial frequency outside visible range (+-{lim:.6g}): {sf}")
    a = np.degrees(np.arcsin(s / lim))
    return float(a) if np.isscalar(sf) else a


def steering(sf: float, geom: ArrayGeometry) -> np.ndarray:
    """Unit-norm array response: entry m is exp(j*m*sf)/sqrt(N)."""
    n = geom.num_elements
    return np.exp(1j * np.arange(n) * sf) / np.sqrt(n)


def steering_matrix(sfs, geom: ArrayGeometry) -> np.ndarray:
    """Stack steering vectors for a sequence of spatial frequencies, shape (N, len(sfs))."""
    n = geom.num_elements
    sfs = np.atleast_1d(np.asarray(sfs, dtype=float))
    return np.exp(1j * np.outer(np.arange(n), sfs)) / np.sqrt(n)


def gain_kernel(mu, nu, num_elements: int):
    """Squared inner product |a(nu)^H a(mu)|^2 of two unit-norm steering vectors.

    Evaluates sin^2(N*d/2) / (N^2 sin^2(d/2)) with d = mu - nu, continuously
    extended to 1 where d is a multiple of 2*pi (the 0/0 point of the ratio).
    """
    if num_elements < 1:
        raise ValueError(f"num_elements must be >= 1, got {num_elements}")
    n = num_elements
    half = 0.5 * (np.asarray(mu, dtype=float) - np.asarray(nu, dtype=float))
    s = np.sin(half)
    degenerate = np.abs(s) < 1e-15
    safe = np.where(degenerate, 1.0, s)
    ratio = np.sin(n * half) / (n * safe)
    out = np.where(degenerate, 1.0, ratio * ratio)
    return float(out) if out.ndim == 0 else out
