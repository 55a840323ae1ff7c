"""Models for the unit sphere of phase directions."""
from enum import Enum
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

EMBEDDING_TOL = 1e-14


class Region(str, Enum):
    OMEGA_PLUS = "omega_plus"
    OMEGA_MINUS = "omega_minus"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class SphericalPoint(BaseModel):
    """Direction of x as (phi, theta); phi is unwrapped, never reduced mod 2pi."""
    model_config = ConfigDict(frozen=True)

    phi: float
    theta: float = Field(ge=-np.pi / 2, le=np.pi / 2)

    def embed(self) -> np.ndarray:
        """P(phi, theta) = (cos theta cos phi, cos theta sin phi, sin theta)."""
        ct = np.cos(self.theta)
        return np.array([ct * np.cos(self.phi), ct * np.sin(self.phi), np.sin(self.theta)])


class SphericalTrack(BaseModel):
    """
    Sampled spherical image of a trajectory.

    Samples are stored column-wise: `t`, `phi`, `theta` share one length. `slack` is the
    discretization slack a construction (surgery) attaches to its output, zero for raw tracks.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    pole_events: List[float] = []
    slack: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_samples(self) -> "SphericalTrack":
        n = len(self.t)
        if n < 1 or self.phi.shape != (n,) or self.theta.shape != (n,):
            raise ValueError("t, phi and theta must be non-empty and of equal length")
        if np.any(np.diff(self.t) < 0):
            raise ValueError("sample times must be non-decreasing")
        if np.any(np.abs(self.theta) > np.pi / 2 + EMBEDDING_TOL):
            raise ValueError("theta must lie in [-pi/2, pi/2]")
        if np.any(np.abs(np.diff(self.phi)) >= np.pi):
            raise ValueError("phi jumps by pi or more between adjacent samples")
        return self

    def __len__(self) -> int:
        return len(self.t)

    def points(self) -> np.ndarray:
        """Embedded unit vectors, shape (n, 3)."""
        ct = np.cos(self.theta)
        return np.column_stack([ct * np.cos(self.phi), ct * np.sin(self.phi), np.sin(self.theta)])

    def point(self, i: int) -> SphericalPoint:
        return SphericalPoint(phi=float(self.phi[i]), theta=float(self.theta[i]))

    def between(self, t0: float, t1: float) -> "SphericalTrack":
        """Sub-track of samples with t0 <= t <= t1."""
        keep = (self.t >= t0) & (self.t <= t1)
        return SphericalTrack(
            t=self.t[keep],
            phi=self.phi[keep],
            theta=self.theta[keep],
            pole_events=[p for p in self.pole_events if t0 <= p <= t1],
        )


class RegionConstant(BaseModel):
    """Length L of the boundary of the region Omega_plus, with the error estimate of its method."""
    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=np.pi, lt=2 * np.pi)
    error_estimate: float = Field(ge=0.0)
    method: Literal["quadrature", "polyline"]
    resolution: float

    @property
    def ratio(self) -> float:
        """L / (2 pi), the sharp constant relating wandering to oscillation."""
        return self.value / (2 * np.pi)
