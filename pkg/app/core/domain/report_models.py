"""Result models: what an analysis measured and under which tolerances."""
from datetime import datetime
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import CubicHermiteSpline

from app.core.domain.models import CoefficientSpec, Trajectory

SCHEMA_VERSION = "1.0"


class OscillationReport(BaseModel):
    """Zero count against wandering length of one solution on [0, T]."""
    horizon: float = Field(gt=0.0)
    nu: int = Field(ge=0)
    zeros: List[float] = []
    multiple_zeros: List[float] = []  # zeros where |y'| is below the slope threshold
    gamma: float = Field(ge=0.0)
    gamma_tol: float
    bound: float  # (nu - 5) L / 2
    margin: float  # gamma - bound
    intermediate_bound: float  # (floor(nu/2) - 1) L - pi
    loop_bound: float  # (floor(nu/2) - 2) L
    phi_drop: Optional[float] = None  # None when the track passes a pole, where phi is undefined
    gamma_polyline: float
    polyline_deviation: float
    pole_events: List[float] = []
    region_constant: float

    @property
    def holds(self) -> bool:
        return self.margin > 0.0

    @property
    def intermediate_holds(self) -> bool:
        return self.gamma > self.intermediate_bound and self.gamma > self.loop_bound


class RateEstimate(BaseModel):
    """Finite-horizon surrogates of the upper and lower limits of gamma/t and pi nu/t."""
    horizons: List[float]
    gamma_series: List[float]
    nu_series: List[int]
    mu_series: List[float]
    nu_rate_series: List[float]
    mu_hat: float
    mu_check: float
    nu_hat: float
    nu_check: float
    tail_fraction: float = Field(gt=0.0, le=1.0)
    upper_rate_ok: bool
    lower_rate_ok: bool

    @model_validator(mode="after")
    def _ordered(self) -> "RateEstimate":
        if self.mu_check > self.mu_hat or self.nu_check > self.nu_hat:
            raise ValueError("lower estimates must not exceed upper estimates")
        return self


class FCurve(BaseModel):
    """
    A smooth 2 pi-periodic curve theta = F(phi) lying just outside Omega_plus.

    Tabulated on [pi, 3 pi] (last node repeats the first) together with its exact derivative.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    delta: float = Field(gt=0.0)
    phi_grid: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    grid_factor: int = Field(ge=2, description="grid nodes per mollifier half-width")
    mollifier_width: float
    length: float  # arc length of the graph on the sphere
    plain_integral: float  # integral of F over one period
    w11_distance: float

    _spline: Any = PrivateAttr(default=None)

    def model_post_init(self, __context: Any) -> None:
        self._spline = CubicHermiteSpline(self.phi_grid, self.F, self.dF)

    def _wrap(self, phi: np.ndarray) -> np.ndarray:
        lo = float(self.phi_grid[0])
        return lo + np.mod(np.asarray(phi, dtype=float) - lo, 2 * np.pi)

    def at(self, phi: np.ndarray) -> np.ndarray:
        return self._spline(self._wrap(phi))

    def slope(self, phi: np.ndarray) -> np.ndarray:
        return self._spline(self._wrap(phi), 1)

    def phi_rate(self, phi: np.ndarray) -> np.ndarray:
        """d phi/dt along solutions that follow the curve: tan F cos phi - sin^2 phi."""
        phi = np.asarray(phi, dtype=float)
        return np.tan(self.at(phi)) * np.cos(phi) - np.sin(phi) ** 2


class ExtremalModel(BaseModel):
    """
    The curve F, its time map and the equation whose solutions follow it.

    t(phi) decreases; `tau` holds t on the curve's grid, from 0 at phi = pi down to -T at 3 pi.
    phi0 inverts it on [0, T] and extends by phi0(kT + s) = phi0(s) - 2 pi k.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    curve: FCurve
    period: float = Field(gt=0.0)
    period_quad: float
    tau: np.ndarray
    period_residuals: List[float] = []
    coeffs: Optional[CoefficientSpec] = None

    _psi_spline: Any = PrivateAttr(default=None)

    def model_post_init(self, __context: Any) -> None:
        # On [0, T], phi0(t(phi) + T) = phi - 2 pi for phi in [pi, 3 pi]; slopes from the closed form.
        s = (self.tau + self.period)[::-1]
        phi = (self.curve.phi_grid - 2 * np.pi)[::-1]
        slopes = np.tan(self.curve.F[::-1]) * np.cos(phi) - np.sin(phi) ** 2
        self._psi_spline = CubicHermiteSpline(s, phi, slopes)

    @property
    def delta(self) -> float:
        return self.curve.delta

    def phi0(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.floor(t / self.period)
        return self._psi_spline(t - k * self.period) - 2 * np.pi * k

    def phi0_dot(self, t: np.ndarray) -> np.ndarray:
        return self.curve.phi_rate(self.phi0(t))

    def Theta0(self, t: np.ndarray) -> np.ndarray:
        return self.curve.at(self.phi0(t))

    def Theta0_dot(self, t: np.ndarray) -> np.ndarray:
        phi = self.phi0(t)
        return self.curve.slope(phi) * self.curve.phi_rate(phi)


class TrackedSolution(BaseModel):
    """
    A solution of an extremal equation followed segment by segment.

    Each segment starts on the prescribed direction P(phi0, Theta0) at its first time, with unit norm.
    `restart_jumps` holds the chord between a segment's final direction and the next start.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    segments: List[Trajectory]
    period_of: List[int]  # period index of each segment
    max_deviation: float = 0.0
    max_deviation_time: float = 0.0
    restart_jumps: List[float] = []
    hidden_crossings: List[float] = []  # boundaries where y changes sign across a restart

    @property
    def max_restart_jump(self) -> float:
        return max(self.restart_jumps, default=0.0)


class ExtremalReport(BaseModel):
    delta: float
    periods: int
    period: float
    nu: int
    expected_nu: int
    gamma: float
    gamma_one_period: float
    mu_est: float
    nu_est: float
    ratio: float
    floor: float  # L / (2 pi)
    ceiling: float  # (L + delta) / (2 pi)
    max_track_deviation: float
    max_deviation_time: float
    max_restart_jump: float
    segments: int
    grid_factor: int
    length_F: float
    plain_integral: float
    w11_distance: float
    period_residual: float
    max_equation_residual: float

    @property
    def holds(self) -> bool:
        return self.nu == self.expected_nu and self.floor < self.ratio


class SweepRow(BaseModel):
    index: int
    nu: Optional[int] = None
    gamma: Optional[float] = None
    bound: Optional[float] = None
    margin: Optional[float] = None
    status: Literal["ok", "margin_violation", "integration_error", "domain_error", "pole_error"]
    message: str = ""


class SweepSummary(BaseModel):
    size: int
    completed: int
    failures: int
    violations: int
    min_margin: Optional[float] = None


class RunReport(BaseModel):
    """Envelope written by every command: config echo, tolerances, result and the checks it passed."""
    schema_version: str = SCHEMA_VERSION
    command: Literal["constant", "analyze", "extremal", "sweep"]
    config: Dict[str, Any]
    tolerances: Dict[str, float]
    result: Dict[str, Any]
    checks: Dict[str, bool] = {}
    status: Literal["ok", "check_failed", "error"] = "ok"
    timing: Dict[str, Any] = Field(default_factory=lambda: {"started": datetime.now().isoformat()})

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "check_failed": 1, "error": 2}[self.status]

    def with_checks(self, checks: Dict[str, bool]) -> "RunReport":
        status = "ok" if all(checks.values()) else "check_failed"
        return self.model_copy(update={"checks": checks, "status": status})
