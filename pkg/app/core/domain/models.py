"""
Domain models for the third-order equation

    y''' + a(t) y'' + b(t) y' + c(t) y = 0

and its numerical solutions.
"""
from typing import Any, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import CubicSpline

from app.core.domain.errors import OutOfHorizonError, PreconditionError
from app.core.domain.expression import Expression, parse


class State3(BaseModel):
    """Phase point x = (y, y', y'')."""
    model_config = ConfigDict(frozen=True)

    y: float
    dy: float
    ddy: float

    @classmethod
    def from_array(cls, values: Any) -> "State3":
        y, dy, ddy = (float(v) for v in values)
        return cls(y=y, dy=dy, ddy=ddy)

    def as_array(self) -> np.ndarray:
        return np.array([self.y, self.dy, self.ddy])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def scaled(self, factor: float) -> "State3":
        return State3(y=factor * self.y, dy=factor * self.dy, ddy=factor * self.ddy)


class CoefficientSpec(BaseModel):
    """
    The coefficients a, b, c of the equation.

    Either three parsed expressions, or three tabulated columns interpolated by a cubic spline
    (the extremal construction produces its coefficients numerically). A tabulated spec with a
    `period` is extended periodically from its single-period table.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["expression", "tabulated"]
    a: Optional[Expression] = None
    b: Optional[Expression] = None
    c: Optional[Expression] = None
    table_t: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None  # shape (n, 3): columns a, b, c
    period: Optional[float] = Field(default=None, gt=0.0)
    label: str = ""

    _spline: Any = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_kind(self) -> "CoefficientSpec":
        if self.kind == "expression":
            if self.a is None or self.b is None or self.c is None:
                raise ValueError("expression coefficients need a, b and c")
        else:
            if self.table_t is None or self.table is None:
                raise ValueError("tabulated coefficients need table_t and table")
            if self.table.shape != (len(self.table_t), 3):
                raise ValueError("table must have shape (len(table_t), 3)")
            if np.any(np.diff(self.table_t) <= 0):
                raise ValueError("table_t must be strictly increasing")
            if not np.all(np.isfinite(self.table)):
                raise ValueError("tabulated coefficients must be finite")
        return self

    def model_post_init(self, __context: Any) -> None:
        if self.kind == "tabulated":
            bc = "periodic" if self.period is not None else "not-a-knot"
            self._spline = CubicSpline(self.table_t, self.table, axis=0, bc_type=bc)

    @classmethod
    def from_expressions(
        cls, a: Union[str, Expression], b: Union[str, Expression], c: Union[str, Expression], label: str = ""
    ) -> "CoefficientSpec":
        def as_expr(e: Union[str, Expression]) -> Expression:
            return e if isinstance(e, Expression) else parse(e)

        return cls(kind="expression", a=as_expr(a), b=as_expr(b), c=as_expr(c), label=label)

    @classmethod
    def from_table(
        cls, t: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray, period: Optional[float] = None, label: str = ""
    ) -> "CoefficientSpec":
        table = np.column_stack([a, b, c]).astype(float)
        if period is not None:
            table[-1] = table[0]
        return cls(kind="tabulated", table_t=np.asarray(t, dtype=float), table=table, period=period, label=label)

    def _table_time(self, ts: np.ndarray) -> np.ndarray:
        t0, t1 = float(self.table_t[0]), float(self.table_t[-1])
        if self.period is not None:
            return t0 + np.mod(ts - t0, self.period)
        span = 1e-12 * max(1.0, abs(t1))
        outside = (ts < t0 - span) | (ts > t1 + span)
        if np.any(outside):
            raise OutOfHorizonError(float(np.asarray(ts)[outside][0]), t0, t1)
        return np.clip(ts, t0, t1)

    def at(self, t: float) -> Tuple[float, float, float]:
        if self.kind == "expression":
            return self.a(t), self.b(t), self.c(t)
        row = self._spline(self._table_time(np.asarray(t, dtype=float)))
        return float(row[0]), float(row[1]), float(row[2])

    def at_array(self, ts: np.ndarray) -> np.ndarray:
        """Coefficients at many times, shape (3, n)."""
        ts = np.asarray(ts, dtype=float)
        if self.kind == "expression":
            return np.vstack([self.a.eval_array(ts), self.b.eval_array(ts), self.c.eval_array(ts)])
        return np.asarray(self._spline(self._table_time(ts))).T

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        """First-order system (y, y', y'')' = (y', y'', -a y'' - b y' - c y)."""
        a, b, c = self.at(t)
        return np.array([x[1], x[2], -a * x[2] - b * x[1] - c * x[0]])

    def velocity(self, ts: np.ndarray, states: np.ndarray) -> np.ndarray:
        """x' along a sampled trajectory; `states` has shape (n, 3)."""
        a, b, c = self.at_array(ts)
        y, dy, ddy = states[:, 0], states[:, 1], states[:, 2]
        return np.column_stack([dy, ddy, -a * ddy - b * dy - c * y])

    def describe(self) -> dict:
        if self.kind == "expression":
            return {"kind": "expression", "a": self.a.to_text(), "b": self.b.to_text(), "c": self.c.to_text()}
        return {"kind": "tabulated", "label": self.label, "nodes": int(len(self.table_t)), "period": self.period}


class Trajectory(BaseModel):
    """Dense numerical solution on [t0, T]."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: CoefficientSpec
    t: np.ndarray
    states: np.ndarray  # shape (n, 3)
    solution: Any  # scipy OdeSolution, piecewise polynomial dense output
    horizon: float = Field(gt=0.0)
    rtol: float = Field(gt=0.0)
    atol: float = Field(gt=0.0)
    method: str = "DOP853"
    nfev: int = 0

    @model_validator(mode="after")
    def _check_samples(self) -> "Trajectory":
        if self.states.shape != (len(self.t), 3):
            raise ValueError("states must have shape (len(t), 3)")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.min(np.linalg.norm(self.states, axis=1)) <= 0.0:
            raise ValueError("trajectory passes through the zero state")
        return self

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def scale(self) -> float:
        """Sup norm of the sampled phase curve."""
        return float(np.max(np.abs(self.states)))

    def _check_range(self, ts: np.ndarray) -> None:
        slack = 1e-12 * max(1.0, abs(self.t_end))
        outside = (ts < self.t_start - slack) | (ts > self.t_end + slack)
        if np.any(outside):
            raise OutOfHorizonError(float(np.atleast_1d(ts)[np.atleast_1d(outside)][0]), self.t_start, self.t_end)

    def states_at(self, ts: np.ndarray) -> np.ndarray:
        """Dense states at many times, shape (n, 3)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        self._check_range(ts)
        return np.asarray(self.solution(np.clip(ts, self.t_start, self.t_end))).T.reshape(len(ts), 3)

    def eval_dense(self, t: float) -> State3:
        return State3.from_array(self.states_at(np.array([t]))[0])

    def velocity_at(self, ts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """States and their derivatives from the equation itself."""
        states = self.states_at(ts)
        return states, self.spec.velocity(np.atleast_1d(ts), states)

    def step_grid(self, per_step: int) -> np.ndarray:
        """Integrator nodes with `per_step` equally spaced points inside every step."""
        fractions = np.arange(per_step) / per_step
        inner = (self.t[:-1, None] + np.diff(self.t)[:, None] * fractions[None, :]).ravel()
        return np.append(inner, self.t[-1])


def eval_dense(traj: Trajectory, t: float) -> State3:
    return traj.eval_dense(t)


def require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionError(message)

