"""Adaptive trajectory integration, flow maps, and variational equations.

The workhorse is an embedded Dormand-Prince 5(4) pair with a PI step-size
controller (safety 0.9, exponents 0.7 and 0.4 over the order). The systems
here are small and non-stiff, so no implicit or symplectic machinery is
provided; conservation is monitored by :func:`drift_report` at tight
tolerances instead. Negative-time integration negates the field, keeping a
single forward-time code path. A fixed-step classical RK4 is included for
debugging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IntegrationError
from .poly import PolynomialVectorField

# Dormand-Prince 5(4) tableau. _E is the difference between the fifth- and
# fourth-order weights, giving the local error estimate directly.
_A = (
    np.array([], dtype=float),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
_ORDER = 5
_SAFETY = 0.9
_EXP_ERR = 0.7 / _ORDER
_EXP_PREV = 0.4 / _ORDER
_MAX_GROWTH = 5.0
_MIN_SHRINK = 0.2


@dataclass(frozen=True)
class ToleranceSettings:
    """Error control for the adaptive integrator."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_steps: int = 10_000_000
    h_init: float | None = None  # None picks a starting step from the data
    h_min: float = 1e-13
    h_max: float = math.inf

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.h_min <= 0 or self.h_max <= 0:
            raise ValueError("step bounds must be positive")
        if self.h_init is not None and not (self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need h_min <= h_init <= h_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def tightened(self, factor: float) -> "ToleranceSettings":
        """Same settings with both tolerances divided by ``factor``."""
        return replace(self, abs_tol=self.abs_tol / factor, rel_tol=self.rel_tol / factor)


@dataclass(frozen=True)
class StepStats:
    accepted: int
    rejected: int


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration states; ``states[0]`` is the initial condition."""

    times: np.ndarray
    states: np.ndarray
    stats: StepStats

    def to_csv(self, target):
        """Write ``t,x1,...,xn`` rows; ``target`` is a path or a file object."""
        n = self.states.shape[1]
        header = "t," + ",".join(f"x{i + 1}" for i in range(n))
        lines = [header]
        for t, row in zip(self.times, self.states):
            lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in row]))
        text = "\n".join(lines) + "\n"
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w") as fh:
                fh.write(text)


def _initial_step(rhs, y0, f0, settings: ToleranceSettings) -> float:
    """Conservative starting step from the local scale of y and f."""
    scale = settings.abs_tol + settings.rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100.0 * h0, h1, settings.h_max)


def _advance(rhs, y0, t_end, settings: ToleranceSettings, collect: bool):
    """Integrate dy/dt = rhs(y) from 0 to t_end > 0."""
    y = np.array(y0, dtype=float)
    dim = y.size
    t = 0.0
    ts = [0.0]
    ys = [y.copy()]
    accepted = 0
    rejected = 0

    f0 = rhs(y)
    h = settings.h_init if settings.h_init is not None else _initial_step(rhs, y, f0, settings)
    h = min(h, t_end, settings.h_max)
    err_prev = 1.0
    k = np.empty((7, dim))
    k[0] = f0  # FSAL: stage 7 of an accepted step seeds stage 1 of the next

    while t < t_end:
        if accepted + rejected >= settings.max_steps:
            raise IntegrationError(f"max steps exceeded ({settings.max_steps})")
        if h < settings.h_min:
            raise IntegrationError(f"step underflow: h = {h:.3e} at t = {t:.6g}")
        h = min(h, t_end - t)

        for i in range(1, 7):
            k[i] = rhs(y + h * (_A[i] @ k[:i]))
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(invalid="ignore", over="ignore"):
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not np.isfinite(err):
            err = 2.0  # forces rejection and shrink

        if err <= 1.0:
            t += h
            y = y_new
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"non-finite state at t = {t:.6g}")
            accepted += 1
            if collect:
                ts.append(t)
                ys.append(y.copy())
            k[0] = k[6]  # FSAL
            err = max(err, 1e-10)
            factor = _SAFETY * err ** (-_EXP_ERR) * err_prev ** _EXP_PREV
            err_prev = err
        else:
            rejected += 1
            factor = max(_MIN_SHRINK, _SAFETY * err ** (-1.0 / _ORDER))
            factor = min(factor, 1.0)
        h = min(h * min(max(factor, _MIN_SHRINK), _MAX_GROWTH), settings.h_max)

    stats = StepStats(accepted, rejected)
    if collect:
        return Trajectory(np.array(ts), np.array(ys), stats)
    return y, stats


def _directional_rhs(field: PolynomialVectorField, t_sign: float):
    f = field.compiled() if t_sign > 0 else field.negated().compiled()
    return f


def integrate(
    field: PolynomialVectorField,
    x0,
    t_end: float,
    settings: ToleranceSettings | None = None,
) -> Trajectory:
    """Adaptive integration storing every accepted step."""
    if t_end <= 0:
        raise ValueError("t_end must be positive; use flow() for reversed time")
    settings = settings or ToleranceSettings()
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite")
    return _advance(field.compiled(), x0, float(t_end), settings, collect=True)


def flow(
    field: PolynomialVectorField,
    x,
    T: float,
    settings: ToleranceSettings | None = None,
) -> np.ndarray:
    """Time-T map of the field; negative T integrates the negated field."""
    settings = settings or ToleranceSettings()
    x = np.asarray(x, dtype=float)
    if T == 0.0:
        return x.copy()
    rhs = _directional_rhs(field, T)
    y, _ = _advance(rhs, x, abs(float(T)), settings, collect=False)
    return y


def _variational_rhs(field: PolynomialVectorField, negate: bool):
    base = field.negated() if negate else field
    f = base.compiled()
    jac = base.compiled_jacobian()
    n = field.dimension

    def rhs(y):
        x = y[:n]
        m = y[n:].reshape(n, n)
        return np.concatenate((f(x), (jac(x) @ m).ravel()))

    return rhs


def flow_with_monodromy(
    field: PolynomialVectorField,
    x,
    T: float,
    settings: ToleranceSettings | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Final state and fundamental matrix of the variational equation.

    The base trajectory and dM/dt = J(x(t)) M are integrated as one
    augmented system so both share the step-size control.
    """
    settings = settings or ToleranceSettings()
    x = np.asarray(x, dtype=float)
    n = field.dimension
    if T == 0.0:
        return x.copy(), np.eye(n)
    rhs = _variational_rhs(field, negate=T < 0)
    y0 = np.concatenate((x, np.eye(n).ravel()))
    y, _ = _advance(rhs, y0, abs(float(T)), settings, collect=False)
    return y[:n], y[n:].reshape(n, n)


def monodromy(
    field: PolynomialVectorField,
    x,
    T: float,
    settings: ToleranceSettings | None = None,
) -> np.ndarray:
    """Fundamental matrix M(T) with M(0) = identity."""
    _, m = flow_with_monodromy(field, x, T, settings)
    return m


def rk4_fixed(
    field: PolynomialVectorField, x0, t_end: float, n_steps: int
) -> Trajectory:
    """Classical fixed-step RK4, for debugging comparisons only."""
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    f = field.compiled()
    h = float(t_end) / n_steps
    y = np.asarray(x0, dtype=float).copy()
    ts = [0.0]
    ys = [y.copy()]
    for i in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ts.append((i + 1) * h)
        ys.append(y.copy())
    return Trajectory(np.array(ts), np.array(ys), StepStats(n_steps, 0))


def drift_report(trajectory: Trajectory, quantities) -> list[tuple[str, float]]:
    """Max deviation of each quantity from its initial value along the states."""
    if trajectory.states.shape[0] == 0:
        raise ValueError("empty trajectory")
    out = []
    for q in quantities:
        poly = getattr(q, "polynomial", q)
        name = getattr(q, "name", "quantity")
        values = poly.evaluate_many(trajectory.states)
        out.append((name, float(np.max(np.abs(values - values[0])))))
    return out
