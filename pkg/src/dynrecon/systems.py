"""Benchmark vector fields and fixed/adaptive Runge-Kutta integration onto a
uniform output grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "VectorField",
    "IntegratorConfig",
    "IntegrationError",
    "make_benchmark",
    "benchmark_coefficients",
    "default_integrator",
    "integrate",
    "BENCHMARK_NAMES",
    "DEFAULT_INITIAL_CONDITIONS",
    "DEFAULT_TIME_GRIDS",
]

BENCHMARK_NAMES = ("linear", "cubic", "lorenz")

# Damped rotation rates of the two oscillators and the classic chaotic
# parameter set sigma=10, rho=28, beta=8/3.
_OSC_DAMPING = -0.1
_OSC_COUPLING = 2.0
_LORENZ_SIGMA = 10.0
_LORENZ_RHO = 28.0
_LORENZ_BETA = 8.0 / 3.0

DEFAULT_INITIAL_CONDITIONS = {
    "linear": (0.0, 2.0),
    "cubic": (0.0, 2.0),
    "lorenz": (-8.0, 7.0, 27.0),
}

# (t0, t_end, dt_out) used for data generation unless overridden. The cubic
# and chaotic grids are finer than the linear one because the second-order
# differentiation error acts like noise on the fitting target: the sampling
# must be fine enough that every spurious term's least-squares optimum falls
# below the 1e-4 zero-threshold, or no search can recover the exact support.
DEFAULT_TIME_GRIDS = {
    "linear": (0.0, 25.0, 0.01),
    "cubic": (0.0, 25.0, 0.001),
    "lorenz": (0.0, 20.0, 0.0005),
}


class IntegrationError(RuntimeError):
    """Integration could not be continued (step-size underflow, typically a
    finite-time blow-up). Carries the last time reached successfully."""

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = t_last


@dataclass(frozen=True)
class VectorField:
    """An evaluatable right-hand side dx/dt = rhs(t, x) of dimension n.

    Benchmark fields are autonomous; rhs ignores t but takes it for a
    uniform call signature.
    """

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    names: tuple[str, ...] = ()

    def __call__(self, t: float, state) -> np.ndarray:
        out = np.asarray(self.rhs(t, np.asarray(state, dtype=float)), dtype=float)
        if out.shape != (self.dimension,):
            raise ValueError(
                f"rhs returned shape {out.shape}, expected ({self.dimension},)"
            )
        return out


def _linear_rhs(t, s):
    x, y = s
    return np.array([_OSC_DAMPING * x + _OSC_COUPLING * y,
                     -_OSC_COUPLING * x + _OSC_DAMPING * y])


def _cubic_rhs(t, s):
    x, y = s
    return np.array([_OSC_DAMPING * x**3 + _OSC_COUPLING * y**3,
                     -_OSC_COUPLING * x**3 + _OSC_DAMPING * y**3])


def _lorenz_rhs(t, s):
    x, y, z = s
    return np.array([
        _LORENZ_SIGMA * (y - x),
        x * (_LORENZ_RHO - z) - y,
        x * y - _LORENZ_BETA * z,
    ])


def make_benchmark(name: str) -> VectorField:
    """Return one of the three benchmark systems by name.

    linear: dx/dt = -0.1x + 2y,   dy/dt = -2x - 0.1y
    cubic:  same structure with cubed state variables
    lorenz: sigma=10, rho=28, beta=8/3
    """
    if name == "linear":
        return VectorField(2, _linear_rhs, ("x", "y"))
    if name == "cubic":
        return VectorField(2, _cubic_rhs, ("x", "y"))
    if name == "lorenz":
        return VectorField(3, _lorenz_rhs, ("x", "y", "z"))
    raise ValueError(f"unknown benchmark {name!r}; expected one of {BENCHMARK_NAMES}")


# Ground-truth sparse structure of each benchmark, keyed by exponent vector.
_TRUE_TERMS = {
    "linear": [
        {(1, 0): _OSC_DAMPING, (0, 1): _OSC_COUPLING},
        {(1, 0): -_OSC_COUPLING, (0, 1): _OSC_DAMPING},
    ],
    "cubic": [
        {(3, 0): _OSC_DAMPING, (0, 3): _OSC_COUPLING},
        {(3, 0): -_OSC_COUPLING, (0, 3): _OSC_DAMPING},
    ],
    "lorenz": [
        {(1, 0, 0): -_LORENZ_SIGMA, (0, 1, 0): _LORENZ_SIGMA},
        {(1, 0, 0): _LORENZ_RHO, (0, 1, 0): -1.0, (1, 0, 1): -1.0},
        {(0, 0, 1): -_LORENZ_BETA, (1, 1, 0): 1.0},
    ],
}


def benchmark_coefficients(name: str, basis) -> np.ndarray:
    """True coefficient matrix (p, n) of a benchmark expressed in ``basis``.

    Looked up by exponent vector, so it is independent of term order.
    Raises if the basis cannot represent the system (degree too low).
    """
    if name not in _TRUE_TERMS:
        raise ValueError(f"unknown benchmark {name!r}")
    columns = _TRUE_TERMS[name]
    index = {t.exponents: i for i, t in enumerate(basis.terms)}
    coeffs = np.zeros((basis.p, len(columns)))
    for j, terms in enumerate(columns):
        for exponents, value in terms.items():
            if exponents not in index:
                raise ValueError(
                    f"basis (n={basis.n}, m={basis.m}) cannot represent {name}"
                )
            coeffs[index[exponents], j] = value
    return coeffs


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration request: output grid t0, t0+dt_out, ..., t_end (inclusive,
    uniform) and solver settings."""

    t0: float
    t_end: float
    dt_out: float
    initial_condition: tuple[float, ...]
    method: str = "adaptive_rk45"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.t_end <= self.t0:
            raise ValueError(f"t_end must exceed t0, got [{self.t0}, {self.t_end}]")
        if self.dt_out <= 0:
            raise ValueError(f"dt_out must be positive, got {self.dt_out}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("adaptive_rk45", "fixed_rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        span = self.t_end - self.t0
        steps = span / self.dt_out
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError(
                f"dt_out={self.dt_out} does not evenly divide [{self.t0}, {self.t_end}]"
            )

    @property
    def grid(self) -> np.ndarray:
        n_steps = int(round((self.t_end - self.t0) / self.dt_out))
        return self.t0 + np.arange(n_steps + 1) * self.dt_out


def default_integrator(name: str, **overrides) -> IntegratorConfig:
    """IntegratorConfig with the standard data-generation grid and initial
    condition for a benchmark system."""
    t0, t_end, dt_out = DEFAULT_TIME_GRIDS[name]
    settings = dict(
        t0=t0,
        t_end=t_end,
        dt_out=dt_out,
        initial_condition=DEFAULT_INITIAL_CONDITIONS[name],
    )
    settings.update(overrides)
    return IntegratorConfig(**settings)


# Dormand-Prince 5(4) embedded pair. Fifth-order solution is propagated;
# the TR row gives the local error estimate.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_MIN_SCALE = 0.2
_MAX_SCALE = 5.0
_SAFETY = 0.9


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_rk4(field, config, grid):
    out = np.empty((len(grid), field.dimension))
    y = np.array(config.initial_condition, dtype=float)
    out[0] = y
    h = config.dt_out
    for k in range(1, len(grid)):
        y = _rk4_step(field, grid[k - 1], y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(
                f"solution became non-finite at t={grid[k]:.6g}", t_last=grid[k - 1]
            )
        out[k] = y
    return out


def _dp45_step(field, t, y, h):
    k = np.empty((7, y.size))
    k[0] = field(t, y)
    for i in range(1, 7):
        k[i] = field(t + _DP_C[i] * h, y + h * (_DP_A[i] @ k[:i]))
    y_new = y + h * (_DP_B5 @ k)
    err = h * (_DP_ERR @ k)
    return y_new, err


def _integrate_dp45(field, config, grid):
    out = np.empty((len(grid), field.dimension))
    y = np.array(config.initial_condition, dtype=float)
    out[0] = y
    t = float(grid[0])
    h = config.dt_out
    h_min_factor = 16.0 * np.finfo(float).eps
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, len(grid)):
            t_target = float(grid[k])
            while t < t_target:
                # Clamp so internal steps never cross an output point.
                h = min(h, t_target - t)
                h_min = h_min_factor * max(1.0, abs(t))
                if h < h_min:
                    raise IntegrationError(
                        f"step size underflow at t={t:.6g}", t_last=t
                    )
                y_new, err = _dp45_step(field, t, y, h)
                if np.all(np.isfinite(y_new)):
                    scale = config.abs_tol + config.rel_tol * np.maximum(
                        np.abs(y), np.abs(y_new)
                    )
                    err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
                else:
                    err_norm = np.inf
                if err_norm <= 1.0:
                    t = t_target if t_target - t <= h * (1 + 1e-12) else t + h
                    y = y_new
                    factor = (
                        _MAX_SCALE
                        if err_norm == 0.0
                        else min(_MAX_SCALE, max(_MIN_SCALE, _SAFETY * err_norm**-0.2))
                    )
                else:
                    factor = max(_MIN_SCALE, _SAFETY * err_norm**-0.2) if np.isfinite(
                        err_norm
                    ) else _MIN_SCALE
                h = h * factor
            out[k] = y
    return out


def integrate(field: VectorField, config: IntegratorConfig):
    """Integrate a vector field over the configured uniform output grid.

    Returns a Trajectory sampled exactly on the grid. The adaptive method is
    a Dormand-Prince 5(4) pair with steps clamped to land on every output
    point; fixed_rk4 takes one classic Runge-Kutta step per grid interval.

    Raises IntegrationError (carrying the last valid time) on step-size
    underflow or a non-finite state, as happens for finite-time blow-ups.
    """
    from .signals import Trajectory

    ic = np.asarray(config.initial_condition, dtype=float)
    if ic.shape != (field.dimension,):
        raise ValueError(
            f"initial condition has shape {ic.shape}, field dimension is "
            f"{field.dimension}"
        )
    grid = config.grid
    if config.method == "fixed_rk4":
        states = _integrate_rk4(field, config, grid)
    else:
        states = _integrate_dp45(field, config, grid)
    names = field.names or tuple(f"x{i + 1}" for i in range(field.dimension))
    return Trajectory(t=grid, states=states, names=names)
