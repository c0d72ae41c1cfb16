"""Trajectory container, numerical differentiation, and CSV import/export."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .systems import VectorField

__all__ = [
    "Trajectory",
    "DerivativeSet",
    "CsvFormatError",
    "differentiate",
    "analytic_derivatives",
    "read_csv",
    "write_csv",
]

# Maximum relative deviation of the sample spacing from uniform.
UNIFORM_RTOL = 1e-9


class CsvFormatError(ValueError):
    """Malformed trajectory CSV; ``line`` is the 1-based offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _lock(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled multivariate time series.

    t: (N,) strictly increasing, uniform within UNIFORM_RTOL relative
    spacing; N >= 3 so interior differencing stencils exist.
    states: (N, n); names: one label per state column.
    """

    t: np.ndarray
    states: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        t = _lock(np.asarray(self.t, dtype=float).ravel())
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        states = _lock(states)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "names", tuple(self.names))
        if len(t) < 3:
            raise ValueError(f"need at least 3 samples, got {len(t)}")
        if states.shape[0] != len(t):
            raise ValueError(
                f"{states.shape[0]} state rows for {len(t)} time samples"
            )
        if len(self.names) != states.shape[1]:
            raise ValueError(
                f"{len(self.names)} names for {states.shape[1]} state columns"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(states))):
            raise ValueError("trajectory contains non-finite values")
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise ValueError("time grid must be strictly increasing")
        dt = (t[-1] - t[0]) / (len(t) - 1)
        if np.max(np.abs(steps - dt)) > UNIFORM_RTOL * dt:
            raise ValueError("time grid must be uniform")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def dt(self) -> float:
        return float((self.t[-1] - self.t[0]) / (len(self.t) - 1))


@dataclass(frozen=True)
class DerivativeSet:
    """Per-sample state derivatives on the same grid as the originating
    trajectory. source is "numerical" (finite differences) or "analytic"
    (true right-hand side evaluated along the trajectory)."""

    t: np.ndarray
    values: np.ndarray
    source: str
    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", _lock(self.t))
        object.__setattr__(self, "values", _lock(self.values))
        object.__setattr__(self, "names", tuple(self.names))
        if self.source not in ("numerical", "analytic"):
            raise ValueError(f"unknown derivative source {self.source!r}")
        if self.values.shape[0] != len(self.t):
            raise ValueError("derivatives and grid length differ")

    @property
    def dt(self) -> float:
        return float((self.t[-1] - self.t[0]) / (len(self.t) - 1))


def differentiate(traj: Trajectory) -> DerivativeSet:
    """Second-order finite differences of the state signals: central stencils
    on interior points, one-sided second-order stencils at both endpoints
    (exact for polynomials of degree <= 2). Non-uniform grids are rejected by
    the Trajectory invariant."""
    values = np.gradient(traj.states, traj.dt, axis=0, edge_order=2)
    return DerivativeSet(
        t=traj.t, values=values, source="numerical", names=traj.names
    )


def analytic_derivatives(field: VectorField, traj: Trajectory) -> DerivativeSet:
    """Evaluate the true right-hand side along the trajectory samples.

    Ground-truth mode: isolates fitting error from differentiation error.
    """
    if field.dimension != traj.n:
        raise ValueError(
            f"field dimension {field.dimension} != trajectory dimension {traj.n}"
        )
    values = np.empty_like(traj.states)
    for k in range(len(traj)):
        values[k] = field(float(traj.t[k]), traj.states[k])
    return DerivativeSet(t=traj.t, values=values, source="analytic", names=traj.names)


def write_csv(data, path) -> None:
    """Write a Trajectory or DerivativeSet as UTF-8 CSV with header
    ``t,<name1>,...`` at 17 significant digits (lossless float round-trip)."""
    values = getattr(data, "states", None)
    if values is None:
        values = data.values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(data.names) + "\n")
        for tk, row in zip(data.t, values):
            fh.write(f"{tk:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def read_csv(path) -> Trajectory:
    """Parse a trajectory CSV written by :func:`write_csv` (or compatible).

    Raises CsvFormatError with the offending line number for ragged rows,
    non-numeric cells, or non-increasing time.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n").rstrip("\r") for line in fh]
    lines = [line for line in lines if line.strip() != ""]
    if not lines:
        raise CsvFormatError("empty file", line=1)
    header = [cell.strip() for cell in lines[0].split(",")]
    if len(header) < 2 or header[0] != "t":
        raise CsvFormatError(
            f"header must be 't,<name1>,...', got {lines[0]!r}", line=1
        )
    names = tuple(header[1:])
    n_cols = len(header)
    t_vals: list[float] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != n_cols:
            raise CsvFormatError(
                f"expected {n_cols} columns, found {len(cells)}", line=lineno
            )
        try:
            parsed = [float(cell) for cell in cells]
        except ValueError:
            raise CsvFormatError(f"non-numeric cell in {line!r}", line=lineno)
        if t_vals and parsed[0] <= t_vals[-1]:
            raise CsvFormatError(
                f"time {parsed[0]!r} does not increase past {t_vals[-1]!r}",
                line=lineno,
            )
        t_vals.append(parsed[0])
        rows.append(parsed[1:])
    return Trajectory(t=np.array(t_vals), states=np.array(rows), names=names)
