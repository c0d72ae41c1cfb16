"""Error metrics for derivative fits and resimulated trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ise", "mse", "r2", "SignalMetrics", "MetricReport", "metric_report"]


def _as_pair(actual, est) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float)
    e = np.asarray(est, dtype=float)
    if a.shape != e.shape:
        raise ValueError(f"signal length mismatch: {a.shape} vs {e.shape}")
    return a, e


def ise(actual, est, dt: float) -> float:
    """Integral square error, trapezoidal approximation of the squared
    residual integrated over the full sampling window.

    Parameters
    ----------
    actual, est : array_like, shape (N,)
        Reference and estimated signal on the same uniform grid.
    dt : float
        Grid spacing of the signals.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    a, e = _as_pair(actual, est)
    return float(np.trapezoid((a - e) ** 2, dx=dt))


def mse(actual, est) -> float:
    """Sum of squared residuals.

    Note: despite the conventional name, this is the plain sum with no
    division by the sample count. The quantity labelled MSE in our result
    tables is this sum; it is kept as-is so reported values line up.
    """
    a, e = _as_pair(actual, est)
    return float(np.sum((a - e) ** 2))


def r2(actual, est) -> float:
    """Coefficient of determination, 1 - SSE/SST with SST about the mean
    of ``actual``. Raises if ``actual`` has zero variance (undefined)."""
    a, e = _as_pair(actual, est)
    sst = float(np.sum((a - a.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("r2 is undefined for a zero-variance reference signal")
    sse = float(np.sum((a - e) ** 2))
    return 1.0 - sse / sst


@dataclass(frozen=True)
class SignalMetrics:
    """Per-signal metric triple."""

    ise: float
    mse: float
    r2: float


@dataclass(frozen=True)
class MetricReport:
    """Metrics for a multi-signal comparison, per signal and pooled.

    ``dt`` is carried alongside because the ISE magnitude depends on it.
    """

    per_signal: dict[str, SignalMetrics]
    dt: float
    ise: float  # sum over signals
    mse: float  # sum over signals
    r2: float  # pooled: 1 - sum(SSE)/sum(SST)


def metric_report(actual, est, dt: float, names) -> MetricReport:
    """Build a MetricReport for column-wise signals ``actual[:, j]`` vs
    ``est[:, j]`` named ``names[j]``."""
    a = np.asarray(actual, dtype=float)
    e = np.asarray(est, dtype=float)
    if a.shape != e.shape:
        raise ValueError(f"signal shape mismatch: {a.shape} vs {e.shape}")
    if a.ndim == 1:
        a = a[:, None]
        e = e[:, None]
    names = list(names)
    if len(names) != a.shape[1]:
        raise ValueError("one name per signal column required")
    per = {}
    sse_sum = 0.0
    sst_sum = 0.0
    for j, name in enumerate(names):
        per[name] = SignalMetrics(
            ise=ise(a[:, j], e[:, j], dt),
            mse=mse(a[:, j], e[:, j]),
            r2=r2(a[:, j], e[:, j]),
        )
        sse_sum += np.sum((a[:, j] - e[:, j]) ** 2)
        sst_sum += np.sum((a[:, j] - a[:, j].mean()) ** 2)
    return MetricReport(
        per_signal=per,
        dt=dt,
        ise=sum(m.ise for m in per.values()),
        mse=sum(m.mse for m in per.values()),
        r2=1.0 - float(sse_sum) / float(sst_sum),
    )
