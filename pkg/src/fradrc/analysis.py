"""Frequency- and time-domain diagnostics.

Crossover/phase-margin extraction, the estimation-quality metric
(mean square of 1 - (jw)^k * P(jw) over a log grid), and step-response
metrics including the overshoot-fluctuation robustness figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fracnum import FracRational, freq_response
from .plant import DisturbanceProfile

__all__ = [
    "FreqGrid",
    "Margins",
    "StepMetrics",
    "MarginNotFoundError",
    "margins",
    "bode_data",
    "mse_delta",
    "step_metrics",
    "overshoot_fluctuation",
    "NOT_SETTLED",
]

NOT_SETTLED = float("inf")


class MarginNotFoundError(RuntimeError):
    """No unity-gain crossing inside the search interval."""


@dataclass(frozen=True)
class FreqGrid:
    """Log-spaced frequency axis."""

    omegas: np.ndarray
    lo: float
    hi: float
    points_per_decade: int

    @staticmethod
    def make(lo: float = 1e-1, hi: float = 1e4, points_per_decade: int = 100) -> "FreqGrid":
        if not (0 < lo < hi):
            raise ValueError("need 0 < lo < hi")
        decades = math.log10(hi / lo)
        npts = int(round(decades * points_per_decade)) + 1
        return FreqGrid(
            omegas=np.logspace(math.log10(lo), math.log10(hi), npts),
            lo=lo,
            hi=hi,
            points_per_decade=points_per_decade,
        )


@dataclass(frozen=True)
class Margins:
    omega_gc: float
    phase_margin_deg: float
    crossings: tuple[float, ...]
    unique: bool


def margins(
    g: FracRational,
    interval: tuple[float, float] = (1e-2, 1e6),
    points_per_decade: int = 60,
) -> Margins:
    """Gain crossover and phase margin of an open-loop transfer function.

    Brackets |g| = 1 on a log grid and bisects each bracket.  When the
    magnitude crosses unity more than once, all crossings are returned and
    the result is flagged (the first crossing is reported as primary).
    """
    lo, hi = interval
    grid = FreqGrid.make(lo, hi, points_per_decade).omegas
    mags = np.abs(freq_response(g, grid))
    logm = np.log(mags)
    crossings = []
    for i in range(len(grid) - 1):
        f0, f1 = logm[i], logm[i + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            crossings.append(grid[i])
            continue
        if f0 * f1 < 0:
            a, b = grid[i], grid[i + 1]
            for _ in range(80):
                mid = math.sqrt(a * b)
                fm = math.log(abs(g.eval_at(1j * mid)))
                if f0 * fm <= 0:
                    b = mid
                else:
                    a = mid
            crossings.append(math.sqrt(a * b))
    if not crossings:
        raise MarginNotFoundError(
            f"|g| does not cross 1 on [{lo:g}, {hi:g}] rad/s"
        )
    w_gc = crossings[0]
    phase = math.degrees(np.angle(g.eval_at(1j * w_gc)))
    return Margins(
        omega_gc=w_gc,
        phase_margin_deg=180.0 + phase,
        crossings=tuple(crossings),
        unique=len(crossings) == 1,
    )


def bode_data(g: FracRational, grid: FreqGrid):
    """(omega, magnitude dB, phase deg) arrays for CSV/plot emission."""
    h = freq_response(g, grid.omegas)
    return grid.omegas, 20.0 * np.log10(np.abs(h)), np.degrees(np.angle(h))


def mse_delta(P: FracRational, ideal_order: float, grid: FreqGrid) -> dict:
    """Deviation of a compensated plant from an ideal integrator chain.

    delta(w) = 1 - (jw)^ideal_order * P(jw); the scalar figure is the mean
    of |delta|^2 over the grid, computed as the trapezoidal average on the
    log-frequency axis so it is insensitive to grid density.  Undefined
    grid points are excluded and counted; more than 1 percent exclusions
    raises.
    """
    w = grid.omegas
    resp = freq_response(P, w)
    jw_k = w ** float(ideal_order) * np.exp(1j * float(ideal_order) * np.pi / 2)
    delta = 1.0 - jw_k * resp
    bad = ~np.isfinite(delta)
    n_bad = int(np.count_nonzero(bad))
    if n_bad > 0.01 * w.size:
        raise ValueError(f"{n_bad} of {w.size} grid points undefined")
    x = np.log(w[~bad])
    d2 = np.abs(delta[~bad]) ** 2
    mse = float(np.trapezoid(d2, x) / (x[-1] - x[0]))
    return {"delta": delta, "mse": mse, "excluded": n_bad}


@dataclass(frozen=True)
class StepMetrics:
    """Scalar summary of one step response (times in s, errors in percent)."""

    rise_time: float
    peak_time: float
    peak_value: float
    overshoot: float
    settling_time: float
    steady_state_error: float
    dist_max_deviation: float = 0.0
    dist_recovery_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "rise_time": self.rise_time,
            "peak_time": self.peak_time,
            "peak_value": self.peak_value,
            "overshoot": self.overshoot,
            "settling_time": self.settling_time,
            "steady_state_error": self.steady_state_error,
            "dist_max_deviation": self.dist_max_deviation,
            "dist_recovery_time": self.dist_recovery_time,
        }


def step_metrics(
    sim,
    r: float,
    dist: DisturbanceProfile | None = None,
    band: float = 0.02,
) -> StepMetrics:
    """Step metrics on the pre-disturbance segment, rejection metrics after.

    Rise time is 10-90 percent of the settled value, settling uses a
    +-band window around it, overshoot is normalized by the reference.
    A response that never holds the band reports the NOT_SETTLED sentinel.
    """
    t = np.asarray(sim.t)
    y = np.asarray(sim.y)
    if dist is not None and dist.kind != "none" and dist.t_on < t[-1]:
        pre = t < dist.t_on
    else:
        pre = np.ones(t.size, dtype=bool)
        dist = None
    tp, yp = t[pre], y[pre]
    if tp.size < 10:
        raise ValueError("pre-disturbance segment too short")
    tail = max(2, int(0.02 * tp.size))
    y_ss = float(np.mean(yp[-tail:]))
    ref = abs(r) if r != 0 else 1.0

    peak_idx = int(np.argmax(yp)) if r >= 0 else int(np.argmin(yp))
    peak_value = float(yp[peak_idx])
    overshoot = max(0.0, 100.0 * (peak_value - y_ss) / ref) if r >= 0 else max(
        0.0, 100.0 * (y_ss - peak_value) / ref
    )

    lo_th, hi_th = 0.1 * y_ss, 0.9 * y_ss
    try:
        i_lo = int(np.nonzero(yp >= lo_th)[0][0]) if y_ss > 0 else int(np.nonzero(yp <= lo_th)[0][0])
        i_hi = int(np.nonzero(yp >= hi_th)[0][0]) if y_ss > 0 else int(np.nonzero(yp <= hi_th)[0][0])
        rise = float(tp[i_hi] - tp[i_lo])
    except IndexError:
        rise = NOT_SETTLED

    tol = band * abs(y_ss) if y_ss != 0 else band * ref
    outside = np.abs(yp - y_ss) > tol
    if outside[-1] or not np.any(~outside):
        settling = NOT_SETTLED
    elif not np.any(outside):
        settling = 0.0
    else:
        settling = float(tp[int(np.nonzero(outside)[0][-1]) + 1])

    ss_err = 100.0 * abs(y_ss - r) / ref

    dmax = 0.0
    drec = 0.0
    if dist is not None:
        post = t >= dist.t_on
        td, yd = t[post], y[post]
        dmax = float(np.max(np.abs(yd - y_ss)))
        rec_tol = band * ref
        out_d = np.abs(yd - y_ss) > rec_tol
        if not np.any(out_d):
            drec = 0.0
        elif out_d[-1]:
            drec = NOT_SETTLED
        else:
            drec = float(td[int(np.nonzero(out_d)[0][-1]) + 1] - dist.t_on)

    return StepMetrics(
        rise_time=rise,
        peak_time=float(tp[peak_idx]),
        peak_value=peak_value,
        overshoot=overshoot,
        settling_time=settling,
        steady_state_error=ss_err,
        dist_max_deviation=dmax,
        dist_recovery_time=drec,
    )


def overshoot_fluctuation(metrics_by_k: dict, reference: float) -> float:
    """(max_K M_K - min_K M_K)/reference * 100, M_K = peak of the response.

    Values may be StepMetrics (peak_value is used) or raw peak floats.
    """
    if len(metrics_by_k) < 2:
        raise ValueError("need at least two gain multipliers")
    peaks = [
        m.peak_value if isinstance(m, StepMetrics) else float(m)
        for m in metrics_by_k.values()
    ]
    return (max(peaks) - min(peaks)) / abs(reference) * 100.0
