"""Integer-order SISO plant models and exact zero-order-hold simulation.

Plants are monic-denominator transfer functions b / (s^m + a_{m-1} s^{m-1}
+ ... + a_0) realized in companion form.  Discretization is the exact matrix
exponential (not a Runge-Kutta step), so the plant contributes no solver
error to closed-loop comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fracnum import FracPoly, FracRational

__all__ = [
    "PlantModel",
    "DisturbanceProfile",
    "SimulationAbort",
    "plant_discretize",
    "simulate_plant",
]


class SimulationAbort(RuntimeError):
    """Non-finite sample encountered; carries the offending sample index."""

    def __init__(self, index: int):
        super().__init__(f"non-finite state at sample {index}")
        self.index = index


@dataclass(frozen=True)
class PlantModel:
    """y^(m) = -sum(a_i * y^(i)) + b*u + d with a = [a_0 .. a_{m-1}]."""

    a: tuple[float, ...]
    b: float

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if len(a) < 1:
            raise ValueError("plant order must be >= 1")
        if not all(np.isfinite(a)) or not np.isfinite(self.b):
            raise ValueError("plant coefficients must be finite")

    @property
    def m(self) -> int:
        return len(self.a)

    def companion(self) -> tuple[np.ndarray, np.ndarray]:
        """Continuous-time (A, B) with state x = [y, y', ..., y^(m-1)]."""
        m = self.m
        A = np.zeros((m, m))
        A[:-1, 1:] = np.eye(m - 1)
        A[-1, :] = -np.asarray(self.a)
        B = np.zeros(m)
        B[-1] = 1.0
        return A, B

    def transfer(self) -> FracRational:
        den = FracPoly.from_terms(
            [(1.0, self.m)] + [(ai, i) for i, ai in enumerate(self.a)]
        )
        return FracRational(FracPoly.constant(self.b), den)

    def dc_gain(self) -> float:
        if self.a[0] == 0.0:
            return float("inf")
        return self.b / self.a[0]


@dataclass(frozen=True)
class DisturbanceProfile:
    """Additive input disturbance d(t): none, or a step held to the end."""

    kind: str = "none"
    t_on: float = 0.0
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "step"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.t_on < 0:
            raise ValueError("t_on must be >= 0")

    def sample(self, t: np.ndarray | float) -> np.ndarray | float:
        if self.kind == "none":
            return np.zeros_like(t) if isinstance(t, np.ndarray) else 0.0
        return np.where(np.asarray(t) >= self.t_on, self.amplitude, 0.0)


def plant_discretize(p: PlantModel, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact ZOH step matrices: x_{k+1} = F x_k + G * (b*u_k + d_k).

    F = expm(A*dt); G integrates the exponential over one step, computed
    from the augmented-matrix exponential so both pieces share accuracy.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    A, B = p.companion()
    m = p.m
    M = np.zeros((m + 1, m + 1))
    M[:m, :m] = A * dt
    M[:m, m] = B * dt
    E = scipy.linalg.expm(M)
    return E[:m, :m], E[:m, m]


def simulate_plant(
    p: PlantModel,
    u: np.ndarray,
    d: DisturbanceProfile,
    dt: float,
    T: float,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Output trajectory on the grid t_k = k*dt, k = 0..round(T/dt)-1.

    The input u must be defined on the same grid (len(u) >= N).
    """
    N = int(round(T / dt))
    if abs(N * dt - T) > 1e-9 * max(T, dt):
        raise ValueError("dt must divide T")
    u = np.asarray(u, dtype=float)
    if u.size < N:
        raise ValueError(f"input defined on {u.size} samples, need {N}")
    F, G = plant_discretize(p, dt)
    x = np.zeros(p.m) if x0 is None else np.asarray(x0, dtype=float).copy()
    t = np.arange(N) * dt
    dsig = np.asarray(d.sample(t), dtype=float)
    y = np.empty(N)
    for k in range(N):
        y[k] = x[0]
        if not np.isfinite(y[k]):
            raise SimulationAbort(k)
        x = F @ x + G * (p.b * u[k] + dsig[k])
    return y
