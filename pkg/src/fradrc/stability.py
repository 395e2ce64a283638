"""Stability machinery: commensurate sector tests, boundary polynomials,
Routh tables, and the constructive observer-bandwidth search.

A fractional polynomial whose exponents are all multiples of a base order
lambda becomes an ordinary polynomial in w = s**lambda; the loop is stable
iff every root satisfies |arg(w)| > lambda*pi/2.  Boundary (corner)
polynomials give integer-order sufficient checks for the second-order
closed loop, evaluated through ordinary Routh tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import adrc
from .fracnum import FracPoly, commensurate
from .plant import PlantModel

__all__ = [
    "CommensuratePoly",
    "StabilityReport",
    "RouthTable",
    "char_poly_eso",
    "char_poly_closed",
    "sector_check",
    "kharitonov_boundaries",
    "routh_table",
    "find_omega0",
]


@dataclass(frozen=True)
class CommensuratePoly:
    """Integer polynomial in w = s**lam, coefficients descending."""

    coeffs: np.ndarray
    lam: Fraction

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        if c.size < 1 or c[0] == 0.0:
            raise ValueError("leading coefficient must be nonzero")
        if not (0 < self.lam <= 1):
            raise ValueError("lam must lie in (0, 1]")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class StabilityReport:
    roots: np.ndarray
    min_arg_margin: float
    verdict: str  # stable | unstable | marginal | indeterminate
    condition_warning: bool
    lam: Fraction

    def rows(self):
        """Per-root (re, im, |arg|, margin) rows for serialization."""
        half = math.pi * float(self.lam) / 2.0
        for w in self.roots:
            ang = abs(np.angle(w))
            yield (w.real, w.imag, ang, ang - half)


def char_poly_eso(orders: adrc.AdrcOrders, L) -> FracPoly:
    """Observer-error characteristic polynomial
    s^{(n-1)gamma+chi+nu} + sum_i beta_i s^{(n-i)gamma+nu} + beta_{n+1}."""
    beta = np.asarray(L, dtype=float)
    n = orders.n
    if beta.size != n + 1:
        raise ValueError(f"expected {n + 1} gains, got {beta.size}")
    terms = [(1.0, (n - 1) * orders.gamma + orders.chi + orders.nu)]
    for i in range(1, n + 1):
        terms.append((float(beta[i - 1]), (n - i) * orders.gamma + orders.nu))
    terms.append((float(beta[n]), Fraction(0)))
    return FracPoly.from_terms(terms)


def _base_order(orders: adrc.AdrcOrders, convention: str) -> Fraction:
    q1 = orders.chi.denominator
    q2 = orders.gamma.denominator
    q3 = orders.nu.denominator
    if convention == "lcm":
        return Fraction(1, math.lcm(q1, q2, q3))
    if convention == "paper":
        return Fraction(1, q1 * q2 * q3)
    raise ValueError("convention must be 'lcm' or 'paper'")


def char_poly_closed(
    p: PlantModel,
    design: adrc.LoopDesign,
    convention: str = "lcm",
) -> CommensuratePoly:
    """Closed-loop polynomial in w = s**lam.

    lam defaults to 1/lcm(q1, q2, q3) (denominators of chi, gamma, nu);
    the product convention 1/(q1*q2*q3) gives an equivalent sector verdict
    at far higher degree and stays available for audit.
    """
    poly = adrc.closed_loop_char_poly(p, design)
    if design.eso.variant == "ifo":
        lam = _base_order(design.eso.orders, convention)
    else:
        dens = {o.denominator for o in (t[1] for t in poly.terms)}
        lam = Fraction(1, math.lcm(*dens)) if dens else Fraction(1)
    return CommensuratePoly(coeffs=commensurate(poly, lam), lam=lam)


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    dcoeffs = np.polyder(coeffs)
    vals = np.polyval(coeffs, roots)
    dvals = np.polyval(dcoeffs, roots)
    step = np.zeros_like(roots)
    ok = dvals != 0
    step[ok] = vals[ok] / dvals[ok]
    polished = roots - step
    better = np.abs(np.polyval(coeffs, polished)) < np.abs(vals)
    return np.where(better, polished, roots)


def sector_check(cp: CommensuratePoly, tol: float = 1e-9) -> StabilityReport:
    """Root-argument sector test for w = s**lam polynomials.

    stable  : every root satisfies |arg(w)| > lam*pi/2 + tol
    unstable: some root violates the sector by more than tol
    marginal: at least one root sits within tol of the boundary (or at 0)
    indeterminate: rooting residuals too large to trust the verdict
    """
    coeffs = cp.coeffs
    if cp.degree < 1:
        raise ValueError("degree must be >= 1")
    nonzero = np.abs(coeffs) > 0
    scale = np.max(np.abs(coeffs))
    dyn_range = scale / np.min(np.abs(coeffs[nonzero]))
    condition_warning = cp.degree > 60 or dyn_range > 1e12
    roots = np.roots(coeffs)
    if condition_warning:
        roots = _polish_roots(coeffs, roots)

    norm = np.linalg.norm(coeffs)
    resid = np.abs(np.polyval(coeffs, roots))
    denom = norm * np.maximum(1.0, np.abs(roots)) ** cp.degree
    unreliable = (
        not np.all(np.isfinite(roots))
        or not np.all(np.isfinite(resid))
        or not np.isfinite(norm)
        or np.any(resid > 1e-6 * denom)
    )
    if unreliable:
        return StabilityReport(
            roots=roots,
            min_arg_margin=float("nan"),
            verdict="indeterminate",
            condition_warning=condition_warning,
            lam=cp.lam,
        )

    half = math.pi * float(cp.lam) / 2.0
    mags = np.abs(roots)
    args = np.abs(np.angle(roots))
    # a root at the origin has no argument; it sits on the sector boundary
    args[mags <= 1e-12 * max(1.0, mags.max())] = half
    margin = float(np.min(args) - half)
    if margin > tol:
        verdict = "stable"
    elif margin < -tol:
        verdict = "unstable"
    else:
        verdict = "marginal"
    return StabilityReport(
        roots=roots,
        min_arg_margin=margin,
        verdict=verdict,
        condition_warning=condition_warning,
        lam=cp.lam,
    )


def kharitonov_boundaries(kind: str, params: dict) -> list[np.ndarray]:
    """Integer-order corner polynomials (coefficients descending).

    kind='eso': corners of the observer error polynomial in w = s**chi with
    the filter orders pushed to their {0, 1} extremes:
        1. w + sum(beta) + beta_last
        2. w^2 + sum(beta) * w + beta_last
        3. w^(n+1) + sum_i beta_i w^(n+1-i) + beta_last
    With binomial gains the third factors as (w + omega0)^(n+1).

    kind='closed2': the three closed-loop corner polynomials of the
    second-order design, with closed-form coefficient lists in
    (a0, a1, kp, kd1, omega0).
    """
    if kind == "eso":
        beta = np.asarray(params["L"], dtype=float)
        n = beta.size - 1
        s_all = float(np.sum(beta[:-1]))
        last = float(beta[-1])
        p1 = np.array([1.0, s_all + last])
        p2 = np.array([1.0, s_all, last])
        p3 = np.concatenate([[1.0], beta])
        return [p1, p2, p3]
    if kind == "closed2":
        a0 = float(params["a0"])
        a1 = float(params["a1"])
        kp = float(params["kp"])
        kd = float(params["kd1"])
        w0 = float(params["omega0"])
        A = [
            1 + kd + 3 * w0 + 3 * kd * w0,
            a1 + a1 * kd,
            a0 + a0 * kd + kp + 3 * kp * w0 + 3 * w0**2 + 3 * kd * w0**2
            + w0**3 + kd * w0**3,
            a1 * kp + 3 * a1 * w0 + 3 * a1 * kd * w0 + 3 * a1 * w0**2,
            a0 * kp + 3 * a0 * w0 + 3 * a0 * kd * w0 + 3 * a0 * w0**2
            + 3 * kp * w0**2 + kp * w0**3,
        ]
        B = [
            1 + kd,
            a1 + a1 * kd + 3 * w0 + 3 * kd * w0,
            a0 + a0 * kd + kp + 3 * w0**2 + 3 * kd * w0**2,
            a1 * kp + 3 * a1 * w0 + 3 * a1 * kd * w0 + 3 * kp * w0
            + 3 * a1 * w0**2 + w0**3 + kd * w0**3,
            a0 * kp + 3 * a0 * w0 + 3 * a0 * kd * w0 + 3 * a0 * w0**2
            + 3 * kp * w0**2,
            kp * w0**3,
        ]
        C = [
            1.0,
            a1 + kd + 3 * w0,
            a0 + a1 * kd + kp + 3 * a1 * w0 + 3 * kd * w0 + 3 * w0**2,
            a0 * kd + a1 * kp + 3 * a0 * w0 + 3 * a1 * kd * w0 + 3 * kp * w0
            + 3 * a1 * w0**2 + 3 * kd * w0**2 + w0**3,
            a0 * kp + 3 * a0 * kd * w0 + 3 * a0 * w0**2 + 3 * kp * w0**2
            + kd * w0**3,
            kp * w0**3,
        ]
        return [np.array(A), np.array(B), np.array(C)]
    raise ValueError("kind must be 'eso' or 'closed2'")


@dataclass(frozen=True)
class RouthTable:
    rows: list = field(default_factory=list)
    hurwitz: bool = False
    epsilon_used: bool = False
    zero_row: bool = False


def routh_table(poly) -> RouthTable:
    """Routh array with first-column sign analysis.

    A zero pivot in a nonzero row is replaced by a signed epsilon and the
    verdict evaluated in the limit; an all-zero row (symmetric root pairs)
    is flagged and counts as not Hurwitz.
    """
    c = np.atleast_1d(np.asarray(poly, dtype=float))
    c = np.trim_zeros(c, "f")
    if c.size < 2:
        raise ValueError("degree must be >= 1")
    n = c.size - 1
    width = (n + 2) // 2
    rows = [np.zeros(width), np.zeros(width)]
    rows[0][: len(c[0::2])] = c[0::2]
    rows[1][: len(c[1::2])] = c[1::2]
    eps_used = False
    zero_row = False
    eps_scale = 1e-30 * np.max(np.abs(c))
    first_col = [rows[0][0]]
    r_prev, r_curr = rows[0], rows[1]
    out_rows = [rows[0].copy(), rows[1].copy()]
    for _ in range(n - 1):
        if np.all(r_curr == 0.0):
            zero_row = True
            break
        pivot = r_curr[0]
        if pivot == 0.0:
            pivot = eps_scale
            eps_used = True
        nxt = np.zeros(width)
        for j in range(width - 1):
            nxt[j] = (pivot * r_prev[j + 1] - r_prev[0] * r_curr[j + 1]) / pivot
        first_col.append(r_curr[0] if r_curr[0] != 0.0 else pivot)
        r_prev, r_curr = r_curr, nxt
        out_rows.append(nxt.copy())
    first_col.append(r_curr[0])
    if zero_row:
        hurwitz = False
    else:
        fc = np.asarray(first_col)
        hurwitz = bool(np.all(fc > 0) or np.all(fc < 0)) and not eps_used
        if c[0] < 0:
            hurwitz = bool(np.all(fc < 0)) and not eps_used
    return RouthTable(rows=out_rows, hurwitz=hurwitz, epsilon_used=eps_used, zero_row=zero_row)


def find_omega0(
    p: PlantModel,
    kp: float,
    kd1: float,
    search: tuple[float, float] = (1.0, 1e6),
) -> float | None:
    """Smallest observer bandwidth whose three corner polynomials are Hurwitz.

    Scans a geometric grid (factor 1.2) over `search`, validates that the
    pass region is monotone on the grid, then bisects down to 0.1 percent.
    Returns None when no grid point passes.
    """
    if p.m != 2:
        raise ValueError("find_omega0 applies to second-order plants")
    a0, a1 = p.a
    if a0 < 0:
        raise ValueError("requires a0 >= 0")
    if a1 < 0:
        raise ValueError("requires a1 >= 0")
    if kp <= 0:
        raise ValueError("requires kp > 0")
    if kd1 <= 8:
        raise ValueError("requires kd1 > 8")

    def passes(w0: float) -> bool:
        polys = kharitonov_boundaries(
            "closed2", dict(a0=a0, a1=a1, kp=kp, kd1=kd1, omega0=w0)
        )
        return all(routh_table(c).hurwitz for c in polys)

    lo, hi = search
    grid = [lo]
    while grid[-1] < hi:
        grid.append(grid[-1] * 1.2)
    hit = None
    for i, w0 in enumerate(grid):
        if passes(w0):
            hit = i
            break
    if hit is None:
        return None
    # monotone validation: all later grid points must pass too
    for w0 in grid[hit + 1 :: max(1, (len(grid) - hit) // 8)]:
        if not passes(w0):
            return grid[hit]
    if hit == 0:
        return grid[0]
    lo_f, hi_p = grid[hit - 1], grid[hit]
    while hi_p / lo_f > 1.001:
        mid = math.sqrt(lo_f * hi_p)
        if passes(mid):
            hi_p = mid
        else:
            lo_f = mid
    return hi_p
