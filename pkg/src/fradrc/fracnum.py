"""Fractional polynomial/rational algebra with exact rational exponents.

This is the substrate for everything frequency-domain in the package: sums
of ``c * s**alpha`` terms (:class:`FracPoly`), their ratios
(:class:`FracRational`), Grunwald-Letnikov binomial weights, pointwise
frequency response, and the commensurate-order substitution ``w = s**lam``
that turns a fractional polynomial into an ordinary one.

Exponents are stored as :class:`fractions.Fraction` so that order
bookkeeping (products add exponents, the commensurate transform divides
them) is exact; coefficients are ordinary floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "FracPoly",
    "FracRational",
    "GlCoeffs",
    "DegenerateSystemError",
    "IncommensurateOrderError",
    "as_order",
    "gl_coefficients",
    "freq_response",
    "fp_add",
    "fp_mul",
    "fr_mul",
    "fr_feedback",
    "commensurate",
    "rationalize",
]

OrderLike = Union[int, float, Fraction]

# Largest denominator accepted when converting a float exponent to an exact
# rational.  Covers every terminating-decimal order used in practice while
# still snapping 0.1 + 0.2 style float noise back to 3/10.
_MAX_ORDER_DEN = 10**6

# Relative magnitude below which a coefficient is treated as cancellation
# residue and dropped during normalization.
MERGE_RTOL = 1e-12


class DegenerateSystemError(ArithmeticError):
    """Raised when an operation produces a zero denominator."""


class IncommensurateOrderError(ValueError):
    """Raised when an exponent is not an integer multiple of the base order."""


def as_order(x: OrderLike) -> Fraction:
    """Coerce an exponent to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError(f"order must be finite, got {x!r}")
    return Fraction(xf).limit_denominator(_MAX_ORDER_DEN)


def _merge_terms(pairs: Iterable[tuple[float, Fraction]]) -> tuple[tuple[float, Fraction], ...]:
    acc: dict[Fraction, float] = {}
    peak: dict[Fraction, float] = {}
    for coeff, order in pairs:
        c = float(coeff)
        if not math.isfinite(c):
            raise ValueError("non-finite coefficient")
        acc[order] = acc.get(order, 0.0) + c
        peak[order] = max(peak.get(order, 0.0), abs(c))
    # a sum tiny relative to what was added at that order is cancellation
    # residue; small coefficients in their own right are kept
    kept = [
        (c, o)
        for o, c in acc.items()
        if c != 0.0 and abs(c) > MERGE_RTOL * peak[o]
    ]
    kept.sort(key=lambda t: t[1], reverse=True)
    return tuple(kept)


@dataclass(frozen=True)
class FracPoly:
    """Sum of ``coeff * s**order`` terms, orders distinct and descending."""

    terms: tuple[tuple[float, Fraction], ...] = ()

    @staticmethod
    def from_terms(pairs: Iterable[tuple[float, OrderLike]]) -> "FracPoly":
        terms = []
        for c, o in pairs:
            order = as_order(o)
            if order < 0:
                raise ValueError(f"orders must be >= 0, got {o}")
            terms.append((float(c), order))
        return FracPoly(_merge_terms(terms))

    @staticmethod
    def s_power(order: OrderLike, coeff: float = 1.0) -> "FracPoly":
        return FracPoly.from_terms([(coeff, order)])

    @staticmethod
    def constant(c: float) -> "FracPoly":
        return FracPoly.from_terms([(c, 0)])

    @staticmethod
    def zero() -> "FracPoly":
        return FracPoly(())

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no degree")
        return self.terms[0][1]

    @property
    def lowest_order(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no lowest order")
        return self.terms[-1][1]

    def shift_orders(self, delta: OrderLike) -> "FracPoly":
        """Multiply by s**delta (exponent shift, exact)."""
        d = as_order(delta)
        return FracPoly(tuple((c, o + d) for c, o in self.terms))

    def __add__(self, other: "FracPoly | float | int") -> "FracPoly":
        other = _coerce_poly(other)
        return FracPoly(_merge_terms(list(self.terms) + list(other.terms)))

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> "FracPoly":
        return FracPoly(tuple((-c, o) for c, o in self.terms))

    def __sub__(self, other: "FracPoly | float | int") -> "FracPoly":
        return self + (-_coerce_poly(other))

    def __rsub__(self, other):
        return _coerce_poly(other) + (-self)

    def __mul__(self, other: "FracPoly | float | int") -> "FracPoly":
        if isinstance(other, (int, float)):
            if other == 0:
                return FracPoly.zero()
            return FracPoly(tuple((c * other, o) for c, o in self.terms))
        prods = [(c1 * c2, o1 + o2) for c1, o1 in self.terms for c2, o2 in other.terms]
        return FracPoly(_merge_terms(prods))

    def __rmul__(self, other):
        return self.__mul__(other)

    def eval_at(self, s: complex) -> complex:
        """Evaluate at a complex point (principal branch of s**alpha)."""
        return sum(c * s ** float(o) for c, o in self.terms) if self.terms else 0.0 + 0.0j

    def eval_jomega(self, omega: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at s = j*omega, omega > 0.

        Uses (j*w)**a = w**a * exp(j*a*pi/2), which avoids branch-cut
        surprises for large or negative orders.
        """
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape, dtype=complex)
        for c, o in self.terms:
            a = float(o)
            out += c * np.power(w, a) * np.exp(1j * a * np.pi / 2.0)
        return out

    def _jomega_scale(self, omega: np.ndarray) -> np.ndarray:
        """Sum of term magnitudes on the jw axis (cancellation yardstick)."""
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape)
        for c, o in self.terms:
            out += abs(c) * np.power(w, float(o))
        return out

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        bits = []
        for c, o in self.terms:
            if o == 0:
                bits.append(f"{c:g}")
            else:
                bits.append(f"{c:g}*s^({o})")
        return " + ".join(bits)


def _coerce_poly(x) -> FracPoly:
    if isinstance(x, FracPoly):
        return x
    if isinstance(x, (int, float)):
        return FracPoly.constant(float(x))
    raise TypeError(f"cannot use {type(x).__name__} as FracPoly")


@dataclass(frozen=True)
class FracRational:
    """Ratio of two fractional polynomials; the denominator is nonzero."""

    num: FracPoly
    den: FracPoly

    def __post_init__(self):
        if self.den.is_zero:
            raise DegenerateSystemError("zero denominator")

    @staticmethod
    def from_poly(p: FracPoly) -> "FracRational":
        return FracRational(p, FracPoly.constant(1.0))

    @staticmethod
    def constant(c: float) -> "FracRational":
        return FracRational.from_poly(FracPoly.constant(c))

    def normalized(self) -> "FracRational":
        """Strip a common s**k factor shared by numerator and denominator."""
        if self.num.is_zero:
            return FracRational(FracPoly.zero(), FracPoly.constant(1.0))
        k = min(self.num.lowest_order, self.den.lowest_order)
        if k == 0:
            return self
        return FracRational(self.num.shift_orders(-k), self.den.shift_orders(-k))

    def __mul__(self, other: "FracRational | FracPoly | float | int") -> "FracRational":
        other = _coerce_rational(other)
        return FracRational(self.num * other.num, self.den * other.den).normalized()

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other: "FracRational | FracPoly | float | int") -> "FracRational":
        other = _coerce_rational(other)
        if other.num.is_zero:
            raise DegenerateSystemError("division by zero transfer function")
        return FracRational(self.num * other.den, self.den * other.num).normalized()

    def __rtruediv__(self, other):
        return _coerce_rational(other).__truediv__(self)

    def __add__(self, other: "FracRational | FracPoly | float | int") -> "FracRational":
        other = _coerce_rational(other)
        return FracRational(
            self.num * other.den + other.num * self.den, self.den * other.den
        ).normalized()

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> "FracRational":
        return FracRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_coerce_rational(other))

    def __rsub__(self, other):
        return _coerce_rational(other) + (-self)

    def feedback(self, h: "FracRational | FracPoly | float | int") -> "FracRational":
        """Closed loop g / (1 + g*h)."""
        h = _coerce_rational(h)
        den = self.den * h.den + self.num * h.num
        if den.is_zero:
            raise DegenerateSystemError("feedback interconnection is degenerate")
        return FracRational(self.num * h.den, den).normalized()

    def eval_at(self, s: complex) -> complex:
        return self.num.eval_at(s) / self.den.eval_at(s)

    def eval_jomega(self, omega: np.ndarray) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        num = self.num.eval_jomega(w)
        den = self.den.eval_jomega(w)
        out = np.full(w.shape, complex(np.nan, np.nan))
        # a denominator annihilated by cancellation marks a pole on the axis
        ok = np.abs(den) > 1e-12 * self.den._jomega_scale(w)
        np.divide(num, den, out=out, where=ok)
        return out

    def __str__(self) -> str:
        return f"({self.num}) / ({self.den})"


def _coerce_rational(x) -> FracRational:
    if isinstance(x, FracRational):
        return x
    if isinstance(x, FracPoly):
        return FracRational.from_poly(x)
    if isinstance(x, (int, float)):
        return FracRational.constant(float(x))
    raise TypeError(f"cannot use {type(x).__name__} as FracRational")


# -- thin functional aliases over the operator API ---------------------------

def fp_add(p: FracPoly, q: FracPoly) -> FracPoly:
    return p + q


def fp_mul(p: FracPoly, q: FracPoly) -> FracPoly:
    return p * q


def fr_mul(g: FracRational, h: FracRational) -> FracRational:
    return _coerce_rational(g) * _coerce_rational(h)


def fr_feedback(g: FracRational, h) -> FracRational:
    return _coerce_rational(g).feedback(h)


# -- Grunwald-Letnikov weights ------------------------------------------------

@dataclass(frozen=True)
class GlCoeffs:
    """GL binomial weights c_0..c_N for a real differentiation order."""

    alpha: float
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs[0] != 1.0:
            raise ValueError("GL weights must start at 1")


def gl_coefficients(alpha: float, count: int) -> GlCoeffs:
    """Weights of the truncated GL difference, c_j = (-1)^j * binom(alpha, j).

    Computed by the multiplicative recurrence
    ``c_j = c_{j-1} * (1 - (alpha + 1)/j)``, which is numerically stable for
    arbitrary real alpha (positive, zero, or negative orders alike).
    """
    if not math.isfinite(float(alpha)):
        raise ValueError("alpha must be finite")
    if count < 1:
        raise ValueError("count must be >= 1")
    j = np.arange(1, count + 1, dtype=float)
    factors = 1.0 - (float(alpha) + 1.0) / j
    coeffs = np.empty(count + 1)
    coeffs[0] = 1.0
    np.cumprod(factors, out=coeffs[1:])
    return GlCoeffs(float(alpha), coeffs)


# -- frequency response -------------------------------------------------------

def freq_response(g: FracRational | FracPoly, omegas: Sequence[float]) -> np.ndarray:
    """Evaluate g at s = j*omega for each positive omega.

    Grid points where the denominator vanishes come back as NaN (the point
    is flagged, the rest of the grid is still returned).
    """
    w = np.asarray(omegas, dtype=float)
    if w.size == 0:
        raise ValueError("frequency grid is empty")
    if np.any(w <= 0):
        raise ValueError("all frequencies must be > 0")
    return _coerce_rational(g).eval_jomega(w)


# -- commensurate transform ---------------------------------------------------

def commensurate(p: FracPoly, lam: OrderLike) -> np.ndarray:
    """Coefficients (descending) of the polynomial P(w) with w = s**lam.

    Every exponent of p must be an integer multiple of lam; the result
    satisfies ``P(s**lam) == p(s)`` exactly.
    """
    lam = as_order(lam)
    if lam <= 0:
        raise ValueError("base order must be positive")
    if p.is_zero:
        return np.zeros(1)
    degs = []
    for _, o in p.terms:
        r = o / lam
        if r.denominator != 1:
            raise IncommensurateOrderError(
                f"order {o} is not an integer multiple of {lam}"
            )
        degs.append(int(r))
    K = max(degs)
    coeffs = np.zeros(K + 1)
    for (c, _), k in zip(p.terms, degs):
        coeffs[K - k] += c
    return coeffs


def rationalize(order: OrderLike, max_den: int = 100) -> tuple[int, int]:
    """Best coprime p/q approximation of order with q <= max_den."""
    if float(order) <= 0:
        raise ValueError("order must be positive")
    if isinstance(order, Fraction):
        f = order.limit_denominator(max_den)
    else:
        f = Fraction(float(order)).limit_denominator(max_den)
    return f.numerator, f.denominator
