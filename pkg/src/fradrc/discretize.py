"""Digital realizations of the fractional operator s**alpha.

Two routes are provided:

* :func:`gl_fir` -- the truncated Grunwald-Letnikov FIR.  With a long
  memory it is the ground-truth reference; cost grows with memory length.
* :func:`iir_fit` -- a compact IIR fitted to (j*w)**alpha over a frequency
  band by vector fitting with minimax (Lawson) reweighting.  This is the
  production filter used inside observers at a stated sample rate and order.

Fitted filters keep a numerically benign internal form: a cascade of an
optional FIR differencer and a parallel bank of first-order (or biquad)
sections.  Expanding such a filter into a single b/a pair clusters poles
near z = 1 and loses precision, so the expanded coefficients are exposed
for inspection/export only; stepping and frequency evaluation always run
on the sections.
"""

from __future__ import annotations

import math

import numpy as np

from .fracnum import gl_coefficients

__all__ = [
    "DigitalFilter",
    "FilterStateError",
    "FitError",
    "default_fit_band",
    "gl_fir",
    "iir_fit",
    "filter_step",
]


class FilterStateError(RuntimeError):
    """Filter state was poisoned by a non-finite input; call reset()."""


class FitError(RuntimeError):
    """Least-squares fit did not reach an acceptable residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class _Section:
    """One direct-form-II-transposed b/a section with its own delay line."""

    def __init__(self, b, a):
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        ns = max(self.b.size, self.a.size) - 1
        self._bp = np.zeros(ns + 1)
        self._bp[: self.b.size] = self.b
        self._ap = np.zeros(ns + 1)
        self._ap[: self.a.size] = self.a
        self.state = np.zeros(ns)

    def step(self, u: float) -> float:
        if self.state.size == 0:
            return self._bp[0] * u
        y = self._bp[0] * u + self.state[0]
        s = self._bp[1:] * u - self._ap[1:] * y
        s[:-1] += self.state[1:]
        self.state = s
        return y

    @property
    def feedthrough(self) -> float:
        return float(self._bp[0])

    @property
    def bias(self) -> float:
        """Output this section would produce right now for a zero input."""
        return float(self.state[0]) if self.state.size else 0.0

    def response(self, zinv: np.ndarray) -> np.ndarray:
        num = np.polynomial.polynomial.polyval(zinv, self.b)
        den = np.polynomial.polynomial.polyval(zinv, self.a)
        return num / den


class _FirStage:
    def __init__(self, taps):
        self.sections = [_Section(taps, [1.0])]

    def step(self, u):
        return self.sections[0].step(u)

    @property
    def feedthrough(self):
        return self.sections[0].feedthrough

    @property
    def bias(self):
        return self.sections[0].bias

    def response(self, zinv):
        return self.sections[0].response(zinv)

    def poles(self):
        return np.zeros(0, dtype=complex)


class _ParallelStage:
    """d0 + sum of small sections, evaluated and stepped per section."""

    def __init__(self, d0, sections):
        self.d0 = float(d0)
        self.sections = [_Section(b, a) for b, a in sections]

    def step(self, u):
        y = self.d0 * u
        for s in self.sections:
            y += s.step(u)
        return y

    @property
    def feedthrough(self):
        return self.d0 + sum(s.feedthrough for s in self.sections)

    @property
    def bias(self):
        return sum(s.bias for s in self.sections)

    def response(self, zinv):
        out = np.full(zinv.shape, complex(self.d0))
        for s in self.sections:
            out = out + s.response(zinv)
        return out

    def poles(self):
        ps = [np.roots(s.a) for s in self.sections if s.a.size > 1]
        return np.concatenate(ps) if ps else np.zeros(0, dtype=complex)


class DigitalFilter:
    """Discrete-time filter b(z)/a(z) with per-instance state.

    ``b``/``a`` are the expanded transfer-function coefficients (a[0] = 1);
    ``state`` concatenates the delay lines of the internal stages and has
    length ``max(len(a), len(b)) - 1``.
    """

    def __init__(self, b, a, fs: float, _stages=None):
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        if self.b.size == 0 or self.a.size == 0:
            raise ValueError("coefficient arrays must be non-empty")
        if self.a[0] != 1.0:
            raise ValueError("a[0] must be 1")
        if fs <= 0:
            raise ValueError("fs must be positive")
        self.fs = float(fs)
        if _stages is None:
            # a single-section stage with no passthrough is b/a itself
            _stages = [_ParallelStage(0.0, [(self.b, self.a)])]
        self._stages = _stages
        self._poisoned = False
        nstate = sum(s.state.size for st in self._stages for s in st.sections)
        if nstate != max(self.a.size, self.b.size) - 1:
            raise ValueError("internal state does not match coefficient orders")

    @classmethod
    def from_stages(cls, stages, fs: float) -> "DigitalFilter":
        b, a = np.array([1.0]), np.array([1.0])
        for st in stages:
            if isinstance(st, _FirStage):
                b = np.convolve(b, st.sections[0].b)
            else:
                num = np.array([st.d0])
                den = np.array([1.0])
                for s in st.sections:
                    num = np.convolve(num, s.a)
                    den = np.convolve(den, s.a)
                acc = num
                for i, s in enumerate(st.sections):
                    term = s.b
                    for j, so in enumerate(st.sections):
                        if j != i:
                            term = np.convolve(term, so.a)
                    n = max(acc.size, term.size)
                    acc = np.pad(acc, (0, n - acc.size)) + np.pad(term, (0, n - term.size))
                b = np.convolve(b, acc)
                a = np.convolve(a, den)
        return cls(b, a, fs, _stages=stages)

    @property
    def state(self) -> np.ndarray:
        return np.concatenate(
            [s.state for st in self._stages for s in st.sections]
            or [np.zeros(0)]
        )

    def reset(self) -> None:
        for st in self._stages:
            for s in st.sections:
                s.state[:] = 0.0
        self._poisoned = False

    def step(self, u: float) -> float:
        """Advance one sample."""
        if self._poisoned:
            raise FilterStateError("filter state poisoned; reset() required")
        if not math.isfinite(u):
            self._poisoned = True
            raise FilterStateError("non-finite input sample")
        y = u
        for st in self._stages:
            y = st.step(y)
        return y

    @property
    def feedthrough(self) -> float:
        """Instantaneous gain: step(u) == feedthrough*u + zero_input_output()."""
        g = 1.0
        for st in self._stages:
            g *= st.feedthrough
        return g

    def zero_input_output(self) -> float:
        """What step(0.0) would return, without advancing the state."""
        y = 0.0
        for st in self._stages:
            y = st.feedthrough * y + st.bias
        return y

    def response(self, omegas) -> np.ndarray:
        """Frequency response at continuous-time frequencies (rad/s)."""
        w = np.asarray(omegas, dtype=float)
        zinv = np.exp(-1j * w / self.fs)
        out = np.ones(zinv.shape, dtype=complex)
        for st in self._stages:
            out = out * st.response(zinv)
        return out

    def poles(self) -> np.ndarray:
        ps = [st.poles() for st in self._stages]
        ps = [p for p in ps if p.size]
        return np.concatenate(ps) if ps else np.zeros(0, dtype=complex)

    @property
    def is_stable(self) -> bool:
        p = self.poles()
        return bool(p.size == 0 or np.max(np.abs(p)) < 1.0)

    def write_csv(self, path) -> None:
        """Export expanded coefficients: first row b, second row a."""
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("b," + ",".join(f"{c:.12g}" for c in self.b) + "\n")
            f.write("a," + ",".join(f"{c:.12g}" for c in self.a) + "\n")


def filter_step(f: DigitalFilter, u: float) -> float:
    return f.step(u)


def gl_fir(alpha: float, fs: float, memory_len: int) -> DigitalFilter:
    """Truncated-GL FIR for s**alpha: b_j = c_j / h**alpha, h = 1/fs."""
    if fs <= 0:
        raise ValueError("fs must be positive")
    if memory_len < 2:
        raise ValueError("memory_len must be >= 2")
    h = 1.0 / fs
    c = gl_coefficients(alpha, memory_len - 1).coeffs
    taps = c / h ** alpha
    return DigitalFilter.from_stages([_FirStage(taps)], fs)


def default_fit_band(fs: float) -> tuple[float, float]:
    """Default band (rad/s) for IIR fits: 1e-2 * 2*pi up to 0.4*pi*fs."""
    return (2.0 * math.pi * 1e-2, 0.4 * math.pi * fs)


def _pair_columns(lam: np.ndarray, poles: np.ndarray):
    """Real-coefficient partial-fraction basis, pairing complex poles."""
    cols = []
    layout = []  # ('r', pole) or ('c', pole) pairs contribute two columns
    i = 0
    order = len(poles)
    while i < order:
        p = poles[i]
        if abs(p.imag) < 1e-12 * max(1.0, abs(p)):
            cols.append(1.0 / (lam - p.real))
            layout.append(("r", p.real))
            i += 1
        else:
            phi = 1.0 / (lam - p)
            phic = 1.0 / (lam - np.conj(p))
            cols.append(phi + phic)
            cols.append(1j * (phi - phic))
            layout.append(("c", p))
            i += 2
    return np.stack(cols, axis=1), layout


def _sections_from(layout, coeffs, d0):
    """Map lambda-domain residues to z-domain parallel sections.

    lambda = (z - 1)/(z + 1), so c/(lambda - p) becomes
    g*(1 + z^-1)/(1 - pi*z^-1) with pi = (1+p)/(1-p), g = c/(1-p).
    """
    sections = []
    k = 0
    for kind, p in layout:
        if kind == "r":
            c = coeffs[k]
            k += 1
            g = c / (1.0 - p)
            pi = (1.0 + p) / (1.0 - p)
            sections.append((np.array([g, g]), np.array([1.0, -pi])))
        else:
            c = coeffs[k] + 1j * coeffs[k + 1]
            k += 2
            g = c / (1.0 - p)
            pi = (1.0 + p) / (1.0 - p)
            # conjugate pair combined into one real biquad, common (1+z^-1)
            b1 = np.array([2 * g.real, -2 * (g * np.conj(pi)).real])
            bq = np.convolve(np.array([1.0, 1.0]), b1)
            aq = np.array([1.0, -2 * pi.real, abs(pi) ** 2])
            sections.append((bq, aq))
    return _ParallelStage(d0, sections)


def _vector_fit(theta, target, order, vf_iters=25, lawson_iters=40):
    """Fit target(e^{j*theta}) with an order-`order` rational, poles stable.

    Works in the bilinear variable lambda = j*tan(theta/2) where log-spaced
    real starting poles condition the basis; Lawson reweighting pushes the
    relative error toward equiripple.  Returns (stage, max_rel_err).
    """
    lam = 1j * np.tan(theta / 2.0)
    base = 1.0 / np.abs(target)
    lawson = np.ones_like(theta)
    amin, amax = np.abs(lam).min(), np.abs(lam).max()
    poles = -np.logspace(math.log10(amin), math.log10(amax), order).astype(complex)
    best = None
    for it in range(vf_iters + lawson_iters):
        wt = base * np.sqrt(lawson)
        phi, layout = _pair_columns(lam, poles)
        M = np.concatenate(
            [phi, np.ones((lam.size, 1)), -(target[:, None] * phi)], axis=1
        )
        Mw = M * wt[:, None]
        A = np.concatenate([Mw.real, Mw.imag])
        y = np.concatenate([(target * wt).real, (target * wt).imag])
        x, *_ = np.linalg.lstsq(A, y, rcond=None)
        ncols = phi.shape[1]
        wv = x[ncols + 1 :]
        # sigma weights back to per-pole complex residues for relocation
        res = []
        k = 0
        for kind, p in layout:
            if kind == "r":
                res.append(wv[k])
                k += 1
            else:
                res.append(wv[k] + 1j * wv[k + 1])
                res.append(wv[k] - 1j * wv[k + 1])
                k += 2
        pall = []
        for kind, p in layout:
            pall.append(p)
            if kind == "c":
                pall.append(np.conj(p))
        pall = np.asarray(pall, dtype=complex)
        newp = np.linalg.eigvals(np.diag(pall) - np.outer(np.ones(order), np.asarray(res)))
        newp = np.where(newp.real > 0, -newp.real + 1j * newp.imag, newp)
        newp = newp[np.argsort(newp.imag >= 0, kind="stable")]  # keep pairs adjacent
        poles = np.sort_complex(newp)
        if it >= vf_iters - 1:
            phi, layout = _pair_columns(lam, poles)
            M2 = np.concatenate([phi, np.ones((lam.size, 1))], axis=1)
            M2w = M2 * wt[:, None]
            A2 = np.concatenate([M2w.real, M2w.imag])
            x2, *_ = np.linalg.lstsq(
                A2, np.concatenate([(target * wt).real, (target * wt).imag]), rcond=None
            )
            coeffs, d0 = x2[:-1], x2[-1]
            fit = phi @ coeffs + d0
            rel = np.abs(fit / target - 1.0)
            if best is None or rel.max() < best[0]:
                best = (float(rel.max()), layout, coeffs.copy(), float(d0))
            lawson = lawson * np.maximum(rel, 1e-8)
            lawson = lawson / lawson.mean()
    maxrel, layout, coeffs, d0 = best
    return _sections_from(layout, coeffs, d0), maxrel


def iir_fit(
    alpha: float,
    fs: float,
    order: int,
    band: tuple[float, float] | None = None,
) -> DigitalFilter:
    """Fit a stable order-`order` IIR to (j*w)**alpha over `band` (rad/s).

    Weighted least squares on a log grid (vector fitting with relative
    weights plus Lawson reweighting).  Orders above 1 factor out one exact
    first-difference ``fs*(1 - z^-1)`` and fit the remaining alpha - 1, which
    keeps the near-Nyquist phase accurate.  The result is guaranteed stable:
    vector-fit pole relocation reflects any right-half-plane pole, and the
    bilinear map back to z keeps reflected poles strictly inside the unit
    circle.

    Raises :class:`FitError` when the residual over the requested band stays
    above 0.5 max relative error (about 6 dB / 30 deg).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if fs <= 0:
        raise ValueError("fs must be positive")
    if alpha == 0.0:
        return DigitalFilter(b=np.array([1.0]), a=np.array([1.0]), fs=fs)
    if band is None:
        band = default_fit_band(fs)
    w_lo, w_hi = band
    if not (0.0 < w_lo < w_hi < math.pi * fs):
        raise ValueError("band must satisfy 0 < w_lo < w_hi < pi*fs")

    npts = max(300, 60 * order)
    w = np.logspace(math.log10(w_lo), math.log10(w_hi), npts)
    theta = w / fs
    target = (1j * w) ** float(alpha)

    stages = []
    if alpha > 1.0:
        stages.append(_FirStage(np.array([fs, -fs])))
        target = target / (fs * (1.0 - np.exp(-1j * theta)))

    stage, maxrel = _vector_fit(theta, target, order)
    stages.append(stage)
    if maxrel > 0.5:
        raise FitError(
            f"fit residual {maxrel:.3g} above threshold for alpha={alpha}, "
            f"order={order}, band=({w_lo:.4g}, {w_hi:.4g})",
            residual=maxrel,
        )
    return DigitalFilter.from_stages(stages, fs)
