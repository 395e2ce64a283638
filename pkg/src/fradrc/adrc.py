"""Observer and controller synthesis for disturbance-rejection loops.

Three observer families share one runtime and one algebra:

* ``io``  -- the classical integer-order extended state observer (ESO),
  m + 1 states, all derivative orders 1.
* ``ifo`` -- the improved fractional-order ESO: n + 1 states with order
  vector [chi, gamma, ..., gamma, nu], where n = floor(m/chi) + 1 and
  gamma = (m - chi)/(n - 1) so that chi + (n-1)*gamma = m exactly.
* ``fo``  -- a four-state fractional baseline for second-order plants with
  order vector [chi, chi-1, 2-chi, 1] and binomial gains; it estimates the
  lumped disturbance of an order m + chi - 1 chain.

The total-disturbance state feeds the compensation u = (u0 - z_last)/b0,
and the auxiliary controller u0 = kp*(r - z1) - sum(kd_i * z_{i+1}) shapes
the open loop toward a weighted Bode-ideal transfer function
kp/omega_c^(n-1) / (s^chi * (s^gamma/omega_c + 1)^(n-1)).

Runtime integration realizes each fractional state D^q z = rhs as an exact
discrete accumulator driven by an s^(1-q) filter (GL FIR oracle bank or
fitted IIR bank), so integral action is preserved exactly and the
fractional correction is the only approximated piece.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .discretize import (
    DigitalFilter,
    FilterStateError,
    default_fit_band,
    gl_fir,
    iir_fit,
)
from .fracnum import FracPoly, FracRational, as_order
from .plant import DisturbanceProfile, PlantModel, plant_discretize

__all__ = [
    "AdrcOrders",
    "EsoConfig",
    "TrackingConfig",
    "PdConfig",
    "LoopDesign",
    "ObserverRealization",
    "SimResult",
    "OrderConstraintError",
    "derive_orders",
    "eso_gains",
    "tracking_gains",
    "build_observer",
    "observer_step",
    "control_law",
    "io_control_law",
    "closed_loop_simulate",
    "loop_blocks",
    "open_loop_tf",
    "eso_transfer",
    "closed_loop_char_poly",
    "wbitf_approx",
]


class OrderConstraintError(ValueError):
    """An order parameter violates its admissible range."""


@dataclass(frozen=True)
class AdrcOrders:
    """Order bookkeeping for the fractional observer/controller."""

    m: int
    chi: Fraction
    gamma: Fraction
    nu: Fraction
    n: int

    def __post_init__(self):
        if not (1 < self.chi < 2):
            raise OrderConstraintError(f"chi must be in (1, 2), got {self.chi}")
        if self.chi + (self.n - 1) * self.gamma != self.m:
            raise OrderConstraintError("chi + (n-1)*gamma must equal m exactly")


def derive_orders(m: int, chi, nu, max_den: int = 100) -> AdrcOrders:
    """Compute n and gamma from the plant order and chi; validate nu.

    n = floor(m/chi) + 1 and gamma = (m - chi)/(n - 1), so the state-chain
    orders sum to m in exact rational arithmetic.  nu must lie in
    [gamma, chi]; the open endpoints are nominal, equality is accepted with
    a warning since reference designs sit on both boundaries.
    """
    if m < 2:
        raise OrderConstraintError("plant order m must be >= 2")
    chi_f = as_order(chi).limit_denominator(max_den)
    if not (1 < chi_f < 2):
        raise OrderConstraintError(f"chi must be in (1, 2), got {chi}")
    n = math.floor(Fraction(m) / chi_f) + 1
    gamma = (Fraction(m) - chi_f) / (n - 1)
    nu_f = as_order(nu).limit_denominator(max_den)
    if nu_f < gamma or nu_f > chi_f:
        raise OrderConstraintError(
            f"nu must lie in [gamma, chi] = [{gamma}, {chi_f}], got {nu_f}"
        )
    if nu_f == gamma or nu_f == chi_f:
        warnings.warn(
            f"nu = {nu_f} sits on the boundary of (gamma, chi); nominal "
            "stability arguments assume the strict interior",
            stacklevel=2,
        )
    return AdrcOrders(m=m, chi=chi_f, gamma=gamma, nu=nu_f, n=n)


def eso_gains(state_count: int, omega0: float) -> np.ndarray:
    """Binomial observer gains beta_i = C(state_count, i) * omega0^i."""
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    return np.array(
        [math.comb(state_count, i) * omega0**i for i in range(1, state_count + 1)]
    )


@dataclass(frozen=True)
class TrackingConfig:
    """Auxiliary tracking gains kp, kd_1..kd_{n-1}."""

    kp: float
    kd: tuple[float, ...]
    omega_c: float
    omega_g: float

    def __post_init__(self):
        if self.kp <= 0:
            raise ValueError("kp must be positive")
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")

    @staticmethod
    def from_gains(kp: float, kd, chi) -> "TrackingConfig":
        kd = tuple(float(k) for k in np.atleast_1d(kd))
        omega_c = kd[0] ** (1.0 / len(kd)) if kd else 1.0
        omega_g = (kp / omega_c ** len(kd)) ** (1.0 / float(as_order(chi)))
        return TrackingConfig(kp=float(kp), kd=kd, omega_c=omega_c, omega_g=omega_g)


def tracking_gains(
    orders: AdrcOrders,
    omega_c: float,
    omega_g: float,
    literal_indexing: bool = False,
) -> TrackingConfig:
    """Gains that make the ideal closed-loop denominator
    s^chi * (s^gamma + omega_c)^(n-1) + kp.

    kd_i = C(n-1, i-1) * omega_c^(n-i) and kp = omega_g^chi * omega_c^(n-1).
    ``literal_indexing`` switches to the alternative convention
    kd_i = C(n-1, i) * omega_c^(n-1-i) for comparison; it does not reproduce
    the binomial expansion above.
    """
    n = orders.n
    if literal_indexing:
        kd = tuple(math.comb(n - 1, i) * omega_c ** (n - 1 - i) for i in range(1, n))
    else:
        kd = tuple(math.comb(n - 1, i - 1) * omega_c ** (n - i) for i in range(1, n))
    kp = omega_g ** float(orders.chi) * omega_c ** (n - 1)
    return TrackingConfig(kp=kp, kd=kd, omega_c=omega_c, omega_g=omega_g)


@dataclass(frozen=True)
class PdConfig:
    """PD controller k_ip * (1 + k_id * s) for the integer-order baseline."""

    kip: float
    kid: float

    def __post_init__(self):
        if self.kip <= 0 or self.kid <= 0:
            raise ValueError("PD gains must be positive")


@dataclass
class EsoConfig:
    """Everything needed to realize one observer variant."""

    variant: str
    m: int
    omega0: float
    b0: float
    fs: float
    orders: AdrcOrders | None = None
    L: np.ndarray | None = None
    filter_order: int = 6
    filter_band: tuple[float, float] | None = None
    memory_len: int = 2048
    fo_split: Fraction | None = None

    def __post_init__(self):
        if self.variant not in ("io", "fo", "ifo"):
            raise ValueError(f"unknown observer variant {self.variant!r}")
        if self.variant in ("ifo", "fo") and self.orders is None:
            raise ValueError(f"{self.variant} observer requires an AdrcOrders")
        if self.variant == "fo" and self.m != 2:
            raise ValueError("fo observer is only defined for second-order plants")
        if self.omega0 <= 0 or self.fs <= 0:
            raise ValueError("omega0 and fs must be positive")
        if self.b0 == 0:
            raise ValueError("b0 must be nonzero")
        if self.L is None:
            self.L = eso_gains(self.state_count, self.omega0)
        else:
            self.L = np.asarray(self.L, dtype=float)
        if self.L.size != self.state_count:
            raise ValueError(
                f"gain vector length {self.L.size} != state count {self.state_count}"
            )

    @property
    def state_count(self) -> int:
        if self.variant == "io":
            return self.m + 1
        if self.variant == "ifo":
            return self.orders.n + 1
        return 4

    def q_vector(self) -> list[Fraction]:
        """Per-state fractional derivative orders."""
        if self.variant == "io":
            return [Fraction(1)] * (self.m + 1)
        if self.variant == "ifo":
            o = self.orders
            return [o.chi] + [o.gamma] * (o.n - 1) + [o.nu]
        chi = self.orders.chi
        split = self.fo_split if self.fo_split is not None else chi - 1
        q3 = Fraction(self.m) - 1 - split
        if not (0 < split < 1) or q3 <= 0:
            raise OrderConstraintError("fo order split must lie in (0, 1)")
        return [chi, split, q3, Fraction(1)]

    def b_index(self) -> int:
        """Zero-based state index where b0*u enters the chain."""
        if self.variant == "io":
            return self.m - 1
        if self.variant == "ifo":
            return self.orders.n - 1
        return 2

    @property
    def ideal_order(self) -> float:
        """Order of the integrator chain the compensated loop approximates."""
        if self.variant == "fo":
            return self.m + float(self.orders.chi) - 1.0
        return float(self.m)


@dataclass(frozen=True)
class LoopDesign:
    """Observer plus tracking law, the unit the loop operations consume."""

    eso: EsoConfig
    kp: float
    kd: tuple[float, ...]
    label: str = ""

    @staticmethod
    def from_tracking(eso: EsoConfig, trk: TrackingConfig, label: str = "") -> "LoopDesign":
        return LoopDesign(eso=eso, kp=trk.kp, kd=trk.kd, label=label)

    @staticmethod
    def from_pd(eso: EsoConfig, pd: PdConfig, label: str = "") -> "LoopDesign":
        return LoopDesign(eso=eso, kp=pd.kip, kd=(pd.kip * pd.kid,), label=label)


class ObserverRealization:
    """Discrete observer runtime: fractional chain driven sample by sample.

    Each state integrates its right-hand side with an exact accumulator;
    the fractional deficit s^(1 - q_i) runs through the per-state filter
    bank.  States with q_i = 1 need no filter.
    """

    def __init__(self, q, L, b0, fs, filters, b_index):
        self.q = list(q)
        self.L = np.asarray(L, dtype=float)
        self.b0 = float(b0)
        self.h = 1.0 / fs
        self.filters = filters
        self.b_index = b_index
        self.z = np.zeros(len(self.q))
        self._poisoned = False

    def reset(self) -> None:
        self.z[:] = 0.0
        for f in self.filters:
            if f is not None:
                f.reset()
        self._poisoned = False

    def _check_sample(self, value: float, what: str) -> None:
        if self._poisoned:
            raise FilterStateError("observer state poisoned; reset() required")
        if not math.isfinite(value):
            self._poisoned = True
            raise FilterStateError(f"non-finite {what} sample")

    def _gains(self):
        g = np.empty(len(self.q))
        bias = np.empty(len(self.q))
        for i, f in enumerate(self.filters):
            g[i] = 1.0 if f is None else f.feedthrough
            bias[i] = 0.0 if f is None else f.zero_input_output()
        return g, bias

    def begin_step(self, y: float):
        """Affine view of this step: z_new = base + ugain * u.

        The correction e = y - z1(after update) is solved implicitly, which
        removes the sample of delay an explicit correction would insert into
        every observer feedback path.  Call :meth:`finish_step` with the
        chosen input to actually advance; this only peeks at filter state.
        """
        self._check_sample(y, "measurement")
        z = self.z
        ns = z.size
        h = self.h
        g, bias = self._gains()
        chain1 = z[1] if ns > 1 else 0.0
        den_e = 1.0 + h * g[0] * self.L[0]
        e0 = (y - z[0] - h * (bias[0] + g[0] * chain1)) / den_e
        eu = -h * g[0] * self.b0 / den_e if self.b_index == 0 else 0.0
        base = np.empty(ns)
        ugain = np.empty(ns)
        for i in range(ns):
            chain = z[i + 1] if i + 1 < ns else 0.0
            base[i] = z[i] + h * (bias[i] + g[i] * (chain + self.L[i] * e0))
            ugain[i] = h * g[i] * (self.L[i] * eu + (self.b0 if i == self.b_index else 0.0))
        self._pending = (e0, eu)
        return base, ugain

    def finish_step(self, u: float) -> np.ndarray:
        """Advance the filters and states with the resolved input."""
        self._check_sample(u, "input")
        e0, eu = self._pending
        e = e0 + eu * u
        z = self.z
        ns = z.size
        rhs = np.empty(ns)
        for i in range(ns):
            r = self.L[i] * e
            if i + 1 < ns:
                r += z[i + 1]
            if i == self.b_index:
                r += self.b0 * u
            rhs[i] = r
        for i in range(ns):
            v = rhs[i] if self.filters[i] is None else self.filters[i].step(rhs[i])
            z[i] += self.h * v
        return z.copy()

    def step(self, u: float, y: float) -> np.ndarray:
        """One sample period with a known (already applied) input u."""
        self.begin_step(y)
        return self.finish_step(u)


_FIT_CACHE: dict[tuple, DigitalFilter] = {}


def build_observer(cfg: EsoConfig, bank: str = "iir") -> ObserverRealization:
    """Realize the observer with the GL-oracle or fitted-IIR filter bank."""
    if bank not in ("iir", "gl"):
        raise ValueError("bank must be 'iir' or 'gl'")
    q = cfg.q_vector()
    filters = []
    for qi in q:
        a = Fraction(1) - qi
        if a == 0:
            filters.append(None)
            continue
        if bank == "gl":
            key = ("gl", a, cfg.fs, cfg.memory_len)
            if key not in _FIT_CACHE:
                _FIT_CACHE[key] = gl_fir(float(a), cfg.fs, cfg.memory_len)
        else:
            band = cfg.filter_band or default_fit_band(cfg.fs)
            key = ("iir", a, cfg.fs, cfg.filter_order, band)
            if key not in _FIT_CACHE:
                _FIT_CACHE[key] = iir_fit(float(a), cfg.fs, cfg.filter_order, band=band)
        proto = _FIT_CACHE[key]
        f = DigitalFilter(proto.b, proto.a, proto.fs, _stages=_clone_stages(proto))
        f.reset()
        filters.append(f)
    return ObserverRealization(q, cfg.L, cfg.b0, cfg.fs, filters, cfg.b_index())


def _clone_stages(f: DigitalFilter):
    import copy

    return copy.deepcopy(f._stages)


def observer_step(obs: ObserverRealization, u: float, y: float) -> np.ndarray:
    return obs.step(u, y)


def control_law(z: np.ndarray, r: float, trk: TrackingConfig, b0: float) -> float:
    """u = (kp*(r - z1) - sum(kd_i * z_{i+1}) - z_last) / b0."""
    if b0 == 0:
        raise ValueError("b0 must be nonzero")
    u0 = trk.kp * (r - z[0])
    for i, k in enumerate(trk.kd):
        u0 -= k * z[i + 1]
    return (u0 - z[-1]) / b0


def io_control_law(z: np.ndarray, r: float, kip: float, kid: float, b0: float) -> float:
    """PD form: u0 = kip*(r - z1) - kip*kid*z2, then disturbance compensation."""
    if b0 == 0:
        raise ValueError("b0 must be nonzero")
    u0 = kip * (r - z[0]) - kip * kid * z[1]
    return (u0 - z[2]) / b0


@dataclass
class SimResult:
    """Sampled closed-loop trajectories."""

    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    u: np.ndarray
    z: np.ndarray
    f_hat: np.ndarray
    f_true: np.ndarray
    d: np.ndarray
    stable: bool = True
    abort_index: int | None = None


def closed_loop_simulate(
    p: PlantModel,
    design: LoopDesign,
    ref: float,
    dist: DisturbanceProfile,
    dt: float,
    T: float,
    bank: str = "iir",
    observer: ObserverRealization | None = None,
) -> SimResult:
    """Run the sampled loop: measure y, update observer, apply control.

    At each sample the new estimate and the input it produces are coupled
    through the observer's b0 path; both are affine, so the loop resolves
    them exactly instead of inserting a sample of delay.  Divergence
    (|y| above 1e6 * max(|ref|, 1)) aborts early and flags the run
    unstable.
    """
    N = int(round(T / dt))
    if N < 1:
        raise ValueError("simulation horizon shorter than one sample")
    cfg = design.eso
    if abs(cfg.fs * dt - 1.0) > 1e-9:
        raise ValueError("observer sample rate must equal 1/dt")
    obs = observer if observer is not None else build_observer(cfg, bank=bank)
    obs.reset()
    F, G = plant_discretize(p, dt)
    m = p.m
    a = np.asarray(p.a)
    ns = cfg.state_count
    t = np.arange(N) * dt
    out = SimResult(
        t=t,
        r=np.full(N, float(ref)),
        y=np.zeros(N),
        u=np.zeros(N),
        z=np.zeros((N, ns)),
        f_hat=np.zeros(N),
        f_true=np.zeros(N),
        d=np.asarray(dist.sample(t), dtype=float),
    )
    x = np.zeros(m)
    limit = 1e6 * max(abs(ref), 1.0)
    for k in range(N):
        y = x[0]
        if not np.isfinite(y) or abs(y) > limit:
            out.stable = False
            out.abort_index = k
            for arr in (out.y, out.u, out.f_hat, out.f_true):
                arr[k:] = arr[max(k - 1, 0)]
            break
        # the estimate this sample and the input it feeds are coupled;
        # both are affine, so resolve the scalar loop exactly
        base, ugain = obs.begin_step(y)
        num = design.kp * (ref - base[0]) - base[-1]
        den = cfg.b0 + design.kp * ugain[0] + ugain[-1]
        for i, kd in enumerate(design.kd):
            num -= kd * base[i + 1]
            den += kd * ugain[i + 1]
        u = num / den
        z = obs.finish_step(u)
        dk = out.d[k]
        out.y[k] = y
        out.u[k] = u
        out.z[k] = z
        out.f_hat[k] = z[-1]
        out.f_true[k] = -float(a @ x) + (p.b - cfg.b0) * u + dk
        x = F @ x + G * (p.b * u + dk)
    return out


# -- symbolic loop algebra ----------------------------------------------------

def _observer_elimination(cfg: EsoConfig):
    """Solve the observer chain for Z_i = R_i * E + S_i * U (Laplace domain).

    E = y - z1 is the correction signal; going down the chain from the top
    state, Z_i = (Z_{i+1} + beta_i*E + [i == b_index]*b0*U) / s^{q_i}.
    """
    q = cfg.q_vector()
    ns = len(q)
    zero = FracRational.constant(0.0)
    R = [zero] * ns
    S = [zero] * ns
    up_r, up_s = zero, zero
    for i in reversed(range(ns)):
        inv = FracRational(FracPoly.constant(1.0), FracPoly.s_power(q[i]))
        R[i] = (up_r + float(cfg.L[i])) * inv
        S[i] = (up_s + (cfg.b0 if i == cfg.b_index() else 0.0)) * inv
        up_r, up_s = R[i], S[i]
    return R, S


def eso_transfer(p: PlantModel, cfg: EsoConfig) -> dict:
    """Transfer functions of the compensation loop around the observer.

    Returns the maps from u and y to the disturbance estimate z_last, and
    P, the compensated plant u0 -> y obtained with u = (u0 - z_last)/b0.
    """
    R, S = _observer_elimination(cfg)
    one_plus_r1 = FracRational.constant(1.0) + R[0]
    t_y = R[-1] / one_plus_r1
    t_u = S[-1] - R[-1] * S[0] / one_plus_r1
    G = p.transfer()
    P = G / (FracRational.constant(cfg.b0) + t_u + G * t_y)
    return {"u_to_fhat": t_u, "y_to_fhat": t_y, "P": P}


def _z_coefficients(p: PlantModel, cfg: EsoConfig):
    """Per-state transfer coefficients Z_i = (Zu_i + G*Zy_i) * U with y = G*u."""
    R, S = _observer_elimination(cfg)
    one_plus_r1 = FracRational.constant(1.0) + R[0]
    G = p.transfer()
    Zu = [S[i] - R[i] * S[0] / one_plus_r1 for i in range(len(R))]
    Zy = [R[i] / one_plus_r1 for i in range(len(R))]
    return [zu + G * zy for zu, zy in zip(Zu, Zy)]


def open_loop_tf(p: PlantModel, design: LoopDesign) -> dict:
    """Exact open-loop transfer z1/e0 and its Bode-ideal approximation.

    The loop is broken at the tracking error: u0 = kp*e0 - sum(kd_i*z_{i+1}),
    u = (u0 - z_last)/b0, plant and observer closed.  The approximation is
    the weighted Bode-ideal shape the design targets.
    """
    cfg = design.eso
    Zc = _z_coefficients(p, cfg)
    D = FracRational.constant(cfg.b0) + Zc[-1]
    for i, kd in enumerate(design.kd):
        D = D + kd * Zc[i + 1]
    exact = (design.kp * Zc[0]) / D
    out = {"exact": exact}
    if cfg.variant == "ifo":
        o = cfg.orders
        trk = TrackingConfig.from_gains(design.kp, design.kd, o.chi)
        out["approx"] = wbitf_approx(
            design.kp, trk.omega_c, o.chi, o.gamma, o.n - 1
        )
    elif cfg.variant == "fo":
        kfd = design.kd[0]
        out["approx"] = wbitf_approx(design.kp, kfd, cfg.orders.chi, Fraction(1), 1)
    return out


def wbitf_approx(kp: float, omega_c: float, chi, gamma, kappa: int) -> FracRational:
    """Weighted Bode-ideal loop kp/omega_c^kappa / (s^chi (s^gamma/omega_c+1)^kappa)."""
    chi = as_order(chi)
    gamma = as_order(gamma)
    filt = FracPoly.constant(1.0)
    cell = FracPoly.from_terms([(1.0 / omega_c, gamma), (1.0, 0)])
    for _ in range(kappa):
        filt = filt * cell
    den = FracPoly.s_power(chi) * filt
    return FracRational(FracPoly.constant(kp / omega_c**kappa), den)


def loop_blocks(p: PlantModel, design: LoopDesign) -> dict:
    """The four interconnection blocks of the closed error/output loop.

    G_m = w1/e1 collects the gain-weighted error-chain transfers; G_n maps
    w1 to y through the shaped tracking denominator; H_m is the (negated)
    inverse observer characteristic polynomial; H_n feeds y^(nu) times the
    plant coefficients back.  Only defined for the ifo design.
    """
    cfg = design.eso
    if cfg.variant != "ifo":
        raise ValueError("loop blocks are defined for the ifo design")
    o = cfg.orders
    beta = cfg.L
    n = o.n
    chi, gamma, nu = o.chi, o.gamma, o.nu

    def phi(i: int) -> FracPoly:
        # E_{i+1}/E_1 = s^{(i-1)gamma+chi} + sum_j beta_j s^{(i-j)gamma} + beta_i
        terms = [(1.0, (i - 1) * gamma + chi)]
        for j in range(1, i):
            terms.append((float(beta[j - 1]), (i - j) * gamma))
        terms.append((float(beta[i - 1]), 0))
        return FracPoly.from_terms(terms)

    gm = FracPoly.constant(design.kp)
    for i, kd in enumerate(design.kd, start=1):
        gm = gm + kd * phi(i)
    gm = gm + phi(n)

    den_gn = FracPoly.from_terms(
        [(1.0, (n - 1) * gamma + chi)]
        + [(kd, (i - 1) * gamma + chi) for i, kd in enumerate(design.kd, start=1)]
        + [(design.kp, 0)]
    )

    lam_terms = [(1.0, (n - 1) * gamma + chi + nu)]
    for i in range(1, n + 1):
        lam_terms.append((float(beta[i - 1]), (n - i) * gamma + nu))
    lam_terms.append((float(beta[n]), 0))
    lam = FracPoly.from_terms(lam_terms)

    hn = FracPoly.from_terms([(-ai, nu + i) for i, ai in enumerate(p.a)])

    return {
        "G_m": FracRational.from_poly(gm),
        "G_n": FracRational(FracPoly.constant(1.0), den_gn),
        "H_m": FracRational(FracPoly.constant(-1.0), lam),
        "H_n": FracRational.from_poly(hn),
        "eso_char": lam,
        "tracking_den": den_gn,
    }


def closed_loop_char_poly(p: PlantModel, design: LoopDesign) -> FracPoly:
    """Characteristic fractional polynomial of the full closed loop.

    For the ifo design this is den(G_n)*Lambda + G_m * s^nu * sum(a_i s^i),
    assembled from the blocks; b must equal b0 for the cancellation this
    form assumes.
    """
    cfg = design.eso
    if p.b != cfg.b0:
        raise ValueError(
            f"closed-loop polynomial assumes b = b0 (got b={p.b}, b0={cfg.b0})"
        )
    if cfg.variant == "ifo":
        blocks = loop_blocks(p, design)
        feed = FracPoly.from_terms(
            [(ai, cfg.orders.nu + i) for i, ai in enumerate(p.a)]
        )
        return blocks["tracking_den"] * blocks["eso_char"] + blocks["G_m"].num * feed
    # generic variants: numerator of b0 + sum kd_i Z_{i+1} + Z_last + kp*Z_1
    Zc = _z_coefficients(p, cfg)
    D = FracRational.constant(cfg.b0) + Zc[-1] + design.kp * Zc[0]
    for i, kd in enumerate(design.kd):
        D = D + kd * Zc[i + 1]
    return D.num
