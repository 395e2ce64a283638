"""Acceptance gate: one test per shipped criterion, each printing a
PASS/FAIL line with its headline numbers and enforcing its runtime budget.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.
"""

import contextlib
import math
import time

import numpy as np
import pytest
import scipy.special
import sympy

from fradrc.adrc import (
    EsoConfig,
    LoopDesign,
    TrackingConfig,
    closed_loop_simulate,
    derive_orders,
    eso_gains,
    eso_transfer,
    open_loop_tf,
)
from fradrc.analysis import FreqGrid, margins, mse_delta, overshoot_fluctuation, step_metrics
from fradrc.discretize import gl_fir, iir_fit
from fradrc.fracnum import gl_coefficients
from fradrc.plant import DisturbanceProfile, PlantModel
from fradrc.stability import (
    char_poly_closed,
    find_omega0,
    kharitonov_boundaries,
    routh_table,
    sector_check,
)

BENCH = PlantModel(a=(10.0, 10.0), b=5.0)
MOTOR = PlantModel(a=(1642.0, 116.4), b=1364.1)


@contextlib.contextmanager
def criterion(name: str, budget_s: float):
    t0 = time.perf_counter()
    info = {}
    try:
        yield info
    except Exception:
        print(f"FAIL {name}")
        raise
    elapsed = time.perf_counter() - t0
    detail = info.get("detail", "")
    print(f"PASS {name}: {detail} [{elapsed:.2f}s]")
    assert elapsed < budget_s, f"{name} exceeded runtime budget {budget_s}s"


def bench_orders(nu):
    with pytest.warns(UserWarning):
        return derive_orders(2, 1.2, nu)


def ifo_design(plant, omega0, kp, kd, fs, nu=1.2, band=(1.0, 5000.0), order=6):
    o = bench_orders(nu)
    cfg = EsoConfig(variant="ifo", m=plant.m, omega0=omega0, b0=plant.b, fs=fs,
                    orders=o, filter_order=order, filter_band=band)
    return LoopDesign.from_tracking(
        cfg, TrackingConfig.from_gains(kp, [kd], o.chi), "ifo"
    )


def test_c01_gl_recurrence_vs_gamma():
    with criterion("criterion 1 (GL weights vs gamma formula)", 1.0) as info:
        worst = 0.0
        for alpha in (0.3, 0.5, 0.8, 1.2, 1.7):
            c = gl_coefficients(alpha, 64).coeffs
            j = np.arange(65)
            oracle = (-1.0) ** j * scipy.special.binom(alpha, j)
            worst = max(worst, float(np.max(np.abs(c - oracle))))
        assert worst < 1e-10
        info["detail"] = f"max |recurrence - gamma| = {worst:.2e}"


def test_c02_discretization_fidelity():
    with criterion("criterion 2 (fitted IIR fidelity)", 5.0) as info:
        w = np.logspace(0.0, math.log10(2513.0), 400)
        summary = []
        for alpha in (0.8, 1.2):
            f = iir_fit(alpha, 8000.0, 6, band=(1.0, 2513.0))
            assert f.is_stable
            h = f.response(w)
            ideal = (1j * w) ** alpha
            mag = 20 * np.log10(np.abs(h / ideal))
            phase = np.degrees(np.angle(h / ideal))
            assert np.max(np.abs(mag)) < 1.0
            assert np.max(np.abs(phase)) < 3.0
            oracle = gl_fir(alpha, 8000.0, 1 << 19)
            mag_gl = 20 * np.log10(np.abs(h / oracle.response(w)))
            assert np.max(np.abs(mag_gl)) < 0.5
            summary.append(
                f"a={alpha}: {np.max(np.abs(mag)):.2f}dB/"
                f"{np.max(np.abs(phase)):.2f}deg, vs GL {np.max(np.abs(mag_gl)):.2f}dB"
            )
        info["detail"] = "; ".join(summary)


def test_c03_boundary_factorization():
    with criterion("criterion 3 (third boundary polynomial factors)", 1.0) as info:
        worst = 0.0
        x = sympy.symbols("x")
        for n in (2, 3):
            for w0 in (10.0, 500.0, 1200.0):
                p3 = kharitonov_boundaries("eso", {"L": eso_gains(n + 1, w0)})[2]
                poly = sympy.Poly(
                    [sympy.nsimplify(c, rational=True) for c in p3], x
                )
                roots = []
                for root, mult in sympy.roots(poly, multiple=False).items():
                    roots.extend([complex(root.evalf(30))] * mult)
                assert len(roots) == n + 1
                worst = max(worst, float(np.max(np.abs(np.array(roots) + w0)) / w0))
        assert worst < 1e-6
        info["detail"] = f"max |root + w0|/w0 = {worst:.2e}"


def test_c04_reference_margins():
    with criterion("criterion 4 (full open-loop margins)", 5.0) as info:
        design = ifo_design(BENCH, 1200.0, 1.2e6, 4000.0, 8000.0)
        tf = open_loop_tf(BENCH, design)
        mg = margins(tf["exact"])
        assert mg.unique
        assert mg.omega_gc == pytest.approx(114.0, rel=0.05)
        assert mg.phase_margin_deg == pytest.approx(71.3, abs=2.0)
        info["detail"] = (
            f"crossover {mg.omega_gc:.1f} rad/s, PM {mg.phase_margin_deg:.2f} deg"
        )


def test_c05_matched_low_frequency_gains():
    with criterion("criterion 5 (matched loop gains)", 1.0) as info:
        o = bench_orders(1.2)
        d_if = ifo_design(BENCH, 500.0, 9.6e4, 400.0, 40000.0, band=(1.0, 20000.0))
        cfg_fo = EsoConfig(variant="fo", m=2, omega0=500.0, b0=5.0, fs=40000.0,
                           orders=o, filter_band=(1.0, 20000.0))
        d_fo = LoopDesign(eso=cfg_fo, kp=2.9328e5, kd=(1222.0,), label="fo")
        gains = []
        for d in (d_if, d_fo):
            approx = open_loop_tf(BENCH, d)["approx"]
            w = 1e-6
            gains.append(abs(approx.eval_at(1j * w)) * w ** 1.2)
        for g in gains:
            assert g == pytest.approx(240.0, rel=0.01)
        info["detail"] = f"gains {gains[0]:.3f} and {gains[1]:.3f}"


def test_c06_estimation_quality_ordering():
    with criterion("criterion 6 (estimation-quality ordering)", 10.0) as info:
        orders = bench_orders(0.8)
        grid = FreqGrid.make()
        pairs = []

        def mses(a1, w0):
            plant = PlantModel(a=(10.0, a1), b=5.0)
            ci = EsoConfig(variant="ifo", m=2, omega0=w0, b0=5.0, fs=8000.0,
                           orders=orders)
            cf = EsoConfig(variant="fo", m=2, omega0=w0, b0=5.0, fs=8000.0,
                           orders=orders)
            mi = mse_delta(eso_transfer(plant, ci)["P"], 2.0, grid)["mse"]
            mf = mse_delta(eso_transfer(plant, cf)["P"], 2.2, grid)["mse"]
            return mi, mf

        for a1 in (5.0, 10.0, 20.0):
            mi, mf = mses(a1, 500.0)
            assert mi < mf
            pairs.append((mi, mf))
        for w0 in (250.0, 500.0, 1000.0):
            mi, mf = mses(10.0, w0)
            assert mi < mf
        info["detail"] = (
            f"base case mse {pairs[1][0]:.4f} < {pairs[1][1]:.4f}; "
            "ordering held over a1 and omega0 sweeps"
        )


def test_c07_time_domain_closed_loop():
    with criterion("criterion 7 (closed-loop tracking and rejection)", 30.0) as info:
        design = ifo_design(BENCH, 1200.0, 1.2e6, 4000.0, 8000.0)
        dist = DisturbanceProfile("step", 0.3, 100.0)
        sim = closed_loop_simulate(BENCH, design, 1.0, dist, 1 / 8000, 0.6)
        assert sim.stable
        pre = sim.t < 0.3
        post = sim.t >= 0.4
        err_pre = abs(sim.y[pre][-1] - 1.0)
        err_post = float(np.max(np.abs(sim.y[post] - 1.0)))
        assert err_pre < 0.01
        assert err_post < 0.01
        e1 = np.abs(sim.z[:, 0] - sim.y)
        assert e1[pre][-1] < 1e-3
        assert e1[-1] < 1e-3
        info["detail"] = (
            f"pre err {100 * err_pre:.3f}%, post err {100 * err_post:.3f}%, "
            f"|e1| {e1[-1]:.1e}"
        )


def test_c08_robustness_ordering():
    with criterion("criterion 8 (gain-variation robustness)", 60.0) as info:
        def fluct(plant, design, gains, dt, T=0.6):
            peaks = {}
            for K in gains:
                d = LoopDesign(eso=design.eso, kp=K * design.kp, kd=design.kd,
                               label=design.label)
                sim = closed_loop_simulate(
                    plant, d, 1.0, DisturbanceProfile("none"), dt, T
                )
                assert sim.stable
                peaks[K] = step_metrics(sim, 1.0).peak_value
            return overshoot_fluctuation(peaks, 1.0)

        # fractional vs integer-order baseline at 8 kHz
        d_ifo = ifo_design(BENCH, 1200.0, 1.2e6, 4000.0, 8000.0)
        cfg_io = EsoConfig(variant="io", m=2, omega0=1200.0, b0=5.0, fs=8000.0)
        d_io = LoopDesign(eso=cfg_io, kp=4466.16, kd=(4466.16 * 0.02562,),
                          label="io")
        f_ifo = fluct(BENCH, d_ifo, (0.5, 1.0, 1.5), 1 / 8000)
        f_io = fluct(BENCH, d_io, (0.5, 1.0, 1.5), 1 / 8000)
        assert f_ifo < f_io

        # fractional vs the four-state fractional baseline at 40 kHz
        d_if2 = ifo_design(BENCH, 500.0, 9.6e4, 400.0, 40000.0,
                           band=(1.0, 20000.0))
        o = bench_orders(1.2)
        cfg_fo = EsoConfig(variant="fo", m=2, omega0=500.0, b0=5.0, fs=40000.0,
                           orders=o, filter_band=(1.0, 20000.0))
        d_fo = LoopDesign(eso=cfg_fo, kp=2.9328e5, kd=(1222.0,), label="fo")
        f_if2 = fluct(BENCH, d_if2, (0.8, 1.0, 1.2), 1 / 40000)
        f_fo = fluct(BENCH, d_fo, (0.8, 1.0, 1.2), 1 / 40000)
        assert f_if2 <= f_fo + 1.0
        info["detail"] = (
            f"vs integer-order: {f_ifo:.2f}% < {f_io:.2f}%; "
            f"vs fractional baseline: {f_if2:.2f}% <= {f_fo:.2f}% + 1"
        )


def test_c09_sector_vs_simulation_cross_validation():
    with criterion("criterion 9 (sector test vs simulation)", 60.0) as info:
        rng = np.random.default_rng(20240811)
        agree = 0
        for _ in range(10):
            w0 = 1200.0 * 10 ** rng.uniform(-0.15, 0.15)
            kd = 4000.0 * 10 ** rng.uniform(-0.2, 0.2)
            kp = 1.2e6 * 10 ** rng.uniform(-0.2, 0.2)
            design = ifo_design(BENCH, w0, kp, kd, 8000.0)
            rep_lcm = sector_check(char_poly_closed(BENCH, design, "lcm"))
            rep_paper = sector_check(char_poly_closed(BENCH, design, "paper"))
            assert rep_lcm.verdict == rep_paper.verdict
            sim = closed_loop_simulate(
                BENCH, design, 1.0, DisturbanceProfile("none"),
                1 / 8000, 0.25, bank="gl",
            )
            if (rep_lcm.verdict == "stable") == sim.stable:
                agree += 1
        assert agree == 10
        info["detail"] = "10/10 verdicts agree; both base-order conventions agree"


def test_c10_constructive_bandwidth_search():
    with criterion("criterion 10 (constructive bandwidth bound)", 10.0) as info:
        def all_hurwitz(kp, kd1, w):
            polys = kharitonov_boundaries(
                "closed2", dict(a0=10.0, a1=10.0, kp=kp, kd1=kd1, omega0=w)
            )
            return all(routh_table(c).hurwitz for c in polys)

        w0 = None
        for kp in (1.0, 100.0, 1e4):
            w0 = find_omega0(BENCH, kp=kp, kd1=9.0)
            assert w0 is not None and np.isfinite(w0)
            assert all_hurwitz(kp, 9.0, w0)
            assert all_hurwitz(kp, 9.0, 2 * w0)

        matches = 0
        for wg in (20.0, 60.0, 180.0, 540.0):
            for kp in (0.5, 1.0, 1e2, 1e4, 1e6):
                A = kharitonov_boundaries(
                    "closed2", dict(a0=10.0, a1=10.0, kp=kp, kd1=9.0, omega0=wg)
                )[0]
                printed = bool(
                    np.all(A > 0)
                    and A[1] * A[2] * A[3] > A[0] * A[3] ** 2 + A[1] ** 2 * A[4]
                )
                if routh_table(A).hurwitz == printed:
                    matches += 1
        assert matches == 20
        info["detail"] = f"omega0 = {w0:.1f}; quartic test matched 20/20 grid points"


def test_c11_motor_scenario():
    with criterion("criterion 11 (motor speed-loop scenario)", 30.0) as info:
        design = ifo_design(MOTOR, 700.0, 9000.0, 300.0, 1000.0,
                            band=(0.5, 900.0), order=5)
        dist = DisturbanceProfile("step", 0.75, -200.0)
        sim = closed_loop_simulate(MOTOR, design, 1.0, dist, 1e-3, 1.5)
        assert sim.stable
        tail = sim.t >= 1.25
        err_tail = float(np.max(np.abs(sim.y[tail] - 1.0)))
        assert err_tail < 0.01
        rep = sector_check(char_poly_closed(MOTOR, design))
        assert rep.verdict == "stable"
        info["detail"] = (
            f"post-load error {100 * err_tail:.3f}%, sector margin "
            f"{rep.min_arg_margin:.3f} rad"
        )
