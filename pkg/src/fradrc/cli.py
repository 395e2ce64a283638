"""Scenario runner: design, simulate, freq, stability, sweep, compare.

Scenarios are INI files (see ``fradrc/scenarios/``) bundling a plant, one
or more observer/controller designs, simulation settings, and an optional
gain-sweep list.  Commands write CSV (the machine-readable contract) plus
matplotlib figures next to them.

Exit codes: 0 ok, 1 usage, 2 validation, 3 unstable/indeterminate,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import adrc, stability
from .adrc import (
    EsoConfig,
    LoopDesign,
    PdConfig,
    TrackingConfig,
    closed_loop_simulate,
    derive_orders,
    eso_transfer,
    open_loop_tf,
)
from .analysis import (
    FreqGrid,
    MarginNotFoundError,
    bode_data,
    margins,
    mse_delta,
    overshoot_fluctuation,
    step_metrics,
)
from .discretize import FitError
from .fracnum import FracPoly, commensurate
from .plant import DisturbanceProfile, PlantModel

__all__ = ["main", "load_scenario", "Scenario", "ConfigError"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_UNSTABLE = 3
EXIT_NUMERICAL = 4

_FMT = "%.12g"


class ConfigError(ValueError):
    """Scenario file failed validation; message carries section/key."""


class _UsageError(Exception):
    pass


@dataclass
class DesignEntry:
    label: str
    design: LoopDesign
    tracked: bool


@dataclass
class Scenario:
    name: str
    plant: PlantModel
    dt: float
    duration: float
    reference: float
    disturbance: DisturbanceProfile
    designs: list[DesignEntry] = field(default_factory=list)
    sweep_gains: tuple[float, ...] = ()


def _get(cp, section, key, conv, default=None, required=False):
    if not cp.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] missing required key '{key}'")
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())


def resolve_config(name_or_path: str) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    p = Path(name_or_path)
    if p.exists():
        return p
    name = name_or_path if name_or_path.endswith(".ini") else name_or_path + ".ini"
    pkg = resources.files("fradrc") / "scenarios" / name
    if pkg.is_file():
        return Path(str(pkg))
    raise ConfigError(
        f"config not found: {name_or_path!r} (not a file or bundled scenario)"
    )


def load_scenario(path) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section("plant"):
        raise ConfigError("missing [plant] section")
    a = _get(cp, "plant", "a", _floats, required=True)
    b = _get(cp, "plant", "b", float, required=True)
    try:
        plant = PlantModel(a=a, b=b)
    except ValueError as exc:
        raise ConfigError(f"[plant]: {exc}") from exc

    name = _get(cp, "scenario", "name", str, default=Path(path).stem) if cp.has_section("scenario") else Path(path).stem

    if not cp.has_section("sim"):
        raise ConfigError("missing [sim] section")
    dt = _get(cp, "sim", "dt", float, required=True)
    duration = _get(cp, "sim", "duration", float, required=True)
    if dt <= 0 or duration <= 0:
        raise ConfigError("[sim] dt and duration must be positive")
    if duration < dt:
        raise ConfigError("[sim] duration shorter than one sample")
    reference = _get(cp, "sim", "reference", float, default=1.0)
    kind = _get(cp, "sim", "disturbance_kind", str, default="none")
    if kind == "none":
        dist = DisturbanceProfile("none")
    elif kind == "step":
        dist = DisturbanceProfile(
            "step",
            _get(cp, "sim", "disturbance_time", float, required=True),
            _get(cp, "sim", "disturbance_amplitude", float, required=True),
        )
    else:
        raise ConfigError(f"[sim] disturbance_kind = {kind!r}: must be none or step")

    designs = []
    for section in cp.sections():
        if not section.startswith("design."):
            continue
        label = section.split(".", 1)[1]
        designs.append(_load_design(cp, section, label, plant, dt))
    if not designs:
        raise ConfigError("no [design.*] sections found")

    sweep = _get(cp, "sweep", "gains", _floats, default=()) if cp.has_section("sweep") else ()
    return Scenario(
        name=name,
        plant=plant,
        dt=dt,
        duration=duration,
        reference=reference,
        disturbance=dist,
        designs=designs,
        sweep_gains=sweep,
    )


def _load_design(cp, section, label, plant, dt) -> DesignEntry:
    variant = _get(cp, section, "variant", str, required=True)
    if variant not in ("io", "fo", "ifo"):
        raise ConfigError(f"[{section}] variant must be io, fo, or ifo")
    omega0 = _get(cp, section, "omega0", float, required=True)
    b0 = _get(cp, section, "b0", float, default=plant.b)
    fs = 1.0 / dt
    orders = None
    if variant in ("ifo", "fo"):
        chi = _get(cp, section, "chi", float, required=True)
        nu = _get(cp, section, "nu", float, default=chi)
        try:
            orders = derive_orders(plant.m, chi, nu)
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
        gamma = _get(cp, section, "gamma", float, default=None)
        if gamma is not None and abs(float(orders.gamma) - gamma) > 1e-12:
            raise ConfigError(
                f"[{section}] gamma = {gamma} inconsistent with (m - chi)/(n - 1) "
                f"= {float(orders.gamma)}"
            )
    band = None
    lo = _get(cp, section, "filter_band_lo", float, default=None)
    hi = _get(cp, section, "filter_band_hi", float, default=None)
    if (lo is None) != (hi is None):
        raise ConfigError(f"[{section}] filter_band_lo/hi must be given together")
    if lo is not None:
        band = (lo, hi)
    try:
        cfg = EsoConfig(
            variant=variant,
            m=plant.m,
            omega0=omega0,
            b0=b0,
            fs=fs,
            orders=orders,
            filter_order=_get(cp, section, "filter_order", int, default=6),
            filter_band=band,
            memory_len=_get(cp, section, "memory_len", int, default=2048),
        )
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc

    if variant == "io":
        kip = _get(cp, section, "kip", float, default=None)
        kid = _get(cp, section, "kid", float, default=None)
        if kip is None or kid is None:
            return DesignEntry(label, LoopDesign(eso=cfg, kp=1.0, kd=(), label=label), False)
        try:
            design = LoopDesign.from_pd(cfg, PdConfig(kip, kid), label)
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
        return DesignEntry(label, design, True)

    kp = _get(cp, section, "kp", float, default=None)
    if kp is None:
        return DesignEntry(label, LoopDesign(eso=cfg, kp=1.0, kd=(), label=label), False)
    if kp <= 0:
        raise ConfigError(f"[{section}] kp must be positive")
    kd = _get(cp, section, "kd", _floats, required=True)
    if any(k <= 0 for k in kd):
        raise ConfigError(f"[{section}] kd entries must be positive")
    want = 1 if variant == "fo" else cfg.orders.n - 1
    if len(kd) != want:
        raise ConfigError(f"[{section}] expected {want} kd gain(s), got {len(kd)}")
    return DesignEntry(label, LoopDesign(eso=cfg, kp=kp, kd=kd, label=label), True)


# -- emission helpers ---------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    tmp.replace(path)


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0])
    lines = [",".join(header)]
    for i in range(rows):
        lines.append(",".join(_FMT % c[i] for c in columns))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_kv(path: Path, items: dict) -> None:
    lines = []
    for k, v in items.items():
        if isinstance(v, float):
            lines.append(f"{k} = {_FMT % v}")
        else:
            lines.append(f"{k} = {v}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _wbitf_params(entry: DesignEntry) -> dict:
    d = entry.design
    cfg = d.eso
    if cfg.variant == "io" or not entry.tracked:
        return {}
    if cfg.variant == "ifo":
        o = cfg.orders
        trk = TrackingConfig.from_gains(d.kp, d.kd, o.chi)
        kappa = o.n - 1
        gamma = float(o.gamma)
        omega_c = trk.omega_c
    else:
        kappa = 1
        gamma = 1.0
        omega_c = d.kd[0]
    chi = float(cfg.orders.chi)
    return {
        "wbitf_gain": d.kp / omega_c**kappa,
        "wbitf_chi": chi,
        "wbitf_gamma": gamma,
        "wbitf_kappa": kappa,
        "wbitf_corner_coefficient": omega_c,
        "wbitf_corner_unity_mag": omega_c ** (1.0 / gamma),
        "target_crossover": (d.kp / omega_c**kappa) ** (1.0 / chi),
    }


def _verdict(plant, entry: DesignEntry, convention: str):
    """Sector report: closed loop when tracked, observer error system else."""
    if entry.tracked:
        cp = stability.char_poly_closed(plant, entry.design, convention=convention)
    else:
        lam_poly = _observer_char(entry.design.eso)
        dens = {t[1].denominator for t in lam_poly.terms}
        lam = Fraction(1, math.lcm(*dens))
        cp = stability.CommensuratePoly(commensurate(lam_poly, lam), lam)
    return stability.sector_check(cp)


def _observer_char(cfg: EsoConfig):
    """Observer-error characteristic polynomial for any variant's chain."""
    q = cfg.q_vector()
    total = sum(q, Fraction(0))
    terms = [(1.0, total)]
    run = total
    for i in range(len(q)):
        run = run - q[i]
        terms.append((float(cfg.L[i]), run))
    return FracPoly.from_terms(terms)


# -- commands -----------------------------------------------------------------

def cmd_design(scn: Scenario, out: Path | None, args) -> int:
    worst = EXIT_OK
    for entry in scn.designs:
        d = entry.design
        cfg = d.eso
        print(f"design {entry.label}: variant={cfg.variant} states={cfg.state_count}")
        print(f"  orders q = [{', '.join(str(q) for q in cfg.q_vector())}]")
        print(f"  observer gains L = [{', '.join(_FMT % g for g in cfg.L)}]")
        if entry.tracked:
            print(f"  kp = {_FMT % d.kp}  kd = [{', '.join(_FMT % k for k in d.kd)}]")
            for k, v in _wbitf_params(entry).items():
                print(f"  {k} = {_FMT % v}")
        rep = _verdict(scn.plant, entry, args.lambda_convention)
        print(
            f"  sector verdict: {rep.verdict} (lambda={rep.lam}, "
            f"margin={rep.min_arg_margin:.3e} rad"
            + (", ill-conditioned" if rep.condition_warning else "")
            + ")"
        )
        if entry.tracked and cfg.variant in ("ifo", "fo"):
            try:
                mg = margins(open_loop_tf(scn.plant, d)["exact"])
                print(
                    f"  open loop: crossover {_FMT % mg.omega_gc} rad/s, "
                    f"phase margin {mg.phase_margin_deg:.2f} deg"
                )
            except MarginNotFoundError:
                print("  open loop: no unity-gain crossing in search interval")
        if out is not None:
            obs = adrc.build_observer(cfg, bank="gl" if args.oracle_filters else "iir")
            for i, f in enumerate(obs.filters):
                if f is not None:
                    f.write_csv(out / f"{scn.name}_{entry.label}_filter_state{i + 1}.csv")
        if rep.verdict != "stable":
            worst = EXIT_UNSTABLE
    return worst


def _run_sim(scn: Scenario, entry: DesignEntry, args, kp_scale=1.0, dist=None):
    d = entry.design
    if kp_scale != 1.0:
        d = LoopDesign(eso=d.eso, kp=kp_scale * d.kp, kd=d.kd, label=d.label)
    return closed_loop_simulate(
        scn.plant,
        d,
        scn.reference,
        scn.disturbance if dist is None else dist,
        scn.dt,
        scn.duration,
        bank="gl" if args.oracle_filters else "iir",
    )


def cmd_simulate(scn: Scenario, out: Path, args) -> int:
    status = EXIT_OK
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    any_traj = False
    for entry in scn.designs:
        if not entry.tracked:
            _emit_delta(scn, entry, out)
            continue
        sim = _run_sim(scn, entry, args)
        cols = [sim.t, sim.r, sim.y, sim.u] + [sim.z[:, i] for i in range(sim.z.shape[1])]
        cols += [sim.f_hat, sim.f_true, sim.d]
        header = ["t", "r", "y", "u"] + [f"z{i + 1}" for i in range(sim.z.shape[1])]
        header += ["f_hat", "f_true", "d"]
        write_csv(out / f"{scn.name}_{entry.label}_trajectory.csv", header, cols)
        items = {"stable": sim.stable}
        if sim.stable:
            m = step_metrics(sim, scn.reference, scn.disturbance)
            items.update(m.as_dict())
        else:
            status = EXIT_UNSTABLE
            items["abort_index"] = sim.abort_index
        write_kv(out / f"{scn.name}_{entry.label}_metrics.txt", items)
        axes[0].plot(sim.t, sim.y, label=entry.label)
        axes[1].plot(sim.t, sim.u, label=entry.label)
        any_traj = True
    if any_traj:
        axes[0].plot([0.0, scn.duration], [scn.reference] * 2, "k--", lw=0.8,
                     label="reference")
        axes[0].set_ylabel("output")
        axes[1].set_ylabel("input")
        axes[1].set_xlabel("time (s)")
        for ax in axes:
            ax.legend(loc="best", fontsize=8)
            ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(out / f"{scn.name}_step.png", dpi=150)
    plt.close(fig)
    return status


def _emit_delta(scn: Scenario, entry: DesignEntry, out: Path):
    cfg = entry.design.eso
    grid = FreqGrid.make()
    P = eso_transfer(scn.plant, cfg)["P"]
    res = mse_delta(P, cfg.ideal_order, grid)
    d = res["delta"]
    write_csv(
        out / f"{scn.name}_{entry.label}_delta.csv",
        ["omega", "re", "im", "abs2"],
        [grid.omegas, d.real, d.imag, np.abs(d) ** 2],
    )
    write_kv(
        out / f"{scn.name}_{entry.label}_mse.txt",
        {"mse": res["mse"], "ideal_order": cfg.ideal_order, "excluded": res["excluded"]},
    )


def cmd_freq(scn: Scenario, out: Path, args) -> int:
    grid = FreqGrid.make()
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    dfig, dax = plt.subplots(figsize=(8, 4.5))
    any_delta = False
    any_bode = False
    for entry in scn.designs:
        cfg = entry.design.eso
        if entry.tracked and cfg.variant in ("ifo", "fo"):
            tf = open_loop_tf(scn.plant, entry.design)
            w, mag, ph = bode_data(tf["exact"], grid)
            _, mag_a, ph_a = bode_data(tf["approx"], grid)
            write_csv(
                out / f"{scn.name}_{entry.label}_openloop.csv",
                ["omega", "mag_db", "phase_deg", "approx_mag_db", "approx_phase_deg"],
                [w, mag, ph, mag_a, ph_a],
            )
            items = {}
            try:
                mg = margins(tf["exact"])
                items.update(
                    crossover_rad_s=mg.omega_gc,
                    phase_margin_deg=mg.phase_margin_deg,
                    unique_crossing=mg.unique,
                )
            except MarginNotFoundError:
                items["crossover_rad_s"] = "not-found"
            items.update({k: v for k, v in _wbitf_params(entry).items()})
            write_kv(out / f"{scn.name}_{entry.label}_margins.txt", items)
            axes[0].semilogx(w, mag, label=f"{entry.label} exact")
            axes[0].semilogx(w, mag_a, "--", label=f"{entry.label} ideal shape")
            axes[1].semilogx(w, ph, label=f"{entry.label} exact")
            axes[1].semilogx(w, ph_a, "--")
            any_bode = True
        # estimation-quality curve for every design with an observer
        P = eso_transfer(scn.plant, cfg)["P"]
        res = mse_delta(P, cfg.ideal_order, grid)
        d = res["delta"]
        write_csv(
            out / f"{scn.name}_{entry.label}_delta.csv",
            ["omega", "re", "im", "abs2"],
            [grid.omegas, d.real, d.imag, np.abs(d) ** 2],
        )
        write_kv(
            out / f"{scn.name}_{entry.label}_mse.txt",
            {"mse": res["mse"], "ideal_order": cfg.ideal_order,
             "excluded": res["excluded"]},
        )
        dax.loglog(grid.omegas, np.abs(d), label=f"{entry.label} (mse={res['mse']:.4g})")
        any_delta = True
    if any_bode:
        axes[0].set_ylabel("magnitude (dB)")
        axes[1].set_ylabel("phase (deg)")
        axes[1].set_xlabel("frequency (rad/s)")
        for ax in axes:
            ax.grid(True, which="both", alpha=0.3)
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out / f"{scn.name}_bode.png", dpi=150)
    plt.close(fig)
    if any_delta:
        dax.set_xlabel("frequency (rad/s)")
        dax.set_ylabel("|delta|")
        dax.grid(True, which="both", alpha=0.3)
        dax.legend(loc="best", fontsize=8)
        dfig.tight_layout()
        dfig.savefig(out / f"{scn.name}_delta.png", dpi=150)
    plt.close(dfig)
    return EXIT_OK


def cmd_stability(scn: Scenario, out: Path, args) -> int:
    status = EXIT_OK
    fig, ax = plt.subplots(figsize=(6, 6))
    lam_plot = None
    for entry in scn.designs:
        rep = _verdict(scn.plant, entry, args.lambda_convention)
        rows = list(rep.rows())
        write_csv(
            out / f"{scn.name}_{entry.label}_roots.csv",
            ["re", "im", "abs_arg", "margin"],
            [np.array([r[i] for r in rows]) for i in range(4)],
        )
        write_kv(
            out / f"{scn.name}_{entry.label}_stability.txt",
            {
                "verdict": rep.verdict,
                "lambda": str(rep.lam),
                "min_arg_margin_rad": rep.min_arg_margin,
                "condition_warning": rep.condition_warning,
            },
        )
        ax.plot(rep.roots.real, rep.roots.imag, "x", label=f"{entry.label}: {rep.verdict}")
        lam_plot = float(rep.lam)
        if rep.verdict != "stable":
            status = EXIT_UNSTABLE
    if lam_plot is not None:
        lim = ax.axis()
        rmax = 1.2 * max(abs(v) for v in lim)
        half = lam_plot * math.pi / 2
        for sgn in (1, -1):
            ax.plot([0, rmax * math.cos(sgn * half)], [0, rmax * math.sin(sgn * half)],
                    "r--", lw=0.8)
        ax.axis(lim)
    ax.set_xlabel("Re(w)")
    ax.set_ylabel("Im(w)")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out / f"{scn.name}_roots.png", dpi=150)
    plt.close(fig)
    return status


def cmd_sweep(scn: Scenario, out: Path, args, gains=None) -> int:
    gains = tuple(gains) if gains else scn.sweep_gains
    if len(gains) < 1:
        raise ConfigError("sweep requires gains (config [sweep] or --gains)")
    status = EXIT_OK
    nodist = DisturbanceProfile("none")
    for entry in scn.designs:
        if not entry.tracked:
            continue
        fig, ax = plt.subplots(figsize=(8, 4.5))
        rows = []
        peaks = {}
        for K in gains:
            sim = _run_sim(scn, entry, args, kp_scale=K, dist=nodist)
            if not sim.stable:
                status = EXIT_UNSTABLE
                rows.append((K, float("nan"), float("nan"), float("nan"), float("nan")))
                continue
            m = step_metrics(sim, scn.reference)
            peaks[K] = m
            rows.append((K, m.peak_value, m.overshoot, m.settling_time, m.rise_time))
            ax.plot(sim.t, sim.y, label=f"K={K:g}")
        arr = np.array(rows)
        write_csv(
            out / f"{scn.name}_{entry.label}_sweep.csv",
            ["K", "peak_value", "overshoot_pct", "settling_time_s", "rise_time_s"],
            [arr[:, i] for i in range(5)],
        )
        items = {}
        if len(peaks) >= 2:
            items["overshoot_fluctuation_pct"] = overshoot_fluctuation(peaks, scn.reference)
        elif len(peaks) == 1:
            items["overshoot_fluctuation_pct"] = 0.0
        items["gains"] = ", ".join(f"{K:g}" for K in gains)
        write_kv(out / f"{scn.name}_{entry.label}_fluctuation.txt", items)
        ax.axhline(scn.reference, color="k", ls="--", lw=0.8)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("output")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out / f"{scn.name}_{entry.label}_sweep.png", dpi=150)
        plt.close(fig)
    return status


def cmd_compare(scn: Scenario, out: Path, args) -> int:
    status = EXIT_OK
    labels, table = [], []
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for entry in scn.designs:
        if not entry.tracked:
            continue
        sim = _run_sim(scn, entry, args)
        if not sim.stable:
            status = EXIT_UNSTABLE
            continue
        m = step_metrics(sim, scn.reference, scn.disturbance)
        labels.append(entry.label)
        table.append(m)
        ax.plot(sim.t, sim.y, label=entry.label)
    if table:
        keys = list(table[0].as_dict().keys())
        with open(out / f"{scn.name}_compare.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write("design," + ",".join(keys) + "\n")
            for lbl, m in zip(labels, table):
                f.write(lbl + "," + ",".join(_FMT % v for v in m.as_dict().values()) + "\n")
        ax.axhline(scn.reference, color="k", ls="--", lw=0.8)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("output")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(out / f"{scn.name}_compare.png", dpi=150)
    plt.close(fig)
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def main(argv=None) -> int:
    parser = _Parser(prog="fradrc", description=__doc__)
    parser.add_argument(
        "command",
        choices=["design", "simulate", "freq", "stability", "sweep", "compare"],
    )
    parser.add_argument("--config", required=True, help="scenario file or bundled name")
    parser.add_argument("--out", help="output directory (required for file-emitting commands)")
    parser.add_argument(
        "--oracle-filters",
        action="store_true",
        help="run observers on the long-memory GL filter bank instead of fitted IIRs",
    )
    parser.add_argument(
        "--lambda-convention",
        choices=["lcm", "paper"],
        default="lcm",
        help="base-order convention for sector checks",
    )
    parser.add_argument("--gains", help="comma-separated K multipliers for sweep")
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    import warnings as _warnings

    try:
        with _warnings.catch_warnings(record=True) as caught:
            _warnings.simplefilter("always")
            scn = load_scenario(resolve_config(args.config))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        out = None
        if args.out is not None:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
        if args.command != "design" and out is None:
            print("usage error: --out is required for this command", file=sys.stderr)
            return EXIT_USAGE
        if args.command == "design":
            return cmd_design(scn, out, args)
        if args.command == "simulate":
            return cmd_simulate(scn, out, args)
        if args.command == "freq":
            return cmd_freq(scn, out, args)
        if args.command == "stability":
            return cmd_stability(scn, out, args)
        if args.command == "sweep":
            gains = _floats(args.gains) if args.gains else None
            return cmd_sweep(scn, out, args, gains=gains)
        return cmd_compare(scn, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FitError, MarginNotFoundError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
