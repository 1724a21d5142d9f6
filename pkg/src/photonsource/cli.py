"""
Command-line interface for photonsource.

Usage:
    photonsource square --omega 0.5 -T 6.75          # P_N, moments, Q of a square pulse
    photonsource raf --omega 3.2 --delta-rf 88 --nu-rf 0.15
    photonsource scan --omega 0.1:5:10 -T 0.5:10:20 -o scan.csv
    photonsource optimize --target p2 --omega-range 0.05:20 --t-range 0:50
    photonsource mc --omega 1 -T 3 --n-traj 100000 --seed 7
    photonsource reproduce table1 --outdir out/

All values are in units of the spontaneous emission rate Gamma unless
``--gamma-mhz`` is given, in which case frequencies are read in MHz and
times in microseconds.  Every command accepts ``--json``; the exit status is
nonzero when a check in the report is flagged.
"""

from __future__ import annotations

import math
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import closed_form as cf
from .exceptions import ConfigurationError, PhotonSourceError
from .gf import moments, photon_distribution
from .montecarlo import simulate, write_trajectories
from .optimize import maximize_global, maximize_on_resonance, maximize_over_t, maximize_raf
from .params import (
    RAF,
    EmitterParams,
    Piecewise,
    SquarePulse,
    field_from_config,
    from_dimensionless,
    read_run_config,
    to_dimensionless,
)
from .report import RunReport, write_csv
from . import reproduce as rp

__all__ = ["cli"]

SEED_ENV = "PHOTONSOURCE_SEED"
SCAN_HEADER = ["omega", "T", "p0", "p1", "p2", "mean_n", "q"]
CROSS_CHECK_LIMIT = 1e-7


def _emit(report: RunReport, as_json: bool) -> None:
    click.echo(report.to_json() if as_json else report.render())
    sys.exit(report.exit_code)


def _config_with_flags(config_path, **flags) -> dict:
    cfg = read_run_config(config_path) if config_path else {}
    for key, value in flags.items():
        if value is not None:
            cfg[key] = str(value)
    return cfg


def _echo_field(fld, params: EmitterParams):
    """Parameters of a field in Gamma units and, if known, MHz / us."""
    if isinstance(fld, SquarePulse):
        gam = {"omega": fld.omega, "T": fld.duration_T}
        kinds = {"omega": "frequency", "T": "time"}
    elif isinstance(fld, RAF):
        gam = {"omega": fld.omega, "delta_rf": fld.delta_rf, "nu_rf": fld.nu_rf,
               "phase": fld.phase, "window": fld.window, "extended": fld.extended}
        kinds = {"omega": "frequency", "delta_rf": "frequency", "nu_rf": "frequency",
                 "window": "time"}
    else:
        gam = {"samples": len(fld.samples), "t_end": fld.support_end}
        kinds = {"t_end": "time"}
    mhz = None
    if params.gamma_mhz:
        mhz = {"gamma_mhz": params.gamma_mhz}
        for k, v in gam.items():
            mhz[k] = from_dimensionless(params, v, kinds[k]) if k in kinds else v
    return gam, mhz


def _parse_range(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(":")]
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) != 2 or parts[0] > parts[1]:
        raise click.BadParameter(f"expected 'lo:hi', got {text!r}")
    return parts[0], parts[1]


def _parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` (linear), ``lo:hi:n:log`` or a comma-separated list."""
    if ":" not in text:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise click.BadParameter(f"grid spec must be lo:hi:n[:log], got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if len(parts) == 4:
        if parts[3] != "log":
            raise click.BadParameter(f"unknown grid spacing {parts[3]!r}")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _convert(params: EmitterParams, value, kind):
    return to_dimensionless(params, value, kind) if params.gamma_mhz else value


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Photon statistics and control of a two-level single-photon source."""


def common(fn):
    fn = click.option("--json", "as_json", is_flag=True, help="Emit the JSON report.")(fn)
    fn = click.option("--gamma-mhz", type=float, default=None,
                      help="Emission rate in MHz; inputs are then MHz and microseconds.")(fn)
    return fn


@cli.command()
@click.option("--omega", type=float, help="Rabi frequency.")
@click.option("-T", "--T", "big_t", type=float, help="Pulse length.")
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), help="key = value run file.")
@common
def square(omega, big_t, n_max, tol, config_path, gamma_mhz, as_json):
    """Photon-number distribution, moments and Q of a square pulse."""
    started = time.perf_counter()
    cfg = _config_with_flags(config_path, field="square" if not config_path else None,
                             omega=omega, t=big_t, gamma_mhz=gamma_mhz)
    try:
        fld, params = field_from_config(cfg)
    except ConfigurationError as exc:
        raise click.UsageError(str(exc))
    if not isinstance(fld, SquarePulse):
        raise click.UsageError("config does not describe a square pulse")
    dist = photon_distribution(fld, n_max=n_max, tol=tol)
    mom = moments(fld, tol=tol)
    rows, flags = [], []
    for n in range(n_max + 1):
        row = {"n": n, "P_hierarchy": dist[n]}
        if n <= 2:
            closed = cf.cf_pn(fld.omega, fld.duration_T, n)
            row["P_closed_form"] = closed
            row["abs_diff"] = abs(closed - dist[n])
            if row["abs_diff"] > CROSS_CHECK_LIMIT:
                flags.append(f"P{n}: closed form and hierarchy differ by {row['abs_diff']:.3g}")
        rows.append(row)
    mean_cf = cf.cf_mean_n(fld.omega, fld.duration_T)
    fac2_cf = cf.cf_fac2(fld.omega, fld.duration_T)
    q_cf = cf.cf_q(fld.omega, fld.duration_T)
    summary = {
        "mean_n": mean_cf,
        "fac2": fac2_cf,
        "Q": q_cf,
        "mean_n_hierarchy": mom.mean_n,
        "fac2_hierarchy": mom.fac2,
        "Q_hierarchy": mom.q,
        "tail_bound": dist.tail_bound,
    }
    for name, a, b in (("<N>", mean_cf, mom.mean_n), ("<N(N-1)>", fac2_cf, mom.fac2)):
        if abs(a - b) > CROSS_CHECK_LIMIT:
            flags.append(f"{name}: closed form and moment system differ by {abs(a - b):.3g}")
    notes = ["closed form for n <= 2, hierarchy for all n"]
    if dist.truncated:
        notes.append(f"n_max={n_max} leaves tail probability {dist.tail_bound:.3g}")
    gam, mhz = _echo_field(fld, params)
    report = RunReport(
        command="square", notes=notes, parameters={**gam, "n_max": n_max}, parameters_mhz=mhz,
        results=rows, summary=summary, tolerances={"tol": tol, "cross_check": CROSS_CHECK_LIMIT},
        flags=flags, wall_time=time.perf_counter() - started,
    )
    _emit(report, as_json)


@cli.command()
@click.option("--omega", type=float)
@click.option("--delta-rf", type=float, help="Peak-to-peak detuning sweep.")
@click.option("--nu-rf", type=float, help="Angular modulation frequency.")
@click.option("--phase", type=float, default=None, help="Sweep phase at t = 0 (rad).")
@click.option("--window", type=float, default=None, help="Counting window (default half a period).")
@click.option("--extended", is_flag=True, default=None, help="Also count the free decay after the window.")
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@common
def raf(omega, delta_rf, nu_rf, phase, window, extended, n_max, tol, config_path, gamma_mhz, as_json):
    """Photon statistics of one rapid-adiabatic-following window."""
    started = time.perf_counter()
    cfg = _config_with_flags(config_path, field="raf" if not config_path else None, omega=omega,
                             delta_rf=delta_rf, nu_rf=nu_rf, phase=phase, window=window,
                             extended=extended, gamma_mhz=gamma_mhz)
    try:
        fld, params = field_from_config(cfg)
    except ConfigurationError as exc:
        raise click.UsageError(str(exc))
    if not isinstance(fld, RAF):
        raise click.UsageError("config does not describe an RAF field")
    dist = photon_distribution(fld, n_max=n_max, tol=tol,
                               horizon="auto" if fld.extended else fld.window)
    rows = [{"n": n, "P": dist[n]} for n in range(n_max + 1)]
    notes = [f"detuning (delta_rf/2) cos(nu_rf t + phase); counting window [0, {fld.window:.6g}]"
             + (" plus free decay" if fld.extended else "")]
    if dist.truncated:
        notes.append(f"n_max={n_max} leaves tail probability {dist.tail_bound:.3g}")
    gam, mhz = _echo_field(fld, params)
    report = RunReport(
        command="raf", parameters={**gam, "n_max": n_max}, parameters_mhz=mhz, results=rows,
        summary={"mean_n": dist.mean_n(), "tail_bound": dist.tail_bound},
        tolerances={"tol": tol}, wall_time=time.perf_counter() - started, notes=notes,
    )
    _emit(report, as_json)


@cli.command()
@click.option("--omega", "omega_spec", required=True, help="Grid: lo:hi:n[:log] or a,b,c.")
@click.option("-T", "--T", "t_spec", required=True, help="Grid: lo:hi:n[:log] or a,b,c.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
@click.option("--objective", type=click.Choice(["p1", "p2"]), default="p1", show_default=True,
              help="Column used to report the best grid point.")
@common
def scan(omega_spec, t_spec, output, objective, gamma_mhz, as_json):
    """Closed-form square-pulse statistics on an (omega, T) grid, written as CSV."""
    started = time.perf_counter()
    params = EmitterParams(gamma_mhz)
    omegas = _convert(params, _parse_grid(omega_spec), "frequency")
    ts = _convert(params, _parse_grid(t_spec), "time")
    oo, tt = np.meshgrid(omegas, ts, indexing="ij")
    oo, tt = oo.ravel(), tt.ravel()
    cols = {
        "omega": oo, "T": tt,
        "p0": cf.cf_pn(oo, tt, 0), "p1": cf.cf_pn(oo, tt, 1), "p2": cf.cf_pn(oo, tt, 2),
        "mean_n": cf.cf_mean_n(oo, tt), "q": cf.cf_q(oo, tt),
    }
    rows = [{h: float(cols[h][i]) for h in SCAN_HEADER} for i in range(oo.size)]
    write_csv(output, SCAN_HEADER, rows)
    best = max(rows, key=lambda r: r[objective])
    report = RunReport(
        command="scan",
        parameters={"omega": omega_spec, "T": t_spec, "objective": objective, "output": output},
        parameters_mhz={"gamma_mhz": gamma_mhz} if gamma_mhz else None,
        results=[best], summary={"rows": len(rows)},
        wall_time=time.perf_counter() - started, notes=[f"best {objective} on the grid"],
    )
    _emit(report, as_json)


@cli.command()
@click.option("--target", type=click.Choice(["p1", "p2"]), required=True)
@click.option("--field", "field_kind", type=click.Choice(["square", "raf"]), default="square",
              show_default=True)
@click.option("--omega-range", default="0.05:20", show_default=True, help="lo:hi or a single value.")
@click.option("--t-range", default="0:50", show_default=True, help="Square pulses: lo:hi.")
@click.option("--resonant", is_flag=True,
              help="Square pulses: keep omega*T = 2 pi n near the lower omega bound.")
@click.option("--delta-rf-range", default="0:600", show_default=True, help="RAF: lo:hi.")
@click.option("--nu-rf", type=float, default=0.15, show_default=True)
@click.option("--phase", type=float, default=0.0, show_default=True)
@click.option("--window", type=float, default=None)
@common
def optimize(target, field_kind, omega_range, t_range, resonant, delta_rf_range, nu_rf, phase,
             window, gamma_mhz, as_json):
    """Maximise P1 or P2 inside the given bounds."""
    started = time.perf_counter()
    params = EmitterParams(gamma_mhz)
    o_rng = tuple(_convert(params, v, "frequency") for v in _parse_range(omega_range))
    if field_kind == "square":
        t_rng = tuple(_convert(params, v, "time") for v in _parse_range(t_range))
        if resonant:
            res = maximize_on_resonance(target, o_rng[0], t_rng)
        elif o_rng[0] == o_rng[1]:
            res = maximize_over_t(target, o_rng[0], t_rng)
        else:
            res = maximize_global(target, o_rng, t_rng)
        bounds = {"omega_range": o_rng, "t_range": t_rng}
    else:
        d_rng = tuple(_convert(params, v, "frequency") for v in _parse_range(delta_rf_range))
        nu = _convert(params, nu_rf, "frequency")
        win = _convert(params, window, "time") if window is not None else None
        res = maximize_raf(target, o_rng, d_rng, nu, phase=phase, window=win)
        bounds = {"omega_range": o_rng, "delta_rf_range": d_rng, "nu_rf": nu, "phase": phase}
    probes = [{"probe": ", ".join(f"{v:.8g}" for v in point), "value": value}
              for point, value in res.probes]
    summary = {**{f"argmax_{k}": v for k, v in res.argmax.items()}, "value": res.value,
               "iterations": res.iterations, "certified": res.certified}
    for name, (lo, hi) in res.bracket.items():
        summary[f"bracket_{name}"] = hi - lo
    report = RunReport(
        command=f"optimize {target} ({field_kind})",
        parameters={"target": target, "field": field_kind, **bounds, "resonant": resonant},
        parameters_mhz={"gamma_mhz": gamma_mhz} if gamma_mhz else None,
        results=probes, summary=summary, wall_time=time.perf_counter() - started,
        flags=[] if res.certified else ["argmax is not a certified local maximum"],
        notes=["ties are broken towards the shortest pulse"],
    )
    _emit(report, as_json)


@cli.command()
@click.option("--field", "field_kind", type=click.Choice(["square", "raf", "piecewise"]), default=None)
@click.option("--omega", type=float)
@click.option("-T", "--T", "big_t", type=float)
@click.option("--delta-rf", type=float)
@click.option("--nu-rf", type=float)
@click.option("--phase", type=float)
@click.option("--window", type=float)
@click.option("--samples", help="Piecewise samples 't,omega,delta; ...'.")
@click.option("--horizon", default="auto", show_default=True)
@click.option("--n-traj", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=None, help=f"Defaults to ${SEED_ENV} or 0.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--dump", type=click.Path(dir_okay=False), help="Write emission times per trajectory.")
@click.option("--config", "config_path", type=click.Path(exists=True))
@common
def mc(field_kind, omega, big_t, delta_rf, nu_rf, phase, window, samples, horizon, n_traj, seed,
       workers, dump, config_path, gamma_mhz, as_json):
    """Quantum-jump Monte Carlo estimate of P_N with Wilson intervals."""
    started = time.perf_counter()
    if field_kind is None and not config_path:
        field_kind = "square"
    cfg = _config_with_flags(config_path, field=field_kind, omega=omega, t=big_t,
                             delta_rf=delta_rf, nu_rf=nu_rf, phase=phase, window=window,
                             samples=samples, gamma_mhz=gamma_mhz)
    try:
        fld, params = field_from_config(cfg)
    except ConfigurationError as exc:
        raise click.UsageError(str(exc))
    seed = _default_seed() if seed is None else seed
    if horizon != "auto":
        horizon = _convert(params, float(horizon), "time")
    elif isinstance(fld, RAF) and not fld.extended:
        horizon = fld.window
    est = simulate(fld, horizon=horizon, n_traj=n_traj, seed=seed, record=bool(dump),
                   workers=workers)
    if dump:
        write_trajectories(est.records, dump)
    ref = photon_distribution(fld, n_max=max(len(est.probs) - 1, 2), horizon=horizon)
    rows, flags = [], []
    for n, (p, ci) in enumerate(zip(est.probs, est.ci_halfwidths)):
        if isinstance(fld, SquarePulse) and n <= 2 and horizon == "auto":
            reference, source = cf.cf_pn(fld.omega, fld.duration_T, n), "closed form"
        else:
            reference, source = ref[n], "hierarchy"
        z = abs(p - reference) / ci if ci > 0 else 0.0
        rows.append({"n": n, "P_mc": p, "ci95": ci, "reference": reference, "source": source,
                     "ci_units": z})
        if n <= 2 and z > 3:
            flags.append(f"P{n}: Monte Carlo estimate {z:.2f} CI half-widths from the reference")
    gam, mhz = _echo_field(fld, params)
    report = RunReport(
        command="mc", parameters={**gam, "horizon": horizon, "n_traj": n_traj}, parameters_mhz=mhz,
        results=rows, seed=seed,
        summary={"mean_n": est.mean_n, "mean_n_stderr": est.mean_stderr,
                 "mean_n_reference": ref.mean_n()},
        tolerances={"ci_confidence": 0.95, "flag_at_ci_units": 3},
        flags=flags, wall_time=time.perf_counter() - started,
    )
    _emit(report, as_json)


@cli.command()
@click.argument("target", type=click.Choice(["table1", "fig9", "fig20"]))
@click.option("--outdir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--no-plot", is_flag=True, help="Skip the PNG figure.")
@click.option("--json", "as_json", is_flag=True)
def reproduce(target, outdir, no_plot, as_json):
    """Recompute the RAF table or the P_max(omega) curves, with CSV and a figure."""
    started = time.perf_counter()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    if target == "table1":
        report = _reproduce_table1(out, no_plot)
    else:
        report = _reproduce_curve(target, out, no_plot)
    report.wall_time = time.perf_counter() - started
    _emit(report, as_json)


def _reproduce_table1(out: Path, no_plot: bool) -> RunReport:
    rows = rp.table1()
    natural = rp.table1(rp.NATURAL_PHASE, rp.NATURAL_WINDOW_PERIODS)
    results = []
    for r, nat in zip(rows, natural):
        d = r.as_dict()
        d["max_dev"] = r.max_deviation
        d["max_dev_natural"] = nat.max_deviation
        results.append(d)
    header = list(results[0].keys())
    write_csv(out / "table1.csv", header, results)
    flags = [f"row delta_rf={r.delta_rf:g}: max deviation {r.max_deviation:.3f} exceeds "
             f"{rp.TABLE1_TOLERANCE}" for r in rows if r.max_deviation > rp.TABLE1_TOLERANCE]
    notes = [
        f"calibrated window: phase={rp.TABLE1_PHASE}, length={rp.TABLE1_WINDOW_PERIODS} RF periods, "
        f"nu_rf={rp.TABLE1_NU_RF:g} (Gamma={rp.GAMMA_MHZ:g} MHz)",
        f"natural window (phase 0, half period) deviations: "
        + "; ".join(f"{nat.delta_rf:g}: " + ", ".join(f"{d:.3f}" for d in nat.deviations)
                    for nat in natural),
    ]
    if not no_plot:
        from .plotting import plot_table1
        plot_table1(rows, natural, out / "table1.png")
    return RunReport(
        command="reproduce table1",
        parameters={"phase": rp.TABLE1_PHASE, "window_periods": rp.TABLE1_WINDOW_PERIODS,
                    "nu_rf": rp.TABLE1_NU_RF},
        parameters_mhz={"gamma_mhz": rp.GAMMA_MHZ, "nu_rf": rp.TABLE1_NU_RF * rp.GAMMA_MHZ},
        results=results, summary={"max_deviation": max(r.max_deviation for r in rows)},
        tolerances={"absolute": rp.TABLE1_TOLERANCE}, flags=flags, notes=notes,
    )


def _reproduce_curve(target: str, out: Path, no_plot: bool) -> RunReport:
    bundle = rp.fig9() if target == "fig9" else rp.fig20()
    header = list(bundle.rows[0].keys())
    write_csv(out / f"{target}.csv", header, bundle.rows)
    anchors = [a.as_dict() for a in bundle.anchors]
    write_csv(out / f"{target}_anchors.csv", list(anchors[0].keys()), anchors)
    if not no_plot:
        from .plotting import plot_pmax
        plot_pmax(bundle, out / f"{target}.png")
    flags = [f"anchor '{a.label}' off: {a.value:.4g} vs {a.expected:.4g}" for a in bundle.anchors
             if not a.ok]
    return RunReport(
        command=f"reproduce {target}",
        parameters={"objective": bundle.objective, "omega_min": float(rp.FIG_OMEGAS[0]),
                    "omega_max": float(rp.FIG_OMEGAS[-1]), "omega_points": len(rp.FIG_OMEGAS),
                    "t_range": rp.FIG_T_RANGE},
        parameters_mhz={"gamma_mhz": rp.GAMMA_MHZ},
        results=anchors, summary={"curve_rows": len(bundle.rows), "csv": str(out / f"{target}.csv")},
        flags=flags, notes=["omega grid: 40 log-spaced points in [0.05, 20] Gamma"],
    )


def main():
    try:
        cli()
    except PhotonSourceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
