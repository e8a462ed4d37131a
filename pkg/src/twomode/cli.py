"""Command-line interface.

Subcommands:

    simulate       run an ensemble from a config file, write CSV series,
                   histogram matrices and a run.json manifest
    phase-diagram  scan the mean-field phase diagram onto delimited text
    free-energy    export one free-energy landscape and its minima table
    compare        run the adiabatic and explicit-field models side by side

Exit codes: 0 success, 2 configuration error, 3 runtime failure,
4 partial ensemble (some trajectories failed).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, meanfield, model, observables
from .ensemble import EnsembleError, EnsembleResult, run_ensemble
from .runconfig import ConfigError, RunConfig, emit_config, parse_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_PARTIAL = 4

SERIES_COLUMNS = (
    "t_kappa", "mean_abs_theta1", "mean_abs_theta2", "dtheta1", "dtheta2",
    "ekin_over_ekin0", "kurtosis", "p_theta2_neg", "nematic_fraction",
)


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _write_series_csv(path: Path, result: EnsembleResult):
    params = result.spec.params
    s = result.series
    t_kappa = s.times * params.kappa
    ekin_norm = s.ekin / params.ekin0
    cols = (t_kappa, s.mean_abs_theta1, s.mean_abs_theta2, s.dtheta1, s.dtheta2,
            ekin_norm, s.kurtosis, s.p_theta2_neg, s.nematic_fraction)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_hist_csv(path: Path, hist: observables.HistogramSeries, kappa: float):
    centers = hist.bin_centers
    with open(path, "w", newline="") as fh:
        fh.write("t_kappa," + ",".join(_fmt(c) for c in centers) + "\n")
        for t, row in zip(hist.times * kappa, hist.density):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


def _versions() -> dict:
    import numba
    return {"twomode": __version__, "numpy": np.__version__, "numba": numba.__version__}


def _run_manifest(config: RunConfig, result: EnsembleResult, wall: float) -> dict:
    spec = result.spec
    finals_t1 = np.array([s.theta1 for s in result.summaries if not s.failed])
    return {
        "config": emit_config(config),
        "model": spec.model,
        "base_seed": spec.base_seed,
        "trajectories": spec.n_traj,
        "failed_trajectories": result.n_failed,
        "failures": result.failures,
        "dt_resolved": result.dt,
        "kappa": spec.params.kappa,
        "time_unit_note": "series/histogram times are kappa*t; internal unit is 1/omega_r",
        "terminal_nematic_fraction": {
            str(th): observables.nematic_fraction(finals_t1, th)
            for th in (0.3, 0.5, 0.7)
        },
        "versions": _versions(),
        "wall_time_s": wall,
    }


def _cmd_simulate(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    spec = config.spec
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    out_dir = Path(args.out) if args.out else Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        result = run_ensemble(spec, workers=args.workers,
                              theta_c=config.theta_c, bin_width=config.bin_width)
    except (EnsembleError, ValueError) as err:
        print(f"runtime failure: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    wall = time.perf_counter() - start
    _write_series_csv(out_dir / "series.csv", result)
    kappa = spec.params.kappa
    _write_hist_csv(out_dir / "hist_theta1.csv", result.hist_theta1, kappa)
    _write_hist_csv(out_dir / "hist_theta2.csv", result.hist_theta2, kappa)
    manifest = _run_manifest(replace(config, spec=spec), result, wall)
    with open(out_dir / "run.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out_dir}/series.csv ({result.series.times.size} rows, "
          f"{spec.n_traj - result.n_failed}/{spec.n_traj} trajectories, "
          f"{wall:.1f}s)")
    return EXIT_PARTIAL if result.n_failed else EXIT_OK


def _cmd_phase_diagram(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    diagram = meanfield.phase_diagram(args.amax, args.res,
                                      classify_boundaries=not args.no_boundaries)
    header = "alpha1\\alpha2," + ",".join(_fmt(a) for a in diagram.alpha2_axis)

    def _dump(name, matrix, fmt=_fmt):
        with open(out_dir / name, "w", newline="") as fh:
            fh.write(header + "\n")
            for a1, row in zip(diagram.alpha1_axis, matrix):
                fh.write(_fmt(a1) + "," + ",".join(fmt(v) for v in row) + "\n")

    _dump("phase_labels.csv", diagram.labels, fmt=lambda v: str(int(v)))
    _dump("theta1.csv", diagram.theta1)
    _dump("theta2.csv", diagram.theta2)
    _dump("para_metastable.csv", diagram.para_metastable, fmt=lambda v: str(int(v)))
    _dump("nematic_metastable.csv", diagram.nematic_metastable, fmt=lambda v: str(int(v)))
    with open(out_dir / "boundaries.csv", "w", newline="") as fh:
        fh.write("i1,j1,i2,j2,order\n")
        for (i1, j1), (i2, j2), order in diagram.boundaries:
            fh.write(f"{i1},{j1},{i2},{j2},{order}\n")
    with open(out_dir / "legend.txt", "w") as fh:
        for idx, name in enumerate(meanfield.PHASE_LABELS):
            fh.write(f"{idx} = {name}\n")
    print(f"wrote phase diagram ({args.res}x{args.res}, "
          f"{len(diagram.boundaries)} boundary segments) to {out_dir}")
    return EXIT_OK


def _cmd_free_energy(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    surf = meanfield.landscape(args.alpha1, args.alpha2, args.grid)
    with open(out_dir / "landscape.csv", "w", newline="") as fh:
        fh.write("theta1\\theta2," + ",".join(_fmt(t) for t in surf.theta2_axis) + "\n")
        for t1, row in zip(surf.theta1_axis, surf.values):
            fh.write(_fmt(t1) + "," + ",".join(_fmt(v) for v in row) + "\n")
    minima = meanfield.find_minima(args.alpha1, args.alpha2)
    with open(out_dir / "minima.csv", "w", newline="") as fh:
        fh.write("theta1,theta2,free_energy,phase,is_global\n")
        for m in minima.minima:
            fh.write(f"{_fmt(m.theta1)},{_fmt(m.theta2)},{_fmt(m.value)},"
                     f"{m.phase},{int(m.is_global)}\n")
    print(f"minima at alpha = ({args.alpha1}, {args.alpha2}):")
    for m in minima.minima:
        tag = "global" if m.is_global else "local"
        print(f"  ({m.theta1:+.4f}, {m.theta2:+.4f})  beta*f = {m.value:.6f}  "
              f"{m.phase} ({tag})")
    return EXIT_OK


def _cmd_compare(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    spec = config.spec
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    out_dir = Path(args.out) if args.out else Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = {}
    n_failed = 0
    start = time.perf_counter()
    try:
        for name in ("adiabatic", "field"):
            res = run_ensemble(replace(spec, model=name), workers=args.workers,
                               theta_c=config.theta_c, bin_width=config.bin_width)
            _write_series_csv(out_dir / f"series_{name}.csv", res)
            results[name] = res
            n_failed += res.n_failed
    except (EnsembleError, ValueError) as err:
        print(f"runtime failure: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    wall = time.perf_counter() - start

    params = spec.params
    a1, a2 = spec.protocol.alpha_final
    window = results["adiabatic"].times >= 0.5 * results["adiabatic"].times[-1]
    ratios = {}
    for name, res in results.items():
        ratios[name] = float(np.mean(res.series.ekin[window]) / params.ekin0)
    th1, th2 = meanfield.steady_observables(a1, a2)
    params_final = params.with_alpha((a1, a2))
    predicted = model.corrected_temperature(params_final, th1, th2) / params.t_min
    summary = {
        "alpha_final": [a1, a2],
        "ekin_over_ekin0_late": ratios,
        "ekin_field_over_adiabatic": ratios["field"] / ratios["adiabatic"],
        "predicted_corrected_t_over_t0": predicted,
        "meanfield_theta": [th1, th2],
        "late_mean_abs_theta1": {
            name: float(np.mean(res.series.mean_abs_theta1[window]))
            for name, res in results.items()
        },
        "late_mean_abs_theta2": {
            name: float(np.mean(res.series.mean_abs_theta2[window]))
            for name, res in results.items()
        },
        "failed_trajectories": n_failed,
        "versions": _versions(),
        "wall_time_s": wall,
    }
    with open(out_dir / "compare.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"kinetic energy ratio field/adiabatic = "
          f"{summary['ekin_field_over_adiabatic']:.3f} "
          f"(corrected-temperature prediction {predicted:.3f})")
    return EXIT_PARTIAL if n_failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twomode",
        description="Semi-classical self-organization dynamics in a two-mode cavity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an ensemble from a config file")
    sim.add_argument("config")
    sim.add_argument("--seed", type=int, default=None, help="override base seed")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--out", default=None, help="output directory")
    sim.set_defaults(func=_cmd_simulate)

    pd = sub.add_parser("phase-diagram", help="scan the mean-field phase diagram")
    pd.add_argument("--amax", type=float, default=4.0)
    pd.add_argument("--res", type=int, default=81)
    pd.add_argument("--out", default="phase-diagram")
    pd.add_argument("--no-boundaries", action="store_true",
                    help="skip transition-order classification")
    pd.set_defaults(func=_cmd_phase_diagram)

    fe = sub.add_parser("free-energy", help="export a free-energy landscape")
    fe.add_argument("--alpha1", type=float, required=True)
    fe.add_argument("--alpha2", type=float, required=True)
    fe.add_argument("--grid", type=int, default=101)
    fe.add_argument("--out", default="free-energy")
    fe.set_defaults(func=_cmd_free_energy)

    cmp_ = sub.add_parser("compare", help="adiabatic vs explicit-field run")
    cmp_.add_argument("config")
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--workers", type=int, default=None)
    cmp_.add_argument("--out", default=None)
    cmp_.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
