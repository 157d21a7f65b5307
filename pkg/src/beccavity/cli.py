"""Command-line interface: parameter sweeps and figure-style data files.

Subcommands
-----------
band-sweep       mean-field branches and the cavity-selected mode vs detuning
band-structure   excitation bands over the Brillouin zone plus the q=0 point
effective        renormalized two-mode model: cubic roots, threshold, window
trapped-ground   trapped condensate profile (CSV with a JSON header line)
trapped-sweep    trapped photon number vs detuning, up or down (hysteresis)
trapped-spectrum trapped excitation spectrum along a detuning sweep

Common flags: --config PATH, --out PATH, --format csv|json,
--delta-c-min/-max/-steps, --parallel N, --no-timestamp, --set KEY=VALUE.
Outputs are byte-reproducible with --no-timestamp; --parallel changes wall
time only, never bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .band_fluctuations import band_structure, optomech_mode
from .band_meanfield import solve_branches, sweep_branches
from .effective import (bistability_threshold, bistable_window,
                        cubic_photon_number, model_from_params, stability_labels)
from .errors import SolverError
from .numerics import NumericsError
from .params import ParameterError, SystemParams, load_config
from .sweep_table import SweepTable, write_table
from .trapped_bdg import identify_optomech_track, spectrum, spectrum_sweep_table
from .trapped_meanfield import (decompose_envelope, default_grid, ground_state,
                                measure_tf_radius, sweep_trapped, tf_radius_estimate)


def _pmap(fn, items, n_workers: int):
    """Order-preserving map, optionally threaded; output never depends on n."""
    items = list(items)
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


def _delta_grid(args) -> np.ndarray:
    return np.linspace(args.delta_c_min, args.delta_c_max, args.delta_c_steps)


def _load_params(args) -> SystemParams:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    return load_config(args.config, overrides)


def _finish(table: SweepTable, args, default_name: str) -> int:
    table.meta.setdefault("beccavity", __version__)
    out = args.out or f"{default_name}.{args.format}"
    write_table(table, out, args.format, no_timestamp=args.no_timestamp)
    print(out)
    return 0


def cmd_band_sweep(args) -> int:
    p = _load_params(args)
    grid = _delta_grid(args)
    table = sweep_branches(p, grid)

    def modes_at(dc):
        sols = solve_branches(p, float(dc))
        out = []
        for sol in sols:
            pts = optomech_mode(sol, p)
            out.append((pts[0].omega, pts[0].two_mode))
        return out

    per_point = _pmap(modes_at, grid, args.parallel)
    omegas: list[complex] = []
    flags: list[bool] = []
    for modes in per_point:
        for omega, flag in modes:
            omegas.append(omega)
            flags.append(flag)
    table.add_complex_column("optomech_omega", omegas)
    table.add_column("optomech_two_mode", flags)
    return _finish(table, args, "band_sweep")


def cmd_band_structure(args) -> int:
    p = _load_params(args)
    sols = solve_branches(p)
    sol = sols[-1] if args.branch == "upper" else (
        sols[0] if args.branch == "lower" else sols[min(1, len(sols) - 1)])
    q_grid = [q for q in np.linspace(-1.0, 1.0, args.q_steps) if abs(q) > 1e-9]

    def bands_at(q):
        return band_structure(sol, p, [q])

    results = _pmap(bands_at, q_grid, args.parallel)
    table = SweepTable(swept="q", params=p.to_dict())
    table.meta["params_hash"] = p.params_hash()
    table.meta["branch"] = sol.label
    table.meta["branch_photon_number"] = f"{sol.I:.12g}"
    cols = {"q": [], "band": [], "omega_re": [], "omega_im": [], "c_weight": []}
    for pts in results:
        pts = [pt for pt in pts if pt.q is not None]
        pts.sort(key=lambda pt: pt.omega.real)
        for band_index, pt in enumerate(pts, start=1):
            cols["q"].append(pt.q)
            cols["band"].append(str(band_index))
            cols["omega_re"].append(pt.omega.real)
            cols["omega_im"].append(pt.omega.imag)
            cols["c_weight"].append(pt.c_weight)
    for pt in optomech_mode(sol, p):
        cols["q"].append(0.0)
        cols["band"].append("q0_polariton")
        cols["omega_re"].append(pt.omega.real)
        cols["omega_im"].append(pt.omega.imag)
        cols["c_weight"].append(pt.c_weight)
    for name, values in cols.items():
        table.add_column(name, values)
    return _finish(table, args, "band_structure")


def cmd_effective(args) -> int:
    p = _load_params(args)
    model = model_from_params(p)
    table = SweepTable(swept="delta_c", params=p.to_dict())
    table.meta["params_hash"] = p.params_hash()
    table.meta["omega_M_ren"] = f"{model.omega_M_ren:.12g}"
    table.meta["G_ren"] = f"{model.G_ren:.12g}"
    table.meta["chi"] = f"{model.chi:.12g}"
    if model.G_ren > 0:
        table.meta["threshold_eta_sq"] = f"{bistability_threshold(model, p.kappa):.12g}"
        window = bistable_window(model, p)
    else:
        window = None
    table.meta["window_lo"] = "" if window is None else f"{window[0]:.12g}"
    table.meta["window_hi"] = "" if window is None else f"{window[1]:.12g}"

    cols = {"delta_c": [], "root_index": [], "I": [], "stable": []}
    if args.delta_c_steps > 0 and args.delta_c_min < args.delta_c_max:
        grid = _delta_grid(args)

        def roots_at(dc):
            return cubic_photon_number(model, p, float(dc)).values

        for dc, values in zip(grid, _pmap(roots_at, grid, args.parallel)):
            stable = stability_labels(len(values))
            for k, (value, st) in enumerate(zip(values, stable)):
                cols["delta_c"].append(float(dc))
                cols["root_index"].append(k)
                cols["I"].append(value)
                cols["stable"].append(st)
    for name, values in cols.items():
        table.add_column(name, values)
    return _finish(table, args, "effective")


def cmd_trapped_ground(args) -> int:
    p = _load_params(args)
    grid = default_grid(p, half_width=args.half_width,
                        points_per_lambda=args.points_per_lambda)
    prof = ground_state(p, grid)
    e, f, recon_err = decompose_envelope(prof)
    header = {
        "mu": prof.mu,
        "alpha_re": prof.alpha.real,
        "alpha_im": prof.alpha.imag,
        "I": prof.I,
        "cos2_overlap": prof.cos2_overlap,
        "tf_radius_analytic": (np.sqrt(prof.mu / p.V_tr) if p.gN > 0 else 0.0),
        "tf_radius_estimate": tf_radius_estimate(p),
        "tf_radius_measured": measure_tf_radius(prof) if p.gN > 0 else 0.0,
        "envelope_reconstruction_error": recon_err,
        "gpe_residual": prof.gpe_residual,
        "n_points": grid.n_points,
        "half_width": grid.half_width,
        "params_hash": prof.params_hash,
    }
    out = args.out or f"trapped_ground.{args.format}"
    if args.format == "csv":
        lines = ["# " + json.dumps(header, sort_keys=True), "x,psi"]
        for xi, pi in zip(grid.x, prof.psi):
            lines.append(f"{xi:.12g},{pi:.12g}")
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        obj = {"header": header,
               "x": [float(v) for v in grid.x],
               "psi": [float(v) for v in prof.psi]}
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(obj, indent=1) + "\n")
    print(out)
    return 0


def cmd_trapped_sweep(args) -> int:
    p = _load_params(args)
    grid = default_grid(p, half_width=args.half_width,
                        points_per_lambda=args.points_per_lambda)
    table = sweep_trapped(p, _delta_grid(args), direction=args.direction, grid=grid)
    return _finish(table, args, "trapped_sweep")


def cmd_trapped_spectrum(args) -> int:
    p = _load_params(args)
    grid = default_grid(p, half_width=args.half_width,
                        points_per_lambda=args.points_per_lambda)
    delta_grid = _delta_grid(args)
    _, profiles = sweep_trapped(p, delta_grid, direction=args.direction,
                                grid=grid, return_profiles=True)
    sorted_grid = np.sort(delta_grid)
    visited = sorted_grid if args.direction == "up" else sorted_grid[::-1]

    sectors = ("even",) if args.sectors == "even" else (
        ("odd",) if args.sectors == "odd" else ("even", "odd"))

    def solve_at(index):
        pd = p.with_delta_c(float(visited[index]))
        return spectrum(profiles[index], pd, n_report=args.n_report, sectors=sectors)

    spectra = _pmap(solve_at, range(len(profiles)), args.parallel)
    table = spectrum_sweep_table(spectra, visited)
    table.params = p.to_dict()
    table.meta["params_hash"] = p.params_hash()
    table.meta["direction"] = args.direction
    track = identify_optomech_track(spectra, visited)
    out_code = _finish(table, args, "trapped_spectrum")
    track.params = p.to_dict()
    track.meta["params_hash"] = p.params_hash()
    track.meta["beccavity"] = __version__
    track_out = (args.out or f"trapped_spectrum.{args.format}") + ".track"
    write_table(track, track_out, args.format, no_timestamp=args.no_timestamp)
    print(track_out)
    return out_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beccavity",
        description="BEC-cavity steady states, bistability and excitation spectra",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, dc_defaults):
        sp.add_argument("--config", required=True, help="parameter file")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--delta-c-min", type=float, default=dc_defaults[0])
        sp.add_argument("--delta-c-max", type=float, default=dc_defaults[1])
        sp.add_argument("--delta-c-steps", type=int, default=dc_defaults[2])
        sp.add_argument("--parallel", type=int, default=1, metavar="N")
        sp.add_argument("--no-timestamp", action="store_true")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config value (repeatable)")

    sp = sub.add_parser("band-sweep", help="mean-field branches vs detuning")
    common(sp, (-9000.0, 1000.0, 201))
    sp.set_defaults(func=cmd_band_sweep)

    sp = sub.add_parser("band-structure", help="bands over the Brillouin zone")
    common(sp, (0.0, 0.0, 0))
    sp.add_argument("--q-steps", type=int, default=201)
    sp.add_argument("--branch", choices=("lower", "middle", "upper"), default="upper")
    sp.set_defaults(func=cmd_band_structure)

    sp = sub.add_parser("effective", help="two-mode model: roots, threshold, window")
    common(sp, (0.0, 0.0, 0))
    sp.set_defaults(func=cmd_effective)

    sp = sub.add_parser("trapped-ground", help="trapped condensate profile")
    common(sp, (0.0, 0.0, 0))
    sp.add_argument("--half-width", type=float, default=None)
    sp.add_argument("--points-per-lambda", type=int, default=None)
    sp.set_defaults(func=cmd_trapped_ground)

    sp = sub.add_parser("trapped-sweep", help="trapped photon number vs detuning")
    common(sp, (-9000.0, 1000.0, 41))
    sp.add_argument("--direction", choices=("up", "down"), default="down")
    sp.add_argument("--half-width", type=float, default=None)
    sp.add_argument("--points-per-lambda", type=int, default=None)
    sp.set_defaults(func=cmd_trapped_sweep)

    sp = sub.add_parser("trapped-spectrum", help="trapped excitation spectrum sweep")
    common(sp, (-9000.0, 2000.0, 23))
    sp.add_argument("--direction", choices=("up", "down"), default="down")
    sp.add_argument("--half-width", type=float, default=None)
    sp.add_argument("--points-per-lambda", type=int, default=None)
    sp.add_argument("--n-report", type=int, default=40)
    sp.add_argument("--sectors", choices=("even", "odd", "both"), default="even")
    sp.set_defaults(func=cmd_trapped_spectrum)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, SolverError, NumericsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
