"""Command-line entry point with one shared configuration model.

Every subcommand resolves its settings the same way: hard-coded defaults,
overlaid by an optional JSON config file, overlaid by explicit flags. The
fully resolved configuration is echoed into a run manifest next to the
outputs, and feeding that echo back as the config file reproduces the
outputs byte for byte.

Exit codes: 0 success, 1 validation problem, 2 numerical failure,
3 partial sweep (some points unconverged or failed).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .amplitude import build_amplitude, export_amplitude_csv
from .discriminate import (
    export_tomography,
    probe_coincidence,
    run_tomography,
    schmidt_probes,
)
from .errors import (
    ConfigurationError,
    ContractViolation,
    NumericalError,
    ValidationError,
)
from .hom import MODE_CUT_DEFAULT, coincidence_scan, default_deltas, export_scan_csv
from .io import write_json
from .params import ChiModel, ControlParams, GridSpec, PhysicalSetup, dimensionless_time
from .schmidt import converge_spectrum, export_modes_csv, export_spectrum_csv
from .sweep import (
    SweepPlan,
    log_axis,
    point_key,
    run_heatmap,
    run_path_cut,
    write_cut_csv,
    write_heatmap_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_PARTIAL = 3

_PHYSICAL_KEYS = ("L", "lambda_p", "beta", "lambda_C", "y0", "sigma_y", "sigma_x", "d")

#: flag destination -> path into the resolved config
_FLAG_MAP = {
    "T_I": ("T_I",),
    "sigma_e": ("sigma_e",),
    "chi_kind": ("chi", "kind"),
    "chi_center": ("chi", "center"),
    "chi_width": ("chi", "width"),
    "evanescent_scale": ("chi", "evanescent_scale"),
    "n_points": ("grid", "n_points"),
    "half_window": ("grid", "half_window"),
    "q_points": ("grid", "q_points"),
    "q_half_window": ("grid", "q_half_window"),
    "method": ("schmidt", "method"),
    "tol": ("schmidt", "tol"),
    "max_points": ("schmidt", "max_points"),
    "schmidt_mode_cut": ("schmidt", "mode_cut"),
    "hom_mode_cut": ("hom", "mode_cut"),
    "delta_range": ("hom", "delta_range"),
    "modes": ("discriminate", "modes"),
    "shots": ("discriminate", "shots"),
    "seed": ("discriminate", "seed"),
    "threshold": ("discriminate", "threshold"),
    "t_axis": ("sweep", "t_axis"),
    "sigma_axis": ("sweep", "sigma_axis"),
}


def default_config() -> dict:
    """The complete resolved configuration before file and flag overlays."""
    chi = ChiModel()
    grid = GridSpec()
    return {
        "T_I": 1e-3,
        "sigma_e": 2.0,
        "chi": {
            "kind": chi.kind,
            "center": chi.center,
            "width": chi.width,
            "evanescent_scale": chi.evanescent_scale,
        },
        "grid": {
            "n_points": grid.n_points,
            "half_window": grid.half_window,
            "q_points": grid.q_points,
            "q_half_window": grid.q_half_window,
        },
        "schmidt": {
            "method": "kernel-eig",
            "tol": 0.05,
            "max_points": 3200,
            "mode_cut": 1e-6,
        },
        "hom": {"delta_range": None, "mode_cut": MODE_CUT_DEFAULT},
        "discriminate": {"modes": 3, "shots": 10000, "seed": 7, "threshold": 0.25},
        "sweep": {
            "t_axis": [1e-5, 1e-2, 7],
            "sigma_axis": [0.05, 2.0, 7],
            "path": None,
        },
    }


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto the validation exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument(
        "--dry-run",
        action="store_true",
        help="resolve and validate, print the config, write nothing",
    )
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--verbose", action="store_true", help="log refinement steps")
    common.add_argument("--T-I", dest="T_I", type=float, default=None)
    common.add_argument("--sigma-e", dest="sigma_e", type=float, default=None)
    common.add_argument("--chi-kind", default=None)
    common.add_argument("--chi-center", type=float, default=None)
    common.add_argument("--chi-width", type=float, default=None)
    common.add_argument("--evanescent-scale", type=float, default=None)
    common.add_argument("--n-points", type=int, default=None)
    common.add_argument("--half-window", type=float, default=None)
    common.add_argument("--q-points", type=int, default=None)
    common.add_argument("--q-half-window", type=float, default=None)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--method", default=None, choices=["kernel-eig", "svd-oracle"])
    solver.add_argument("--tol", type=float, default=None)
    solver.add_argument("--max-points", type=int, default=None)

    parser = _Parser(prog="etmsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"etmsim {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    subs.add_parser("amplitude", parents=[common], help="build and export the pair amplitude")

    p_schmidt = subs.add_parser(
        "schmidt", parents=[common, solver], help="mode spectrum and entanglement measures"
    )
    p_schmidt.add_argument("--mode-cut", dest="schmidt_mode_cut", type=float, default=None)

    p_hom = subs.add_parser(
        "hom", parents=[common, solver], help="two-electron coincidence scan"
    )
    p_hom.add_argument(
        "--delta-range", default=None, help="scan window as start:stop:count"
    )
    p_hom.add_argument("--mode-cut", dest="hom_mode_cut", type=float, default=None)

    p_disc = subs.add_parser(
        "discriminate", parents=[common, solver], help="probe-based mode tomography"
    )
    p_disc.add_argument("--modes", type=int, default=None)
    p_disc.add_argument("--shots", type=int, default=None)
    p_disc.add_argument("--seed", type=int, default=None)
    p_disc.add_argument("--threshold", type=float, default=None)
    p_disc.add_argument(
        "--delta-range", default=None, help="probe scan window as start:stop:count"
    )

    p_sweep = subs.add_parser(
        "sweep", parents=[common, solver], help="kappa over the (T_I, sigma_e) plane"
    )
    p_sweep.add_argument("mode", choices=["heatmap", "cut"])
    p_sweep.add_argument("--t-axis", dest="t_axis", default=None, help="lo:hi:count")
    p_sweep.add_argument(
        "--sigma-axis", dest="sigma_axis", default=None, help="lo:hi:count"
    )
    p_sweep.add_argument("--checkpoint", default=None, help="resumable point log (JSONL)")
    return parser


def _leaf_paths(tree, prefix=()):
    for key, value in tree.items():
        if isinstance(value, dict):
            yield from _leaf_paths(value, prefix + (key,))
        else:
            yield prefix + (key,), value


def _get_path(tree, path, default=None):
    node = tree
    for part in path:
        if not isinstance(node, dict) or part not in node:
            return default, False
        node = node[part]
    return node, True


def _check_keys(given, problems) -> None:
    defaults = default_config()
    for key, value in given.items():
        if key == "physical":
            if not isinstance(value, dict):
                problems.append("physical must be an object")
                continue
            for sub in value:
                if sub not in _PHYSICAL_KEYS:
                    problems.append(f"unknown config key physical.{sub}")
        elif key not in defaults:
            problems.append(f"unknown config key {key!r}")
        elif isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                problems.append(f"config key {key!r} must be an object")
                continue
            for sub in value:
                if sub not in defaults[key]:
                    problems.append(f"unknown config key {key}.{sub}")


def _parse_range3(value, name, problems):
    """Normalize a:b:n strings and [a, b, n] lists to [float, float, int]."""
    if isinstance(value, str):
        parts = value.split(":")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        problems.append(f"{name} must be start:stop:count or a 3-element list")
        return None
    if len(parts) != 3:
        problems.append(f"{name} must have exactly 3 fields, got {value!r}")
        return None
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = float(parts[2])
    except (TypeError, ValueError):
        problems.append(f"{name} fields must be numeric, got {value!r}")
        return None
    if not (math.isfinite(lo) and math.isfinite(hi)):
        problems.append(f"{name} bounds must be finite, got {value!r}")
        return None
    if count != int(count) or int(count) < 1:
        problems.append(f"{name} count must be a positive integer, got {parts[2]!r}")
        return None
    return [lo, hi, int(count)]


def _resolve_jobs(args, problems) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        raw = os.environ.get("ETMSIM_JOBS", "1")
        try:
            jobs = int(raw)
        except ValueError:
            problems.append(f"ETMSIM_JOBS must be an integer, got {raw!r}")
            return 1
    if jobs < 1:
        problems.append(f"jobs must be >= 1, got {jobs!r}")
        return 1
    return jobs


def resolve(args):
    """Merge defaults, config file, and flags into one validated config.

    Returns
    -------
    (resolved, info) : dict, dict
        ``resolved`` is JSON-serializable and complete; ``info`` carries
        provenance (raw file content, flag overrides, defaults applied),
        the constructed domain objects, and the worker count.

    Raises
    ------
    ValidationError
        With every detected problem, not just the first.
    """
    problems = []
    given = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                given = json.load(fh)
        except OSError as exc:
            problems.append(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            problems.append(f"config file is not valid JSON: {exc}")
        if not isinstance(given, dict):
            problems.append("config file must hold a JSON object")
            given = {}
    _check_keys(given, problems)

    resolved = default_config()
    for key, value in given.items():
        if key == "physical":
            continue
        if isinstance(resolved.get(key), dict) and isinstance(value, dict):
            resolved[key].update(value)
        else:
            resolved[key] = value

    if isinstance(given.get("physical"), dict):
        if "T_I" in given:
            problems.append("give either T_I or the physical group, not both")
        else:
            try:
                setup = PhysicalSetup(**given["physical"])
                resolved["T_I"] = dimensionless_time(setup)
            except (ValidationError, TypeError) as exc:
                problems.append(f"physical group invalid: {exc}")

    overrides = {}
    for dest, path in _FLAG_MAP.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        node, _ = _get_path(resolved, path[:-1])
        node[path[-1]] = value
        overrides[".".join(path)] = value

    for name, path in (
        ("hom.delta_range", ("hom", "delta_range")),
        ("sweep.t_axis", ("sweep", "t_axis")),
        ("sweep.sigma_axis", ("sweep", "sigma_axis")),
    ):
        value, _ = _get_path(resolved, path)
        if value is None and name == "hom.delta_range":
            continue
        parsed = _parse_range3(value, name, problems)
        if parsed is not None:
            node, _ = _get_path(resolved, path[:-1])
            node[path[-1]] = parsed

    path_value = resolved["sweep"]["path"]
    if path_value is not None:
        try:
            resolved["sweep"]["path"] = [
                [float(t), float(s)] for t, s in path_value
            ]
        except (TypeError, ValueError):
            problems.append(
                f"sweep.path must be a list of [T_I, sigma_e] pairs, got {path_value!r}"
            )

    jobs = _resolve_jobs(args, problems)

    defaults_applied = {}
    for path, value in _leaf_paths(default_config()):
        dotted = ".".join(path)
        _, in_file = _get_path(given, path)
        if not in_file and dotted not in overrides:
            defaults_applied[dotted] = value

    chi = grid = params = None
    try:
        chi = ChiModel(**resolved["chi"])
    except ValidationError as exc:
        problems.extend(exc.messages)
    except TypeError as exc:
        problems.append(f"chi group invalid: {exc}")
    try:
        grid = GridSpec(**resolved["grid"])
    except ValidationError as exc:
        problems.extend(exc.messages)
    except TypeError as exc:
        problems.append(f"grid group invalid: {exc}")
    if chi is not None and grid is not None:
        try:
            params = ControlParams(
                T_I=resolved["T_I"],
                sigma_e=resolved["sigma_e"],
                chi=chi,
                grid=grid,
            )
        except ValidationError as exc:
            problems.extend(exc.messages)
        except TypeError as exc:
            problems.append(f"T_I and sigma_e must be numeric: {exc}")

    sch = resolved["schmidt"]
    if not (isinstance(sch["tol"], (int, float)) and sch["tol"] >= 0):
        problems.append(f"schmidt.tol must be >= 0, got {sch['tol']!r}")
    if not (isinstance(sch["max_points"], int) and sch["max_points"] >= 8):
        problems.append(
            f"schmidt.max_points must be an integer >= 8, got {sch['max_points']!r}"
        )
    disc = resolved["discriminate"]
    if not (isinstance(disc["modes"], int) and disc["modes"] >= 1):
        problems.append(f"discriminate.modes must be a positive integer, got {disc['modes']!r}")
    if not (isinstance(disc["shots"], int) and disc["shots"] >= 0):
        problems.append(f"discriminate.shots must be a nonnegative integer, got {disc['shots']!r}")
    if not (0.0 < disc["threshold"] < 0.5):
        problems.append(f"discriminate.threshold must lie in (0, 0.5), got {disc['threshold']!r}")

    if problems:
        raise ValidationError(problems)

    info = {
        "given": given,
        "overrides": overrides,
        "defaults_applied": defaults_applied,
        "params": params,
        "chi": chi,
        "grid": grid,
        "jobs": jobs,
    }
    return resolved, info


def _convergence_summary(spectrum) -> dict:
    return {
        "converged": bool(spectrum.converged),
        "kappa": spectrum.kappa,
        "h2": spectrum.h2,
        "n_modes": spectrum.n_modes,
        "history": [
            {"n_points": step.n_points, "kappa": step.kappa}
            for step in spectrum.history
        ],
    }


def _solve_spectrum(resolved, params):
    sch = resolved["schmidt"]
    return converge_spectrum(
        params, tol=sch["tol"], method=sch["method"], max_points=sch["max_points"]
    )


def _resolve_deltas(range3, spectrum):
    if range3 is None:
        return default_deltas(spectrum)
    lo, hi, count = range3
    return np.linspace(lo, hi, count)


def _run_amplitude(resolved, info, outdir, manifest) -> int:
    amp = build_amplitude(info["params"])
    written = export_amplitude_csv(amp, os.path.join(outdir, "amplitude.csv"))
    manifest["outputs"] += [os.path.basename(p) for p in written]
    print(
        f"amplitude: {amp.grid.n}x{amp.grid.n} grid, "
        f"norm_constant={amp.norm_constant:.6g}"
    )
    return EXIT_OK


def _run_schmidt(resolved, info, outdir, manifest) -> int:
    spectrum = _solve_spectrum(resolved, info["params"])
    written = export_spectrum_csv(spectrum, os.path.join(outdir, "spectrum.csv"))
    written += export_modes_csv(
        spectrum,
        os.path.join(outdir, "modes.csv"),
        mode_cut=resolved["schmidt"]["mode_cut"],
    )
    manifest["outputs"] += [os.path.basename(p) for p in written]
    manifest["convergence"] = _convergence_summary(spectrum)
    print(
        f"schmidt: kappa={spectrum.kappa:.6g} h2={spectrum.h2:.6g} "
        f"converged={str(spectrum.converged).lower()}"
    )
    return EXIT_OK


def _run_hom(resolved, info, outdir, manifest) -> int:
    spectrum = _solve_spectrum(resolved, info["params"])
    deltas = _resolve_deltas(resolved["hom"]["delta_range"], spectrum)
    scan = coincidence_scan(spectrum, deltas, mode_cut=resolved["hom"]["mode_cut"])
    written = export_scan_csv(scan, os.path.join(outdir, "scan.csv"))
    manifest["outputs"] += [os.path.basename(p) for p in written]
    manifest["convergence"] = _convergence_summary(spectrum)
    print(
        f"hom: kappa={scan.kappa:.6g} fwhm={scan.fwhm:.6g} "
        f"baseline={scan.baseline:.6g}"
    )
    return EXIT_OK


def _run_discriminate(resolved, info, outdir, manifest) -> int:
    spectrum = _solve_spectrum(resolved, info["params"])
    disc = resolved["discriminate"]
    probes = schmidt_probes(spectrum, disc["modes"])
    result = run_tomography(
        spectrum,
        probes,
        shots=disc["shots"],
        seed=disc["seed"],
        threshold=disc["threshold"],
    )
    written = export_tomography(result, os.path.join(outdir, "tomography.json"))
    deltas = _resolve_deltas(resolved["hom"]["delta_range"], spectrum)
    for index, probe in enumerate(probes):
        scan = probe_coincidence(spectrum, index, probe, deltas)
        written += export_scan_csv(
            scan, os.path.join(outdir, f"probe_scan_mode{index + 1}.csv")
        )
    manifest["outputs"] += [os.path.basename(p) for p in written]
    manifest["convergence"] = _convergence_summary(spectrum)
    pairs = ", ".join(
        f"{label}={est:.4f}" for label, est in zip(result.labels, result.estimates)
    )
    print(f"discriminate: {pairs}, other={result.other_rate:.4f}")
    return EXIT_OK


def _run_sweep(resolved, info, args, outdir, manifest) -> int:
    swp = resolved["sweep"]
    plan = SweepPlan(
        t_values=log_axis(*swp["t_axis"]),
        sigma_values=log_axis(*swp["sigma_axis"]),
        path=tuple(tuple(p) for p in swp["path"]) if swp["path"] else (),
        chi=info["chi"],
        grid=info["grid"],
        jobs=info["jobs"],
        tol=resolved["schmidt"]["tol"],
        max_points=resolved["schmidt"]["max_points"],
    )
    checkpoint = args.checkpoint
    if args.mode == "heatmap":
        rows = run_heatmap(plan, checkpoint=checkpoint)
        write_heatmap_csv(os.path.join(outdir, "heatmap.csv"), rows)
        manifest["outputs"].append("heatmap.csv")
    else:
        rows = run_path_cut(plan, checkpoint=checkpoint)
        write_cut_csv(os.path.join(outdir, "cut.csv"), rows)
        manifest["outputs"].append("cut.csv")
    failed = [
        {"point": point_key(r.t_i, r.sigma_e), "error": r.error}
        for r in rows
        if r.error is not None
    ]
    n_converged = sum(1 for r in rows if r.converged)
    manifest["convergence"] = {
        "points": len(rows),
        "converged": n_converged,
        "failed": failed,
    }
    print(f"sweep {args.mode}: {n_converged}/{len(rows)} points converged")
    return EXIT_OK if n_converged == len(rows) else EXIT_PARTIAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        resolved, info = resolve(args)
    except ValidationError as exc:
        print("configuration invalid:", file=sys.stderr)
        for message in exc.messages:
            print(f"  - {message}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.dry_run:
        print(json.dumps(resolved, indent=2, sort_keys=True))
        return EXIT_OK

    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    manifest = {
        "version": __version__,
        "subcommand": args.subcommand
        + (f" {args.mode}" if args.subcommand == "sweep" else ""),
        "resolved_config": resolved,
        "given_config": info["given"],
        "flag_overrides": info["overrides"],
        "defaults_applied": info["defaults_applied"],
        "jobs": info["jobs"],
        "outputs": [],
        "convergence": {},
        "error": None,
        "wall_time_s": None,
    }
    runners = {
        "amplitude": lambda: _run_amplitude(resolved, info, outdir, manifest),
        "schmidt": lambda: _run_schmidt(resolved, info, outdir, manifest),
        "hom": lambda: _run_hom(resolved, info, outdir, manifest),
        "discriminate": lambda: _run_discriminate(resolved, info, outdir, manifest),
        "sweep": lambda: _run_sweep(resolved, info, args, outdir, manifest),
    }
    start = time.monotonic()
    try:
        code = runners[args.subcommand]()
    except (ValidationError, ConfigurationError) as exc:
        manifest["error"] = str(exc)
        print(f"configuration invalid: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except (NumericalError, ContractViolation, np.linalg.LinAlgError) as exc:
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    finally:
        manifest["wall_time_s"] = time.monotonic() - start
        write_json(os.path.join(outdir, "manifest.json"), manifest)
    return code


if __name__ == "__main__":
    sys.exit(main())
