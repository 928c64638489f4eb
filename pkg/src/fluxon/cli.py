"""``fluxon`` command-line interface.

Subcommands: ``analytic``, ``solve``, ``lattice``, ``drive`` and ``verify``.
Each reads a JSON config (``--config``) whose values may be overridden with
``--set key=value``; results go to ``--out`` or stdout.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Optional

from . import config as cfg
from .analytic import particle_number_sudden, particle_number_tanh
from .errors import FluxonError, ValidationError
from .io import canonical_json, config_hash, format_float, render_csv
from .lattice import LatticeSpec, dispersion_table, schedule_from_profile
from .modesolver import run_ordered, solve_record
from .params import solve_circuit_mode
from .records import SpectrumRecord
from .scalefactor import Tanh

SPECTRUM_HEADER = ("k", "rho", "n_analytic", "n_numeric", "rel_diff", "wronskian_drift",
                   "spread", "status")
DRIVE_HEADER = ("time_s", "flux_ext_Wb", "m2a2_rad2s2")
DISPERSION_HEADER = ("j", "k_rad_per_m", "omega_exact_rad_s", "omega_cont_rad_s")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _provenance(command: str, config: dict) -> list[str]:
    return [
        f"fluxon {command}",
        f"config_sha256={config_hash(config)}",
        f"config={canonical_json(config)}",
    ]


def _spectrum_rows(records):
    for r in records:
        yield (r.k, r.rho, r.n_analytic, r.n_numeric, r.rel_diff, r.wronskian_drift, r.spread,
               r.status)


def _analytic_task(args) -> SpectrumRecord:
    case, rho = args
    if case.mode is None:
        return SpectrumRecord(k=case.label, rho=rho, n_analytic=None, status=case.error)
    if rho is None:
        return SpectrumRecord(k=case.label, rho=None, n_analytic=None,
                              status="no closed form for tabulated profiles")
    n = particle_number_sudden(case.mode) if math.isinf(rho) else particle_number_tanh(case.mode, rho)
    return SpectrumRecord(k=case.label, rho=rho, n_analytic=n)


def analytic_records(config: dict, jobs: int = 1) -> list[SpectrumRecord]:
    """Closed-form spectrum over the config's (k, rho) grid, k-major."""
    cases = cfg.mode_cases(config)
    rhos = cfg.rho_values(config)
    tasks = [(case, rho) for case in cases for rho in rhos]
    return run_ordered(_analytic_task, tasks, jobs)


def _solve_task(args) -> SpectrumRecord:
    config, case, rho, settings = args
    if case.mode is None:
        return SpectrumRecord(k=case.label, rho=rho, n_analytic=None, status=case.error)
    try:
        profile = cfg.profile_for(config, case, rho)
    except FluxonError as exc:
        return SpectrumRecord(k=case.label, rho=rho, n_analytic=None,
                              status=f"{type(exc).__name__}: {exc}")
    record = solve_record(profile, case.mode, **settings)
    return dataclasses.replace(record, k=case.label)


def solve_records(config: dict, jobs: int = 1) -> list[SpectrumRecord]:
    """Numeric spectrum with analytic comparison over the config's grid."""
    cases = cfg.mode_cases(config)
    rhos = cfg.rho_values(config)
    settings = cfg.solver_settings(config)
    tasks = [(config, case, rho, settings) for case in cases for rho in rhos]
    return run_ordered(_solve_task, tasks, jobs)


def render_spectrum(command: str, config: dict, records) -> str:
    return render_csv(SPECTRUM_HEADER, _spectrum_rows(records), _provenance(command, config))


def cmd_analytic(config: dict, jobs: int = 1) -> str:
    return render_spectrum("analytic", config, analytic_records(config, jobs))


def cmd_solve(config: dict, jobs: int = 1) -> tuple[str, bool]:
    records = solve_records(config, jobs)
    ok = all(r.status == "ok" for r in records)
    return render_spectrum("solve", config, records), ok


def lattice_from(config: dict) -> tuple[LatticeSpec, float]:
    spec = config.get("lattice", {})
    if not isinstance(spec, dict):
        raise ValidationError("config.lattice: expected an object")
    n_cells = spec.get("n_cells", 100)
    lattice = LatticeSpec(n_cells=n_cells, circuit=cfg.circuit_from(config),
                          boundary=spec.get("boundary", "periodic"))
    flux = spec.get("flux", 0.0)
    if isinstance(flux, bool) or not isinstance(flux, (int, float)):
        raise ValidationError("config.lattice.flux: expected a number")
    return lattice, float(flux)


def cmd_lattice(config: dict) -> str:
    lattice, flux = lattice_from(config)
    rows = [(j, float(k), float(we), float(wc)) for j, k, we, wc in dispersion_table(lattice, flux)]
    return render_csv(DISPERSION_HEADER, rows, _provenance("lattice", config))


def drive_setup(config: dict):
    """Resolve the drive section into (lattice, profile, mass, sample_rate, notes)."""
    lattice, _ = lattice_from(config)
    circuit = lattice.circuit
    drive = config.get("drive")
    if not isinstance(drive, dict):
        raise ValidationError("config.drive: required object")
    rho = cfg._number(drive, "rho", positive=True)
    sample_rate = cfg._number(drive, "sample_rate", positive=True)
    notes = []
    if "targets" in config:
        t = config["targets"]
        if not isinstance(t, dict):
            raise ValidationError("config.targets: expected an object")
        cm = solve_circuit_mode(circuit, cfg._number(t, "omega_in", positive=True),
                                cfg._number(t, "omega_out", positive=True),
                                cfg._number(t, "flux_out", 0.0))
        k2 = cm.mode.k ** 2
        a_in = (cm.mode.omega_in ** 2 - k2) / circuit.max_mass_sq
        a_out = (cm.mode.omega_out ** 2 - k2) / circuit.max_mass_sq
        profile = Tanh(0.5 * (a_in + a_out), 0.5 * (a_out - a_in), rho)
        mass = circuit.max_mass_frequency
        notes += [
            f"k_prime_rad_per_m={format_float(cm.wavenumber)}",
            f"k_prime_a={format_float(cm.wavenumber * circuit.cell_length)}",
            f"flux_in_Wb={format_float(cm.flux_in)}",
            f"flux_out_Wb={format_float(cm.flux_out)}",
            f"omega_in_rad_s={format_float(cm.mode.omega_in)}",
            f"omega_out_rad_s={format_float(cm.mode.omega_out)}",
        ]
    else:
        profile = Tanh(cfg._number(drive, "A"), cfg._number(drive, "B"), rho)
        mass = cfg._number(drive, "mass", positive=True)
    return lattice, profile, mass, sample_rate, notes


def cmd_drive(config: dict) -> str:
    lattice, profile, mass, sample_rate, notes = drive_setup(config)
    schedule = schedule_from_profile(lattice, profile, mass, sample_rate)
    m2 = schedule.mass_sq(lattice.circuit)
    comments = _provenance("drive", config) + notes + [
        f"feasible={str(schedule.feasible).lower()}",
        f"max_arccos_arg={format_float(schedule.max_arccos_arg)}",
        f"min_arccos_arg={format_float(schedule.min_arccos_arg)}",
    ]
    rows = [(float(t), float(phi), float(v)) for t, phi, v in zip(schedule.times, schedule.flux, m2)]
    return render_csv(DRIVE_HEADER, rows, comments)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analytic", "closed-form particle spectrum over a (k, rho) grid"),
        ("solve", "numeric mode-function spectrum with analytic comparison"),
        ("lattice", "exact vs continuum dispersion of the chain"),
        ("drive", "flux-bias waveform realising a scale-factor profile"),
        ("verify", "run the invariant suite and write a JSON report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (dotted key, JSON value); repeatable")
        if name in ("analytic", "solve", "verify"):
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name in ("solve", "verify"):
            p.add_argument("--tol", type=float, help="override config tol")
            p.add_argument("--method", choices=("auto", "rk", "taylor"), help="override config method")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = cfg.load_config(args.config, args.set)
        for flag in ("tol", "method"):
            value = getattr(args, flag, None)
            if value is not None:
                config[flag] = value
        jobs = max(1, getattr(args, "jobs", 1) or 1)

        if args.command == "analytic":
            _emit(cmd_analytic(config, jobs), args.out)
            return EXIT_OK
        if args.command == "solve":
            text, ok = cmd_solve(config, jobs)
            _emit(text, args.out)
            return EXIT_OK if ok else EXIT_NUMERIC
        if args.command == "lattice":
            _emit(cmd_lattice(config), args.out)
            return EXIT_OK
        if args.command == "drive":
            _emit(cmd_drive(config), args.out)
            return EXIT_OK
        from .checks import run_checks

        results = run_checks(config, jobs=jobs, log=sys.stderr)
        report = json.dumps([r.as_dict() for r in results], indent=2) + "\n"
        _emit(report, args.out)
        failed = [r for r in results if not r.passed]
        if failed:
            print(f"verify: FAILED {failed[0].invariant_name}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"verify: all {len(results)} invariants passed", file=sys.stderr)
        return EXIT_OK
    except ValidationError as exc:
        print(f"fluxon: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FluxonError as exc:
        print(f"fluxon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID if isinstance(exc, ValueError) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
