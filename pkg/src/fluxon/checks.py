"""Invariant checks run by ``fluxon verify``.

Each check compares the library against an independent reference (Gamma
identities, closed forms, brute-force integration) and yields a
:class:`CheckResult`. Tolerances default to the contract values and can be
overridden through the config's ``tolerances`` object.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import config as cfg
from .analytic import (
    ModeSpec,
    bogoliubov_tanh,
    effective_temperature,
    log_gamma_complex,
    particle_number_sudden,
    particle_number_tanh,
)
from .constants import PHI0
from .errors import FluxonError, ValidationError
from .lattice import (
    LatticeSpec,
    chain_brute_force,
    chain_evolution,
    lattice_mode,
    schedule_from_profile,
)
from .modesolver import (
    bogoliubov_at,
    evolve_mode,
    extract_bogoliubov,
    run_ordered,
    solve_mode,
)
from .params import (
    REFERENCE_CIRCUIT,
    drive_waveform,
    effective_mass_sq,
    mode_from_circuit,
    solve_circuit_mode,
)
from .scalefactor import Step, Tanh, asymptotics, evaluate

REF_OMEGA_IN = 0.21e12
REF_OMEGA_OUT = 0.25e12

DEFAULT_TOLERANCES = {
    "gamma_reflection": 1e-10,
    "analytic_normalization": 1e-9,
    "closed_form_equivalence": 1e-9,
    "sudden_limit": 1e-3,
    "adiabatic_limit": 0.05,
    "rho_monotonicity": 1e-13,
    "numeric_vs_analytic": 1e-5,
    "wronskian_conservation": 1e-9,
    "step_sudden_numeric": 1e-6,
    "extraction_independence": 1e-6,
    "tol_convergence": 1.0,
    "drive_round_trip": 1e-12,
    "mass_symmetry": 1e-12,
    "scalefactor_asymptotics": 1e-15,
    "lattice_k_term_bound": 0.0,
    "lattice_small_ka_bound": 0.0,
    "lattice_brute_force": 1e-8,
    "chain_continuum_matches_modesolver": 0.0,
    "reference_mass_frequency": 0.02,
    "reference_mode_feasible": 1e-12,
    "rho_sweep_asymptote": 1e-3,
    # upper end of the accepted [5 mK, tol] band, in kelvin
    "effective_temperature": 0.05,
}


@dataclass
class CheckResult:
    invariant_name: str
    tolerance: float
    observed: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "invariant_name": self.invariant_name,
            "tolerance": self.tolerance,
            "observed": self.observed if math.isfinite(self.observed) else str(self.observed),
            "pass": self.passed,
            "detail": self.detail,
        }


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def _grid(config, key, default):
    spec = {**default, **config.get(key, {})}
    return (cfg.grid_from(spec["rho_over_omega_out"], f"{key}.rho_over_omega_out"),
            cfg.grid_from(spec["omega_ratio"], f"{key}.omega_ratio"))


ANALYTIC_GRID = {
    "rho_over_omega_out": {"start": 0.05, "stop": 100, "num": 20, "spacing": "log"},
    "omega_ratio": {"start": 1, "stop": 20, "num": 20, "spacing": "linear"},
}
NUMERIC_GRID = {
    "rho_over_omega_out": [0.1, 1.0, 10.0],
    "omega_ratio": [1.1, math.sqrt(11.0), 10.0],
}


def _tanh_case(ratio, rho_rel, omega_in=1.0):
    """Mode with ``omega_out = ratio * omega_in`` and matching profile, k = 0, m = 1."""
    w_out = ratio * omega_in
    a_in, a_out = omega_in ** 2, w_out ** 2
    profile = Tanh(0.5 * (a_in + a_out), 0.5 * (a_out - a_in), rho_rel * w_out)
    return ModeSpec(k=0.0, omega_in=omega_in, omega_out=w_out), profile


# -- analytic ---------------------------------------------------------------

def check_gamma_reflection(config, tol):
    rng = np.random.default_rng(config.get("seed", 20240611))
    ys = rng.uniform(0.01, 50.0, 200)
    worst = 0.0
    for y in ys:
        g = math.exp(2 * log_gamma_complex(complex(0, y)).real) * y * math.sinh(math.pi * y) / math.pi
        g1 = math.exp(2 * log_gamma_complex(complex(1, y)).real) * math.sinh(math.pi * y) / (math.pi * y)
        worst = max(worst, abs(g - 1), abs(g1 - 1))
    return worst, "200 random y in (0.01, 50), |Gamma(iy)|^2 and |Gamma(1+iy)|^2 identities"


def _analytic_grid(config):
    rhos, ratios = _grid(config, "analytic_grid", ANALYTIC_GRID)
    for ratio in ratios:
        for x in rhos:
            mode, profile = _tanh_case(ratio, x)
            yield mode, profile.rho


def check_analytic_normalization(config, tol):
    worst = max(abs(bogoliubov_tanh(m, rho).normalization_error) for m, rho in _analytic_grid(config))
    return worst, "max | |alpha|^2 - |beta|^2 - 1 | over the analytic grid"


def check_closed_form_equivalence(config, tol):
    worst = 0.0
    for m, rho in _analytic_grid(config):
        n_gamma = bogoliubov_tanh(m, rho).particle_number
        n_sinh = particle_number_tanh(m, rho)
        worst = max(worst, _rel(n_gamma, n_sinh) if n_sinh else abs(n_gamma))
    return worst, "max relative |beta|^2 (Gamma) vs sinh form"


def check_sudden_limit(config, tol):
    _, ratios = _grid(config, "analytic_grid", ANALYTIC_GRID)
    worst = 0.0
    for ratio in ratios:
        if ratio == 1.0:
            continue
        mode, _ = _tanh_case(ratio, 100.0)
        worst = max(worst, _rel(particle_number_tanh(mode, 100.0 * mode.omega_out),
                                particle_number_sudden(mode)))
    return worst, "rho = 100 omega_out vs (w_out - w_in)^2 / (4 w_in w_out)"


def check_adiabatic_limit(config, tol):
    _, ratios = _grid(config, "analytic_grid", ANALYTIC_GRID)
    worst = 0.0
    for ratio in ratios:
        if ratio == 1.0:
            continue
        mode, _ = _tanh_case(ratio, 1.0)
        rho = mode.omega_in / 10
        expected = -2 * math.pi * mode.omega_in / rho
        worst = max(worst, _rel(math.log(particle_number_tanh(mode, rho)), expected))
    return worst, "rho = omega_in/10: log<n> vs -2 pi omega_in / rho"


def check_rho_monotonicity(config, tol):
    _, ratios = _grid(config, "analytic_grid", ANALYTIC_GRID)
    worst = 0.0
    for ratio in ratios:
        mode, _ = _tanh_case(ratio, 1.0)
        n = np.array([particle_number_tanh(mode, r) for r in np.geomspace(1e-2, 1e3, 400) * mode.omega_out])
        drops = (n[:-1] - n[1:]) / np.maximum(n[1:], 1e-300)
        worst = max(worst, float(np.max(drops, initial=0.0)))
    return worst, "largest relative decrease of <n> between neighbouring rho"


# -- modesolver -------------------------------------------------------------

def check_numeric_vs_analytic(config, tol):
    settings = cfg.solver_settings(config)
    rhos, ratios = _grid(config, "numeric_grid", NUMERIC_GRID)
    worst, methods = 0.0, []
    for ratio in ratios:
        for x in rhos:
            mode, profile = _tanh_case(ratio, x)
            report = solve_mode(profile, mode, **settings)
            methods.append(report.method)
            worst = max(worst, _rel(report.pair.particle_number,
                                    particle_number_tanh(mode, profile.rho)))
    return worst, f"{len(methods)} points, methods: {', '.join(sorted(set(methods)))}"


def check_wronskian_conservation(config, tol):
    mode, profile = _tanh_case(2.0, 0.5)
    traj = evolve_mode(profile, mode, tol=config.get("wronskian_tol", 1e-10), method="rk")
    return traj.wronskian_drift, "Tanh(A=2.5, B=1.5, rho=1), rk at tol 1e-10"


def check_step_sudden_numeric(config, tol):
    settings = cfg.solver_settings(config)
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    report = solve_mode(Step(2.5, 1.5), mode, **settings)
    return _rel(report.pair.particle_number, 0.125), "Step(A=2.5, B=1.5) vs 0.125"


def check_extraction_independence(config, tol):
    mode, profile = _tanh_case(2.0, 0.5)
    t_end = max(25 / profile.rho, 20 * 2 * math.pi / mode.omega_in) + 20 * 2 * math.pi / mode.omega_out
    traj = evolve_mode(profile, mode, t_end=t_end, tol=cfg.solver_settings(config)["tol"],
                       method="rk", n_samples=4001)
    period = 2 * math.pi / mode.omega_out
    first = int(np.searchsorted(traj.times, 25 / profile.rho))
    step = int(math.ceil(5 * period / (traj.times[1] - traj.times[0])))
    betas = [abs(bogoliubov_at(traj, i, mode.omega_out)[1]) for i in range(first, traj.times.size, step)]
    return max(betas) - min(betas), f"{len(betas)} windows >= 5 out-periods apart"


def check_tol_convergence(config, tol):
    mode, profile = _tanh_case(2.0, 0.5)
    ref = particle_number_tanh(mode, profile.rho)
    tols = config.get("convergence_tols", [1e-6, 5e-7, 2.5e-7])
    errs = []
    for t in tols:
        traj = evolve_mode(profile, mode, tol=t, method="rk")
        pair = extract_bogoliubov(traj, mode.omega_out, strict=False).pair
        errs.append(_rel(pair.particle_number, ref))
    ratio = max(b / a for a, b in zip(errs, errs[1:]))
    return ratio, "errors " + ", ".join(f"{e:.2e}" for e in errs) + " at rk tol " + \
        ", ".join(f"{t:g}" for t in tols)


# -- params / scale factor ----------------------------------------------------

def check_drive_round_trip(config, tol):
    c = REFERENCE_CIRCUIT
    wmax = c.max_mass_frequency
    profile = Tanh(0.5, 0.45, 0.3 * wmax)
    times = np.linspace(-30 / profile.rho, 30 / profile.rho, 801)
    flux = drive_waveform(c, profile, wmax, times)
    target = wmax ** 2 * np.asarray(evaluate(profile, times))
    back = np.array([effective_mass_sq(c, phi) for phi in flux])
    return float(np.max(np.abs(back / target - 1))), "Tanh(0.5, 0.45) on the reference circuit"


def check_mass_symmetry(config, tol):
    c = REFERENCE_CIRCUIT
    worst = 0.0
    for phi in np.linspace(-0.45, 0.45, 37) * PHI0:
        base = effective_mass_sq(c, phi)
        for other in (-phi, phi + 2 * PHI0, phi - 2 * PHI0, phi + PHI0):
            worst = max(worst, _rel(effective_mass_sq(c, other), base))
    return worst, "evenness and periodicity of 1/(L_J C) in the flux"


def check_scalefactor_asymptotics(config, tol):
    worst = 0.0
    for A, B, rho in ((2.5, 1.5, 1.0), (2.5, -1.5, 3.0), (1.0, 0.0, 1.0), (0.7, 0.2, 1e3)):
        p = Tanh(A, B, rho)
        lo, hi = asymptotics(p)
        worst = max(worst, _rel(evaluate(p, -20 / rho), lo), _rel(evaluate(p, 20 / rho), hi))
        step = Step(A, B)
        for t in (-5.0, -0.5, 0.5, 5.0):
            worst = max(worst, _rel(evaluate(Tanh(A, B, 1e4), t), evaluate(step, t)))
    return worst, "tanh at -+20/rho vs asymptotes; step as the rho -> inf limit"


# -- lattice ----------------------------------------------------------------------

def check_lattice_k_term_bound(config, tol):
    lat = LatticeSpec(200, REFERENCE_CIRCUIT, "open")
    violations = 0
    for j in range(1, 200):
        if lat.k_term_sq(j, "exact") > lat.k_term_sq(j, "continuum"):
            violations += 1
    return float(violations), "count of modes with exact k-term above continuum"


def check_lattice_small_ka_bound(config, tol):
    lat = LatticeSpec(400, REFERENCE_CIRCUIT, "periodic")
    violations = 0
    for j in range(1, 400):
        ka = lat.wavenumber(j) * REFERENCE_CIRCUIT.cell_length
        if ka >= 0.2:
            break
        ke, kc = lat.k_term_sq(j, "exact"), lat.k_term_sq(j, "continuum")
        m2 = REFERENCE_CIRCUIT.max_mass_sq
        we, wc = math.sqrt(ke + m2), math.sqrt(kc + m2)
        if abs(we - wc) / wc >= ka ** 2 / 12 * kc / (kc + m2):
            violations += 1
    return float(violations), "count of modes with k'a < 0.2 breaking the (k'a)^2/12 bound"


def _reference_schedule(n_cells, boundary):
    lat = LatticeSpec(n_cells, REFERENCE_CIRCUIT, boundary)
    wmax = REFERENCE_CIRCUIT.max_mass_frequency
    profile = Tanh(0.85, 0.15, 0.5 * wmax)
    return lat, schedule_from_profile(lat, profile, wmax, sample_rate=100 * wmax / (2 * math.pi))


def check_lattice_brute_force(config, tol):
    worst = 0.0
    for boundary in ("periodic", "open"):
        lat, sched = _reference_schedule(2, boundary)
        modes = chain_evolution(lat, sched, tol=1e-12, method="rk")
        for j, report in modes.items():
            bf, leak = chain_brute_force(lat, sched, j, tol=1e-12)
            worst = max(worst, abs(bf.pair.beta - report.pair.beta),
                        abs(abs(bf.pair.alpha) - abs(report.pair.alpha)), leak)
    return worst, "N = 2 coupled node integration vs decoupled modes, both boundaries"


def check_chain_continuum(config, tol):
    lat, sched = _reference_schedule(8, "periodic")
    profile = sched.to_profile(REFERENCE_CIRCUIT)
    worst = 0.0
    reports = chain_evolution(lat, sched, modes=[1, 2], tol=1e-11, method="rk", dispersion="continuum")
    for j, report in reports.items():
        direct = solve_mode(profile, lattice_mode(lat, profile, j, "continuum"), tol=1e-11, method="rk")
        worst = max(worst, abs(direct.pair.beta - report.pair.beta), abs(direct.pair.alpha - report.pair.alpha))
    return worst, "chain_evolution(continuum) vs solve_mode on the same inputs"


# -- reference circuit ----------------------------------------------------------

def check_reference_mass_frequency(config, tol):
    return _rel(REFERENCE_CIRCUIT.max_mass_frequency, REF_OMEGA_OUT), \
        f"sqrt(1/(L_J,min C)) = {REFERENCE_CIRCUIT.max_mass_frequency:.6g} rad/s"


def check_reference_mode_feasible(config, tol):
    cm = solve_circuit_mode(REFERENCE_CIRCUIT, REF_OMEGA_IN, REF_OMEGA_OUT)
    mode = mode_from_circuit(REFERENCE_CIRCUIT, cm.wavenumber, cm.flux_in, cm.flux_out)
    err = max(_rel(mode.omega_in, REF_OMEGA_IN), _rel(mode.omega_out, REF_OMEGA_OUT))
    return err, (f"k' = {cm.wavenumber:.6g} rad/m, flux_in = {cm.flux_in / PHI0:.6g} Phi0, "
                 f"flux_out = {cm.flux_out / PHI0:.6g} Phi0")


def check_rho_sweep(config, tol):
    mode = ModeSpec(k=0.0, omega_in=REF_OMEGA_IN, omega_out=REF_OMEGA_OUT)
    rhos = np.geomspace(1e-2, 1e2, 200) * REF_OMEGA_OUT
    n = np.array([particle_number_tanh(mode, r) for r in rhos])
    if np.any(np.diff(n) < -1e-13 * n[1:]):
        return math.inf, "sweep not monotone"
    return _rel(n[-1], particle_number_sudden(mode)), f"asymptote {n[-1]:.6g} vs sudden value"


def check_effective_temperature(config, tol):
    mode = ModeSpec(k=0.0, omega_in=REF_OMEGA_IN, omega_out=REF_OMEGA_OUT)
    temp = effective_temperature(particle_number_sudden(mode), REF_OMEGA_OUT)
    return temp, "kelvin; must lie in [5 mK, tol]"


CHECKS: list[tuple[str, Callable, Optional[Callable[[float, float], bool]]]] = [
    ("gamma_reflection", check_gamma_reflection, None),
    ("analytic_normalization", check_analytic_normalization, None),
    ("closed_form_equivalence", check_closed_form_equivalence, None),
    ("sudden_limit", check_sudden_limit, None),
    ("adiabatic_limit", check_adiabatic_limit, None),
    ("rho_monotonicity", check_rho_monotonicity, None),
    ("numeric_vs_analytic", check_numeric_vs_analytic, None),
    ("wronskian_conservation", check_wronskian_conservation, None),
    ("step_sudden_numeric", check_step_sudden_numeric, None),
    ("extraction_independence", check_extraction_independence, None),
    ("tol_convergence", check_tol_convergence, None),
    ("drive_round_trip", check_drive_round_trip, None),
    ("mass_symmetry", check_mass_symmetry, None),
    ("scalefactor_asymptotics", check_scalefactor_asymptotics, None),
    ("lattice_k_term_bound", check_lattice_k_term_bound, lambda obs, tol: obs <= tol),
    ("lattice_small_ka_bound", check_lattice_small_ka_bound, lambda obs, tol: obs <= tol),
    ("lattice_brute_force", check_lattice_brute_force, None),
    ("chain_continuum_matches_modesolver", check_chain_continuum, lambda obs, tol: obs <= tol),
    ("reference_mass_frequency", check_reference_mass_frequency, None),
    ("reference_mode_feasible", check_reference_mode_feasible, None),
    ("rho_sweep_asymptote", check_rho_sweep, None),
    ("effective_temperature", check_effective_temperature,
     lambda obs, tol: 5e-3 <= obs <= tol),
]


def _run_one(args) -> tuple[CheckResult, float]:
    index, config, tol = args
    name, fn, judge = CHECKS[index]
    start = time.perf_counter()
    try:
        observed, detail = fn(config, tol)
        observed = float(observed)
        passed = judge(observed, tol) if judge else observed < tol
    except (FluxonError, ArithmeticError) as exc:
        observed, detail, passed = math.inf, f"{type(exc).__name__}: {exc}", False
    return CheckResult(name, tol, observed, bool(passed), detail), time.perf_counter() - start


def run_checks(config: dict, jobs: int = 1, log=None) -> list[CheckResult]:
    """Run every invariant check; failures are recorded, never raised.

    With ``jobs > 1`` checks run in worker processes; the returned order is
    the same as for a serial run.
    """
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(config.get("tolerances", {}))
    unknown = set(tolerances) - {name for name, _, _ in CHECKS}
    if unknown:
        raise ValidationError(f"config.tolerances: unknown invariants {sorted(unknown)}")
    # grids and solver settings are validated up front so bad input is an input error
    _grid(config, "analytic_grid", ANALYTIC_GRID)
    _grid(config, "numeric_grid", NUMERIC_GRID)
    cfg.solver_settings(config)
    only = config.get("only")
    tasks = [(i, config, float(tolerances[name])) for i, (name, _, _) in enumerate(CHECKS)
             if not only or name in only]
    results = []
    for result, elapsed in run_ordered(_run_one, tasks, jobs):
        results.append(result)
        if log is not None:
            status = "PASS" if result.passed else "FAIL"
            print(f"[{status}] {result.invariant_name}: observed={result.observed:.3e} "
                  f"tol={result.tolerance:.1e} ({elapsed:.1f}s) {result.detail}", file=log)
    return results
