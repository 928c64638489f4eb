"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line, which is repeated in
the pytest terminal summary. Run ``python tests/test_acceptance.py`` to get
the lines without pytest.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

from fluxon import (
    HBAR,
    KB,
    REFERENCE_CIRCUIT,
    LatticeSpec,
    ModeSpec,
    Step,
    Tanh,
    bogoliubov_tanh,
    chain_brute_force,
    chain_evolution,
    effective_mass_sq,
    particle_number_sudden,
    particle_number_tanh,
    schedule_from_profile,
    solve_mode,
)
from fluxon.checks import run_checks
from fluxon.cli import cmd_analytic, cmd_drive
from fluxon.config import load_config

sys.path.insert(0, str(Path(__file__).resolve().parent))
from conftest import ACCEPTANCE_LINES  # noqa: E402

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
W_IN, W_OUT = 0.21e12, 0.25e12


def report(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


def _case(ratio, rho_rel):
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=ratio)
    return mode, Tanh(0.5 * (1 + ratio ** 2), 0.5 * (ratio ** 2 - 1), rho_rel * ratio)


def _grid():
    for ratio in np.linspace(1.0, 20.0, 20):
        for x in np.geomspace(0.05, 100.0, 20):
            mode, profile = _case(ratio, x)
            yield mode, profile.rho


def test_criterion_1_normalization():
    worst = max(abs(bogoliubov_tanh(m, rho).normalization_error) for m, rho in _grid())
    report(1, "normalization |a|^2-|b|^2=1 on 20x20 grid", worst < 1e-9, f"max dev {worst:.3e} < 1e-9")


def test_criterion_2_closed_form():
    worst = 0.0
    for m, rho in _grid():
        n = particle_number_tanh(m, rho)
        b2 = bogoliubov_tanh(m, rho).particle_number
        worst = max(worst, abs(b2 - n) / n if n else abs(b2))
    report(2, "Gamma |beta|^2 vs sinh closed form", worst < 1e-9, f"max rel {worst:.3e} < 1e-9")


def test_criterion_3_numeric_oracle():
    start = time.perf_counter()
    worst, count = 0.0, 0
    for ratio in (1.1, math.sqrt(11.0), 10.0):
        for x in (0.1, 1.0, 10.0):
            mode, profile = _case(ratio, x)
            n = solve_mode(profile, mode, tol=1e-12).pair.particle_number
            ref = particle_number_tanh(mode, profile.rho)
            worst = max(worst, abs(n - ref) / ref)
            count += 1
    elapsed = time.perf_counter() - start
    report(3, "modesolver vs analytic", count >= 9 and worst < 1e-5 and elapsed < 120,
           f"{count} points, max rel {worst:.3e} < 1e-5, {elapsed:.1f}s < 120s")


def test_criterion_4_sudden_limit():
    worst_tanh = 0.0
    for ratio in (1.1, 2.0, math.sqrt(11.0), 10.0, 20.0):
        mode, _ = _case(ratio, 1.0)
        n = particle_number_tanh(mode, 100 * mode.omega_out)
        worst_tanh = max(worst_tanh, abs(n / particle_number_sudden(mode) - 1))
    reference = ModeSpec(k=0.0, omega_in=W_IN, omega_out=W_OUT)
    worst_tanh = max(worst_tanh, abs(particle_number_tanh(reference, 100 * W_OUT)
                                     / particle_number_sudden(reference) - 1))
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    n_step = solve_mode(Step(2.5, 1.5), mode, tol=1e-12).pair.particle_number
    step_err = abs(n_step - particle_number_sudden(mode)) / particle_number_sudden(mode)
    report(4, "sudden limit", worst_tanh < 1e-3 and step_err < 1e-6,
           f"tanh at rho=100 w_out rel {worst_tanh:.3e} < 1e-3; step numeric rel {step_err:.3e} < 1e-6")


def test_criterion_5_adiabatic_limit():
    worst = 0.0
    for ratio in (1.1, 2.0, 5.0, 10.0, 20.0):
        mode, _ = _case(ratio, 1.0)
        rho = mode.omega_in / 10
        expected = -2 * math.pi * mode.omega_in / rho
        worst = max(worst, abs(math.log(particle_number_tanh(mode, rho)) / expected - 1))
    report(5, "adiabatic limit log<n> vs -2 pi w_in/rho", worst < 0.05, f"max rel {worst:.3e} < 0.05")


def test_criterion_6_reference_parameters():
    wmax = math.sqrt(effective_mass_sq(REFERENCE_CIRCUIT, 0.0))
    mass_ok = abs(wmax / W_OUT - 1) < 0.02

    text = cmd_drive(load_config(str(CONFIGS / "drive_reference.json")))
    notes = dict(line[2:].split("=", 1) for line in text.splitlines()
                 if line.startswith("# ") and "=" in line and not line.startswith("# config"))
    drive_ok = (notes["feasible"] == "true"
                and abs(float(notes["omega_in_rad_s"]) / W_IN - 1) < 1e-9
                and abs(float(notes["omega_out_rad_s"]) / W_OUT - 1) < 1e-9)

    rows = [line.split(",") for line in cmd_analytic(load_config(str(CONFIGS / "rho_sweep.json"))).splitlines()
            if line and not line.startswith(("#", "k,"))]
    n = np.array([float(r[2]) for r in rows])
    sudden = (W_OUT - W_IN) ** 2 / (4 * W_IN * W_OUT)
    monotone = bool(np.all(np.diff(n) >= 0))
    asymptote = abs(n[-1] / sudden - 1)
    report(6, "reference parameter consistency",
           mass_ok and drive_ok and monotone and asymptote < 1e-3 and abs(sudden - 7.62e-3) < 1e-5,
           f"w_max {wmax:.5e} rad/s ({abs(wmax / W_OUT - 1):.2%} from 0.25e12); drive feasible with "
           f"k'={float(notes['k_prime_rad_per_m']):.5g} rad/m, flux_in={float(notes['flux_in_Wb']):.5g} Wb; "
           f"sweep monotone={monotone}, last {n[-1]:.5e} vs sudden {sudden:.5e}")


def test_criterion_7_effective_temperature():
    reference = ModeSpec(k=0.0, omega_in=W_IN, omega_out=W_OUT)
    temp = particle_number_sudden(reference) * HBAR * W_OUT / KB
    report(7, "effective temperature", 5e-3 <= temp <= 50e-3, f"{temp * 1e3:.3f} mK in [5, 50] mK")


def test_criterion_8_brute_force_lattice():
    wmax = REFERENCE_CIRCUIT.max_mass_frequency
    worst = 0.0
    for boundary in ("periodic", "open"):
        lat = LatticeSpec(2, REFERENCE_CIRCUIT, boundary)
        sched = schedule_from_profile(lat, Tanh(0.85, 0.15, 0.5 * wmax), wmax,
                                      sample_rate=100 * wmax / (2 * math.pi))
        for j, rep in chain_evolution(lat, sched, tol=1e-12, method="rk").items():
            bf, leak = chain_brute_force(lat, sched, j, tol=1e-12)
            worst = max(worst, abs(bf.pair.beta - rep.pair.beta),
                        abs(abs(bf.pair.alpha) - abs(rep.pair.alpha)), leak)
    report(8, "N=2 coupled chain vs normal modes", worst < 1e-8, f"max |d beta|, |d alpha|, leak {worst:.3e} < 1e-8")


def test_criterion_9_determinism():
    config = load_config(str(CONFIGS / "rho_sweep.json"))
    first = cmd_analytic(config).encode()
    second = cmd_analytic(config).encode()
    parallel = cmd_analytic(config, jobs=8).encode()
    report(9, "byte-identical CSV", first == second == parallel,
           f"repeat identical={first == second}, jobs=8 identical={first == parallel}")


def test_verify_suite_runtime():
    config = load_config(str(CONFIGS / "verify.json"))
    start = time.perf_counter()
    results = run_checks(config)
    elapsed = time.perf_counter() - start
    failed = [r.invariant_name for r in results if not r.passed]
    report("V", "full verify suite", not failed and elapsed < 300,
           f"{len(results)} invariants, failed={failed or 'none'}, {elapsed:.1f}s < 300s")


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
