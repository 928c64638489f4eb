import math

import numpy as np
import pytest

from fluxon import (
    ModeSpec,
    NotConverged,
    PreconditionNotAsymptotic,
    Step,
    StepSizeUnderflow,
    Tanh,
    ValidationError,
    evolve_mode,
    extract_bogoliubov,
    particle_number_tanh,
    solve_mode,
    spectrum_numeric,
)
from fluxon.modesolver import bogoliubov_at, integration_span
from fluxon.scalefactor import tabulate

from conftest import rel

N_UNIT = 0.0017127354360056880702156317670563


def _case(ratio, rho_rel):
    a_in, a_out = 1.0, ratio ** 2
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=ratio)
    return Tanh(0.5 * (a_in + a_out), 0.5 * (a_out - a_in), rho_rel * ratio), mode


@pytest.mark.parametrize("method", ["rk", "taylor"])
def test_static_profile_is_exact_plane_wave(method):
    omega = 1.7
    profile = Tanh(omega ** 2, 0.0, 1.0)
    mode = ModeSpec(k=0.0, omega_in=omega, omega_out=omega)
    t0 = -50 * 2 * math.pi / omega
    traj = evolve_mode(profile, mode, t_start=t0, t_end=t0 + 100 * 2 * math.pi / omega,
                       tol=1e-12, method=method, n_samples=501)
    exact = np.exp(-1j * omega * traj.times) / math.sqrt(2 * omega)
    f = np.array([complex(x) for x in traj.f])
    assert np.max(np.abs(f - exact)) * math.sqrt(2 * omega) < 1e-8
    report = extract_bogoliubov(traj, omega)
    assert abs(report.pair.beta) < 1e-8
    assert abs(abs(report.pair.alpha) - 1) < 1e-8


def test_unit_tanh_wronskian_and_extraction(unit_tanh):
    profile, mode = unit_tanh
    traj = evolve_mode(profile, mode, tol=1e-10)
    assert traj.wronskian_drift < 1e-9
    report = extract_bogoliubov(traj, mode.omega_out)
    assert rel(report.pair.particle_number, N_UNIT) < 1e-5
    assert abs(report.pair.normalization_error) < 1e-8
    assert report.convergence_spread < 1e-6


@pytest.mark.parametrize("method", ["rk", "taylor", "auto"])
def test_unit_tanh_tight(unit_tanh, method):
    profile, mode = unit_tanh
    report = solve_mode(profile, mode, tol=1e-12, method=method)
    assert rel(report.pair.particle_number, N_UNIT) < 1e-8


def test_step_profile_matches_sudden_value():
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    report = solve_mode(Step(2.5, 1.5), mode, tol=1e-12)
    assert rel(report.pair.particle_number, 0.125) < 1e-6


def test_step_requires_negative_start():
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    with pytest.raises(PreconditionNotAsymptotic):
        evolve_mode(Step(2.5, 1.5), mode, t_start=0.0, t_end=10.0)
    traj = evolve_mode(Step(2.5, 1.5), mode, t_start=-1e-3, t_end=60.0)
    assert traj.wronskian_drift < 1e-9


def test_start_outside_in_region_rejected(unit_tanh):
    profile, mode = unit_tanh
    with pytest.raises(PreconditionNotAsymptotic):
        evolve_mode(profile, mode, t_start=-5.0, t_end=30.0)
    with pytest.raises(PreconditionNotAsymptotic):
        evolve_mode(profile, mode, t_start=-30.0, t_end=5.0)


def test_mode_inconsistent_with_profile(unit_tanh):
    profile, _ = unit_tanh
    with pytest.raises(ValidationError):
        evolve_mode(profile, ModeSpec(k=0.0, omega_in=1.0, omega_out=3.0))


@pytest.mark.parametrize("tol", [0.0, 1e-15, 1.0, -1e-3])
def test_rk_tolerance_range(unit_tanh, tol):
    profile, mode = unit_tanh
    with pytest.raises(ValidationError):
        evolve_mode(profile, mode, tol=tol, method="rk")


def test_loose_tolerance_not_converged(unit_tanh):
    profile, mode = unit_tanh
    traj = evolve_mode(profile, mode, tol=1e-2, method="rk")
    with pytest.raises(NotConverged):
        extract_bogoliubov(traj, mode.omega_out)


def test_stiff_profile_underflows():
    profile = Tanh(2.5, 1.5, 1e15)
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    with pytest.raises(StepSizeUnderflow):
        evolve_mode(profile, mode, tol=1e-12, method="taylor")


def test_default_span():
    profile, mode = _case(2.0, 0.05)
    assert integration_span(profile, mode) == (-250.0, 250.0)
    profile, mode = _case(2.0, 10.0)
    lo, hi = integration_span(profile, mode)
    assert hi == -lo == pytest.approx(40 * math.pi)


@pytest.mark.parametrize("ratio", [1.1, math.sqrt(11.0), 10.0])
@pytest.mark.parametrize("rho_rel", [0.1, 1.0, 10.0])
def test_numeric_matches_analytic_grid(ratio, rho_rel):
    profile, mode = _case(ratio, rho_rel)
    report = solve_mode(profile, mode, tol=1e-12)
    assert rel(report.pair.particle_number, particle_number_tanh(mode, profile.rho)) < 1e-5


def test_extraction_windows_agree():
    profile, mode = _case(2.0, 0.5)
    t_end = 50 + 40 * math.pi
    traj = evolve_mode(profile, mode, t_end=t_end, n_samples=4001)
    period = 2 * math.pi / mode.omega_out
    first = int(np.searchsorted(traj.times, 50.0))
    step = int(math.ceil(5 * period / (traj.times[1] - traj.times[0])))
    betas = [abs(bogoliubov_at(traj, i, mode.omega_out)[1]) for i in range(first, traj.times.size, step)]
    assert len(betas) >= 5
    assert max(betas) - min(betas) < 1e-6


def test_halving_tolerance_reduces_error():
    profile, mode = _case(2.0, 0.5)
    ref = particle_number_tanh(mode, profile.rho)
    errs = []
    for tol in (1e-6, 5e-7, 2.5e-7):
        traj = evolve_mode(profile, mode, tol=tol, method="rk")
        errs.append(rel(extract_bogoliubov(traj, mode.omega_out, strict=False).pair.particle_number, ref))
    assert errs[0] > errs[1] > errs[2]


def test_tabulated_profile_close_to_tanh(unit_tanh):
    profile, mode = unit_tanh
    tab = tabulate(profile, np.linspace(-30, 30, 6001))
    report = solve_mode(tab, mode, tol=1e-10, method="rk")
    assert rel(report.pair.particle_number, N_UNIT) < 1e-3


def test_spectrum_batch_over_rates():
    mode = ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)
    for rho_rel in (0.5, 1, 2, 4, 8):
        (record,) = spectrum_numeric(Tanh(2.5, 1.5, rho_rel * 2.0), [mode])
        assert record.status == "ok"
        assert record.rel_diff < 1e-5


def test_spectrum_batch_edge_cases(unit_tanh):
    profile, mode = unit_tanh
    assert spectrum_numeric(profile, []) == []
    bad = ModeSpec(k=0.0, omega_in=1.0, omega_out=3.0)
    records = spectrum_numeric(profile, [mode, bad, mode])
    assert records[0].status == records[2].status == "ok"
    assert records[1].status.startswith("ValidationError")
    assert records[1].n_numeric is None and records[1].rel_diff is None
    assert records[0].n_numeric == records[2].n_numeric


def test_spectrum_parallel_equals_serial():
    modes = [ModeSpec.from_asymptotics(k, 1.0, 4.0) for k in (0.0, 0.5, 1.0)]
    profile = Tanh(2.5, 1.5, 3.0)
    assert spectrum_numeric(profile, modes, jobs=1) == spectrum_numeric(profile, modes, jobs=3)
