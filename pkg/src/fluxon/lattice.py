"""The discrete chain of N SQUID-shunted cells.

The linearised chain has normal modes with the exact lattice dispersion
``w^2 = (4/(L_0 C)) sin^2(k'a/2) + 1/(L_J C)``; the continuum limit replaces
``sin(x)`` by ``x``. Because the flux bias is one global signal, every
normal mode sees the same time-dependent mass term and evolves on its own.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import ModeSpec
from .constants import PHI0
from .errors import InfeasibleProfile, StepSizeUnderflow, ValidationError
from .modesolver import (
    DEFAULT_SAMPLES,
    ExtractionReport,
    ModeTrajectory,
    extract_bogoliubov,
    integration_span,
    solve_mode,
)
from .params import CircuitParams, effective_mass_sq, flux_for_mass_sq
from .scalefactor import ScaleFactorProfile, Tabulated, Tanh, asymptotics, evaluate

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class LatticeSpec:
    """A chain of ``n_cells`` identical cells.

    Periodic chains carry ``k'_j = 2 pi j / (N a)``; open chains with
    current-free ends carry cosine modes ``k'_j = pi j / (N a)``. In both
    cases ``j = 0..N-1``.
    """

    n_cells: int
    circuit: CircuitParams
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValidationError(f"n_cells must be an integer >= 2, got {self.n_cells!r}")
        if self.boundary not in BOUNDARIES:
            raise ValidationError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def mode_indices(self) -> range:
        return range(self.n_cells)

    def wavenumber(self, j: int) -> float:
        if j not in self.mode_indices:
            raise ValidationError(f"mode index {j!r} outside 0..{self.n_cells - 1}")
        length = self.n_cells * self.circuit.cell_length
        factor = 2.0 if self.boundary == "periodic" else 1.0
        return factor * math.pi * j / length

    def wavenumbers(self) -> np.ndarray:
        return np.array([self.wavenumber(j) for j in self.mode_indices])

    def k_term_sq(self, j: int, dispersion: str = "exact") -> float:
        """Wave-number part of ``w_j^2`` in rad^2/s^2."""
        c = self.circuit
        x = self.wavenumber(j) * c.cell_length
        if dispersion == "exact":
            return 4.0 / (c.cell_inductance * c.total_capacitance) * math.sin(x / 2) ** 2
        if dispersion == "continuum":
            return c.wave_speed_sq * self.wavenumber(j) ** 2
        raise ValidationError(f"dispersion must be 'exact' or 'continuum', got {dispersion!r}")

    def stiffness_matrix(self) -> np.ndarray:
        """Node-space coupling ``K`` with ``C Phi'' = -(K/L_0) Phi - Phi/L_J``, divided by C."""
        n = self.n_cells
        lap = np.zeros((n, n))
        for i in range(n):
            if self.boundary == "periodic":
                lap[i, i] += 2.0
                lap[i, (i + 1) % n] -= 1.0
                lap[i, (i - 1) % n] -= 1.0
            else:
                for nb in (i - 1, i + 1):
                    if 0 <= nb < n:
                        lap[i, i] += 1.0
                        lap[i, nb] -= 1.0
        c = self.circuit
        return lap / (c.cell_inductance * c.total_capacitance)


def dispersion_exact(lattice: LatticeSpec, flux: float, j: int) -> float:
    """Normal-mode angular frequency of the discrete chain (rad/s)."""
    return math.sqrt(lattice.k_term_sq(j, "exact") + effective_mass_sq(lattice.circuit, flux))


def dispersion_continuum(lattice: LatticeSpec, flux: float, j: int) -> float:
    """Long-wavelength approximation to :func:`dispersion_exact`."""
    return math.sqrt(lattice.k_term_sq(j, "continuum") + effective_mass_sq(lattice.circuit, flux))


def dispersion_table(lattice: LatticeSpec, flux: float) -> list[tuple[int, float, float, float]]:
    """Rows ``(j, k', w_exact, w_continuum)`` for every mode."""
    return [
        (j, lattice.wavenumber(j), dispersion_exact(lattice, flux, j),
         dispersion_continuum(lattice, flux, j))
        for j in lattice.mode_indices
    ]


@dataclass(frozen=True, eq=False)
class DriveSchedule:
    times: np.ndarray  # s
    flux: np.ndarray  # Wb
    feasible: bool
    max_arccos_arg: float
    min_arccos_arg: float

    def mass_sq(self, circuit: CircuitParams) -> np.ndarray:
        return np.array([effective_mass_sq(circuit, phi) for phi in self.flux])

    def to_profile(self, circuit: CircuitParams) -> Tabulated:
        """Scale factor relative to the circuit maximum, ``a^2 = m^2 a^2 / max``.

        Pair it with ``mass = circuit.max_mass_frequency``.
        """
        if not self.feasible:
            raise InfeasibleProfile("cannot build a profile from an infeasible schedule",
                                    max_mass_sq=circuit.max_mass_sq)
        values = self.mass_sq(circuit) / circuit.max_mass_sq
        return Tabulated(tuple(self.times), tuple(values))


def _schedule_span(profile, mass, span):
    if span is not None:
        return span
    if isinstance(profile, Tabulated):
        return profile.t_min, profile.t_max
    w_min = mass * math.sqrt(min(asymptotics(profile)))
    probe = ModeSpec(k=0.0, omega_in=w_min, omega_out=w_min)
    return integration_span(profile, probe)


def schedule_from_profile(lattice: LatticeSpec, profile: ScaleFactorProfile, mass: float,
                          sample_rate: float, span: Optional[tuple[float, float]] = None,
                          strict: bool = True) -> DriveSchedule:
    """Sample the flux waveform that realises ``mass**2 * a^2(t)`` on the chain.

    Times are in seconds and ``profile`` rates in rad/s. The default span is
    the modesolver span for the slowest (``k = 0``) mode. With
    ``strict=False`` an infeasible schedule is returned with
    ``feasible=False`` and NaN flux at the offending samples instead of
    raising.
    """
    if not sample_rate > 0:
        raise ValidationError("sample_rate must be positive")
    if isinstance(profile, Tanh) and sample_rate <= 10 * profile.rho / (2 * math.pi):
        raise ValidationError(
            f"sample_rate {sample_rate:.6g} Hz does not resolve the ramp; need > "
            f"{10 * profile.rho / (2 * math.pi):.6g} Hz"
        )
    t0, t1 = _schedule_span(profile, mass, span)
    n = int(math.ceil((t1 - t0) * sample_rate)) + 1
    times = np.linspace(t0, t1, max(n, 4))
    circuit = lattice.circuit
    target = mass ** 2 * np.asarray(evaluate(profile, times), dtype=float)
    arg = target / circuit.max_mass_sq
    ok = (arg > 0) & (arg <= 1.0 + 1e-12)
    feasible = bool(np.all(ok))
    if not feasible and strict:
        bad = times[~ok]
        raise InfeasibleProfile(
            f"schedule needs arccos argument up to {arg.max():.6g} between t = {bad[0]:.6g} s "
            f"and {bad[-1]:.6g} s; maximal feasible m^2 a^2 is {circuit.max_mass_sq:.6g} rad^2/s^2",
            max_mass_sq=circuit.max_mass_sq,
            time_range=(float(bad[0]), float(bad[-1])),
        )
    flux = np.full(times.shape, np.nan)
    if np.any(ok):
        flux[ok] = flux_for_mass_sq(circuit, target[ok])
    return DriveSchedule(times=times, flux=flux, feasible=feasible,
                         max_arccos_arg=float(min(arg.max(), 1.0) if feasible else arg.max()),
                         min_arccos_arg=float(arg.min()))


def write_schedule_csv(schedule: DriveSchedule, path, header_lines: Sequence[str] = ()) -> None:
    from .io import format_float

    with Path(path).open("w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_s", "flux_ext_Wb"])
        for t, phi in zip(schedule.times, schedule.flux):
            writer.writerow([format_float(t), format_float(phi)])


def read_schedule_csv(path) -> DriveSchedule:
    times, flux = [], []
    with Path(path).open(newline="") as fh:
        rows = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        header = next(rows)
        if [h.strip() for h in header[:2]] != ["time_s", "flux_ext_Wb"]:
            raise ValidationError(f"{path}: expected header 'time_s,flux_ext_Wb', got {header!r}")
        for row in rows:
            if row:
                times.append(float(row[0]))
                flux.append(float(row[1]))
    times = np.array(times)
    flux = np.array(flux)
    finite = np.isfinite(flux)
    args = np.abs(np.cos(np.pi * flux[finite] / PHI0))
    feasible = bool(np.all(finite) and np.all(args > 0))
    return DriveSchedule(times=times, flux=flux, feasible=feasible,
                         max_arccos_arg=float(args.max()) if args.size else math.nan,
                         min_arccos_arg=float(args.min()) if args.size else math.nan)


def _require_static_ends(schedule: DriveSchedule, profile: Tabulated) -> None:
    a_in, a_out = asymptotics(profile)
    for label, val, ref in (("start", profile.values[0], a_in), ("end", profile.values[-1], a_out)):
        if abs(val - ref) > 1e-9 * ref:
            raise ValidationError(f"schedule is not static at its {label}")


def lattice_mode(lattice: LatticeSpec, profile: Tabulated, j: int,
                 dispersion: str = "exact") -> ModeSpec:
    """ModeSpec of chain mode ``j`` under a schedule-derived profile (SI)."""
    a_in, a_out = asymptotics(profile)
    return ModeSpec.from_asymptotics(
        k=math.sqrt(lattice.k_term_sq(j, dispersion)), a2_in=a_in, a2_out=a_out,
        mass=lattice.circuit.max_mass_frequency,
    )


def chain_evolution(lattice: LatticeSpec, schedule: DriveSchedule,
                    modes: Optional[Sequence[int]] = None, tol: float = 1e-12,
                    windows: int = 8, method: str = "auto",
                    dispersion: str = "exact") -> dict[int, ExtractionReport]:
    """Bogoliubov pairs of the chain's normal modes under a uniform flux drive.

    Each mode starts in its own in-vacuum. A spatially uniform drive keeps
    the normal modes decoupled, so every mode is a single oscillator with
    ``w_j^2(t) = k-term_j + m^2 a^2(t)``.
    """
    if not schedule.feasible:
        raise InfeasibleProfile("schedule is infeasible", max_mass_sq=lattice.circuit.max_mass_sq)
    profile = schedule.to_profile(lattice.circuit)
    _require_static_ends(schedule, profile)
    indices = list(lattice.mode_indices if modes is None else modes)
    return {
        j: solve_mode(profile, lattice_mode(lattice, profile, j, dispersion), tol=tol,
                      windows=windows, method=method)
        for j in indices
    }


def chain_brute_force(lattice: LatticeSpec, schedule: DriveSchedule, j: int, tol: float = 1e-12,
                      windows: int = 8,
                      n_samples: int = DEFAULT_SAMPLES) -> tuple[ExtractionReport, float]:
    """Integrate all N node fluxes together, starting from mode ``j``'s in-state.

    Meant for small N as an oracle for :func:`chain_evolution`. The normal
    modes come from a numerical eigendecomposition of the node coupling
    matrix, not from the dispersion formula. Returns the extraction report
    for mode ``j`` and the largest ``|beta|`` leaked into any other mode.
    """
    circuit = lattice.circuit
    profile = schedule.to_profile(circuit)
    w_ref = circuit.max_mass_frequency
    stiff = lattice.stiffness_matrix() / w_ref ** 2
    evals, evecs = np.linalg.eigh(stiff)
    # match the eigenvector to mode j through its eigenvalue
    target = lattice.k_term_sq(j, "exact") / w_ref ** 2
    col = int(np.argmin(np.abs(evals - target)))
    a_in, a_out = asymptotics(profile)
    w_in = np.sqrt(np.clip(evals, 0, None) + a_in)
    w_out = np.sqrt(np.clip(evals, 0, None) + a_out)

    interp = profile.interpolant
    s0, s1 = profile.t_min * w_ref, profile.t_max * w_ref
    n = lattice.n_cells

    def rhs(s, y):
        phi = y[:n] + 1j * y[n:2 * n]
        dphi = y[2 * n:3 * n] + 1j * y[3 * n:]
        m2 = float(interp(min(max(s / w_ref, profile.t_min), profile.t_max)))
        acc = -(stiff @ phi) - m2 * phi
        return np.concatenate([dphi.real, dphi.imag, acc.real, acc.imag])

    u = evecs[:, col]
    w0 = w_in[col]
    f0 = np.exp(-1j * w0 * s0) / math.sqrt(2 * w0)
    phi0 = u * f0
    dphi0 = u * (-1j * w0 * f0)
    y0 = np.concatenate([phi0.real, phi0.imag, dphi0.real, dphi0.imag])
    t_eval = np.linspace(s0, s1, n_samples)
    sol = solve_ivp(rhs, (s0, s1), y0, method="DOP853", rtol=tol, atol=tol * 1e-2, t_eval=t_eval)
    if sol.status != 0:
        raise StepSizeUnderflow(f"coupled chain integration failed: {sol.message}")
    phi = sol.y[:n] + 1j * sol.y[n:2 * n]
    dphi = sol.y[2 * n:3 * n] + 1j * sol.y[3 * n:]
    q = evecs.T @ phi
    dq = evecs.T @ dphi

    leak = 0.0
    for other in range(n):
        if other == col:
            continue
        wl = w_out[other]
        beta = math.sqrt(wl / 2) * np.exp(-1j * wl * sol.t[-1]) * (q[other, -1] - 1j * dq[other, -1] / wl)
        alpha = math.sqrt(wl / 2) * np.exp(1j * wl * sol.t[-1]) * (q[other, -1] + 1j * dq[other, -1] / wl)
        leak = max(leak, float(abs(alpha)), float(abs(beta)))

    # back to seconds so the trajectory lines up with the profile
    mode = ModeSpec(k=math.sqrt(max(evals[col], 0.0)) * w_ref, omega_in=w_in[col] * w_ref,
                    omega_out=w_out[col] * w_ref)
    traj = ModeTrajectory(
        times=sol.t / w_ref,
        f=q[col] / math.sqrt(w_ref),
        fdot=dq[col] * math.sqrt(w_ref),
        wronskian_drift=float(np.max(np.abs(2 * np.imag(q[col] * np.conj(dq[col])) - 1))),
        profile=profile,
        mode=mode,
    )
    return extract_bogoliubov(traj, mode.omega_out, windows), leak
