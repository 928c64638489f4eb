"""Circuit parameters of the dc-SQUID transmission line and their mapping
onto the field-theory mode equation.

Everything in this module is SI. The mass term of a normal mode is the
squared angular frequency ``1/(L_J C)`` set by the SQUID kinetic inductance;
with the convention ``m = 1`` that product carries the whole scale factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import ModeSpec
from .constants import PHI0
from .errors import DegenerateJunction, InfeasibleProfile, ValidationError
from .scalefactor import ScaleFactorProfile, evaluate

# |cos(pi Phi/Phi0)| below this is treated as a zero of E_J
_COS_FLOOR = 4 * np.finfo(float).eps
_ARG_SLACK = 1e-12


class ContinuumWarning(UserWarning):
    """Wavelength is not long compared with the cell length (k' a >= 1)."""


@dataclass(frozen=True)
class CircuitParams:
    """Component values of one unit cell.

    ``junction_capacitance`` is the capacitance of the effective single
    junction, i.e. the sum of the two SQUID junctions.
    """

    critical_current: float  # A
    junction_capacitance: float  # F
    ground_capacitance: float  # F
    cell_inductance: float  # H
    cell_length: float  # m

    def __post_init__(self):
        for name in ("critical_current", "junction_capacitance", "ground_capacitance",
                     "cell_inductance", "cell_length"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a finite positive number, got {value!r}")

    @property
    def total_capacitance(self) -> float:
        return self.ground_capacitance + self.junction_capacitance

    @property
    def josephson_energy(self) -> float:
        """Single-junction Josephson energy Phi0 I_c / 2pi (J)."""
        return PHI0 * self.critical_current / (2 * math.pi)

    @property
    def min_kinetic_inductance(self) -> float:
        """L_J at zero flux, Phi0 / (4 pi I_c)."""
        return PHI0 / (4 * math.pi * self.critical_current)

    @property
    def max_mass_sq(self) -> float:
        """Largest reachable mass term 1/(L_J,min C) in rad^2/s^2."""
        return 1.0 / (self.min_kinetic_inductance * self.total_capacitance)

    @property
    def max_mass_frequency(self) -> float:
        return math.sqrt(self.max_mass_sq)

    @property
    def wave_speed_sq(self) -> float:
        """a^2 / (L_0 C), the coefficient of k'^2 in the continuum dispersion."""
        return self.cell_length ** 2 / (self.cell_inductance * self.total_capacitance)

    def to_dict(self) -> dict:
        return {
            "critical_current": self.critical_current,
            "junction_capacitance": self.junction_capacitance,
            "ground_capacitance": self.ground_capacitance,
            "cell_inductance": self.cell_inductance,
            "cell_length": self.cell_length,
        }


#: Component values used for the feasibility estimate with I_c = 1 uA.
REFERENCE_CIRCUIT = CircuitParams(
    critical_current=1e-6,
    junction_capacitance=0.5e-15,
    ground_capacitance=0.1e-12,
    cell_inductance=0.25e-9,
    cell_length=15e-6,
)


@dataclass(frozen=True)
class JosephsonState:
    external_flux: float  # Wb
    josephson_energy: float  # J, effective SQUID value
    kinetic_inductance: float  # H


def josephson_state(circuit: CircuitParams, flux: float) -> JosephsonState:
    """Effective single-junction state of a SQUID threaded by ``flux``.

    Raises
    ------
    DegenerateJunction
        If ``cos(pi flux / Phi0)`` vanishes, so that L_J is infinite.
    """
    c = abs(math.cos(math.pi * flux / PHI0))
    if c <= _COS_FLOOR:
        raise DegenerateJunction(
            f"flux {flux:.6g} Wb is a zero of the SQUID Josephson energy (cos = {c:.3g})"
        )
    e_j = 2.0 * circuit.josephson_energy * c
    l_j = (PHI0 / (2 * math.pi)) ** 2 / e_j
    return JosephsonState(external_flux=flux, josephson_energy=e_j, kinetic_inductance=l_j)


def effective_mass_sq(circuit: CircuitParams, flux: float) -> float:
    """Mass term m^2 a^2 = 1/(L_J C) produced by the flux bias (rad^2/s^2)."""
    state = josephson_state(circuit, flux)
    return 1.0 / (state.kinetic_inductance * circuit.total_capacitance)


def flux_for_mass_sq(circuit: CircuitParams, mass_sq) -> np.ndarray:
    """Invert :func:`effective_mass_sq` on the principal branch [0, Phi0/2).

    Vectorised over ``mass_sq``. Raises :class:`InfeasibleProfile` when any
    requested value is non-positive or above the zero-flux maximum.
    """
    mass_sq = np.asarray(mass_sq, dtype=float)
    arg = mass_sq / circuit.max_mass_sq
    # a target of exactly the maximum may round to 1 + few ulp
    arg = np.where((arg > 1.0) & (arg <= 1.0 + _ARG_SLACK), 1.0, arg)
    bad = ~((arg > 0) & (arg <= 1.0))
    if np.any(bad):
        worst = float(np.max(arg[bad])) if np.any(arg[bad] > 1) else float(np.min(arg[bad]))
        raise InfeasibleProfile(
            f"arccos argument {worst:.6g} outside (0, 1]; maximal feasible m^2 a^2 is "
            f"{circuit.max_mass_sq:.6g} rad^2/s^2",
            max_mass_sq=circuit.max_mass_sq,
        )
    return PHI0 / math.pi * np.arccos(arg)


def drive_waveform(circuit: CircuitParams, profile: ScaleFactorProfile, mass: float,
                   times: Sequence[float]) -> np.ndarray:
    """Flux-bias samples that realise ``mass**2 * a^2(t)`` at each time.

    ``mass`` is in rad/s and ``times`` in seconds, so the profile's rate
    must be given in rad/s as well.
    """
    times = np.asarray(times, dtype=float)
    target = mass ** 2 * np.array([evaluate(profile, t) for t in times])
    try:
        return flux_for_mass_sq(circuit, target)
    except InfeasibleProfile as exc:
        arg = target / circuit.max_mass_sq
        bad = ~((arg > 0) & (arg <= 1.0))
        exc.time_range = (float(times[bad][0]), float(times[bad][-1]))
        raise


def mode_from_circuit(circuit: CircuitParams, wavenumber: float, flux_in: float,
                      flux_out: float) -> ModeSpec:
    """Continuum normal mode of wavenumber ``wavenumber`` (rad/m).

    The returned :class:`ModeSpec` is in SI angular frequencies: its ``k`` is
    the wave-number contribution ``a k' / sqrt(L_0 C)`` and the mass terms
    come from the two flux biases.
    """
    ka = abs(wavenumber) * circuit.cell_length
    if ka >= 1.0:
        warnings.warn(
            f"k'a = {ka:.3g} >= 1: continuum dispersion is outside its long-wavelength regime",
            ContinuumWarning,
            stacklevel=2,
        )
    k_sq = circuit.wave_speed_sq * wavenumber ** 2
    w_in = math.sqrt(k_sq + effective_mass_sq(circuit, flux_in))
    w_out = math.sqrt(k_sq + effective_mass_sq(circuit, flux_out))
    return ModeSpec(k=math.sqrt(k_sq), omega_in=w_in, omega_out=w_out)


@dataclass(frozen=True)
class CircuitMode:
    """A (k', flux_in, flux_out) assignment realising given in/out frequencies."""

    wavenumber: float  # rad/m
    flux_in: float  # Wb
    flux_out: float  # Wb
    mode: ModeSpec


def solve_circuit_mode(circuit: CircuitParams, omega_in: float, omega_out: float,
                       flux_out: float = 0.0) -> CircuitMode:
    """Find k' and flux_in so that a mode has frequencies ``omega_in -> omega_out``.

    ``flux_out`` fixes the out-region mass term; the wave-number term then
    absorbs whatever ``omega_out`` needs beyond it, and ``flux_in`` is chosen
    to supply the remaining in-region mass.
    """
    m_out_sq = effective_mass_sq(circuit, flux_out)
    k_sq = omega_out ** 2 - m_out_sq
    if k_sq < 0:
        raise InfeasibleProfile(
            f"omega_out = {omega_out:.6g} rad/s is below the mass gap {math.sqrt(m_out_sq):.6g} "
            "set by flux_out",
            max_mass_sq=circuit.max_mass_sq,
        )
    m_in_sq = omega_in ** 2 - k_sq
    flux_in = float(flux_for_mass_sq(circuit, m_in_sq))
    wavenumber = math.sqrt(k_sq / circuit.wave_speed_sq)
    mode = mode_from_circuit(circuit, wavenumber, flux_in, flux_out)
    return CircuitMode(wavenumber=wavenumber, flux_in=flux_in, flux_out=flux_out, mode=mode)
