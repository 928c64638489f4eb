"""Physical constants (CODATA 2018 exact or recommended values)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    flux_quantum: float = 2.067833848e-15  # Wb, h/2e
    reduced_planck: float = 1.054571817e-34  # J s
    boltzmann: float = 1.380649e-23  # J/K


CONSTANTS = PhysicalConstants()

PHI0 = CONSTANTS.flux_quantum
HBAR = CONSTANTS.reduced_planck
KB = CONSTANTS.boltzmann
