"""Particle creation in a flux-driven dc-SQUID transmission line.

Analytic Bogoliubov coefficients for the tanh scale factor, a numerical
mode-function solver that cross-checks them, and the mapping onto circuit
parameters and flux-bias drive waveforms.
"""

from .analytic import (
    BogoliubovPair,
    ModeSpec,
    bogoliubov_tanh,
    effective_temperature,
    log_gamma_complex,
    particle_number_sudden,
    particle_number_tanh,
)
from .constants import CONSTANTS, HBAR, KB, PHI0, PhysicalConstants
from .errors import (
    DegenerateJunction,
    FluxonError,
    InfeasibleProfile,
    NotConverged,
    OutOfRange,
    PoleError,
    PreconditionNotAsymptotic,
    StepSizeUnderflow,
    ValidationError,
)
from .lattice import (
    DriveSchedule,
    LatticeSpec,
    chain_brute_force,
    chain_evolution,
    dispersion_continuum,
    dispersion_exact,
    read_schedule_csv,
    schedule_from_profile,
    write_schedule_csv,
)
from .modesolver import (
    ExtractionReport,
    ModeTrajectory,
    evolve_mode,
    extract_bogoliubov,
    solve_mode,
    spectrum_numeric,
)
from .params import (
    REFERENCE_CIRCUIT,
    CircuitMode,
    CircuitParams,
    ContinuumWarning,
    drive_waveform,
    effective_mass_sq,
    flux_for_mass_sq,
    josephson_state,
    mode_from_circuit,
    solve_circuit_mode,
)
from .records import SpectrumRecord
from .scalefactor import Step, Tabulated, Tanh, asymptotics, evaluate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
