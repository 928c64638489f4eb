"""Closed-form particle creation for the tanh expansion.

For ``a^2(t) = A + B tanh(rho t)`` the mode equation is solvable in
hypergeometric functions and the Bogoliubov coefficients reduce to ratios
of Gamma functions of imaginary argument. These are evaluated in the log
domain because ``|Gamma(i y)|`` underflows for ``y`` of order a few hundred.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .constants import HBAR, KB
from .errors import PoleError, ValidationError

_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

# B_{2k} / (2k (2k-1)) for k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# recurrence shifts Re z up to at least this before the asymptotic series
_STIRLING_MIN_RE = 15.0


def log_gamma_complex(z) -> complex:
    """Principal branch of log Gamma(z).

    The branch cut runs along the negative real axis and the function is
    continuous from the positive reals, so ``exp(log_gamma_complex(z))``
    is ``Gamma(z)`` while the imaginary part is not reduced modulo 2 pi.
    Uses upward recurrence to ``Re z >= 15`` followed by an eight-term
    Stirling series; relative accuracy is about 1e-15 for the arguments
    used here and better than 1e-12 up to ``|Im z| = 1e4``.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"Gamma has a pole at z = {z.real:g}")

    shift = 0
    if z.real < _STIRLING_MIN_RE:
        shift = math.ceil(_STIRLING_MIN_RE - z.real)
    w = z + shift

    inv = 1.0 / w
    inv2 = inv * inv
    series = 0j
    for c in reversed(_STIRLING):
        series = series * inv2 + c
    result = (w - 0.5) * cmath.log(w) - w + _HALF_LOG_2PI + series * inv

    if shift:
        result -= sum(cmath.log(z + j) for j in range(shift))
    return result


@dataclass(frozen=True)
class ModeSpec:
    """One field mode, passed around as its in/out angular frequencies.

    ``k`` is the frequency-like wave-number term whose square adds to the
    mass term, i.e. ``omega^2 = k^2 + m^2 a^2``.
    """

    k: float
    omega_in: float
    omega_out: float

    def __post_init__(self):
        for name in ("k", "omega_in", "omega_out"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.omega_in <= 0 or self.omega_out <= 0:
            raise ValidationError(
                f"frequencies must be positive, got omega_in={self.omega_in!r}, "
                f"omega_out={self.omega_out!r}"
            )
        k_sq = self.k * self.k
        for name in ("omega_in", "omega_out"):
            w = getattr(self, name)
            if w * w - k_sq < -1e-12 * w * w:
                raise ValidationError(f"{name}^2 < k^2: negative mass term")

    @classmethod
    def from_asymptotics(cls, k: float, a2_in: float, a2_out: float, mass: float = 1.0):
        m2 = mass * mass
        return cls(k=k, omega_in=math.sqrt(k * k + m2 * a2_in),
                   omega_out=math.sqrt(k * k + m2 * a2_out))

    @property
    def omega_plus(self) -> float:
        return 0.5 * (self.omega_out + self.omega_in)

    @property
    def omega_minus(self) -> float:
        return 0.5 * (self.omega_out - self.omega_in)


@dataclass(frozen=True)
class BogoliubovPair:
    alpha: complex
    beta: complex

    @property
    def particle_number(self) -> float:
        return abs(self.beta) ** 2

    @property
    def normalization_error(self) -> float:
        """``|alpha|^2 - |beta|^2 - 1``; zero for a canonical transformation."""
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0


def _check_rho(rho: float) -> None:
    if not (math.isfinite(rho) and rho > 0):
        raise ValidationError(f"rho must be positive, got {rho!r}")


def bogoliubov_tanh(mode: ModeSpec, rho: float) -> BogoliubovPair:
    """Exact (alpha, beta) for the tanh profile with rate ``rho``.

    Phases follow the convention that in- and out-modes are plane waves
    ``exp(-i omega t) / sqrt(2 omega)`` referenced to ``t = 0``. At
    ``omega_in == omega_out`` the expression for beta is 0/0; the limit
    ``alpha = 1, beta = 0`` is returned.
    """
    _check_rho(rho)
    if mode.omega_in == mode.omega_out:
        return BogoliubovPair(alpha=1.0 + 0j, beta=0j)
    y_in = mode.omega_in / rho
    y_out = mode.omega_out / rho
    y_plus = mode.omega_plus / rho
    y_minus = mode.omega_minus / rho
    prefactor = 0.5 * math.log(mode.omega_out / mode.omega_in)
    common = prefactor + log_gamma_complex(complex(1.0, -y_in))

    log_alpha = (common + log_gamma_complex(complex(0.0, -y_out))
                 - log_gamma_complex(complex(0.0, -y_plus))
                 - log_gamma_complex(complex(1.0, -y_plus)))
    log_beta = (common + log_gamma_complex(complex(0.0, y_out))
                - log_gamma_complex(complex(0.0, y_minus))
                - log_gamma_complex(complex(1.0, y_minus)))
    return BogoliubovPair(alpha=cmath.exp(log_alpha), beta=cmath.exp(log_beta))


def _log_sinh(x: float) -> float:
    if x > 30.0:
        return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


def particle_number_tanh(mode: ModeSpec, rho: float) -> float:
    """Mean number of quanta created in the mode, ``|beta|^2``, from the sinh form."""
    _check_rho(rho)
    w_minus = abs(mode.omega_minus)
    if w_minus == 0.0:
        return 0.0
    x = math.pi / rho
    log_n = (2.0 * _log_sinh(x * w_minus)
             - _log_sinh(x * mode.omega_in)
             - _log_sinh(x * mode.omega_out))
    return math.exp(log_n)


def particle_number_sudden(mode: ModeSpec) -> float:
    """Particle number for an instantaneous jump of the mass term."""
    dw = mode.omega_out - mode.omega_in
    return dw * dw / (4.0 * mode.omega_in * mode.omega_out)


def effective_temperature(n: float, omega: float) -> float:
    """Per-mode energy ``n hbar omega`` expressed in kelvin.

    An order-of-magnitude figure for comparison with the refrigerator
    temperature, not a thermodynamic temperature.
    """
    if not n >= 0:
        raise ValidationError(f"particle number must be non-negative, got {n!r}")
    if not omega > 0:
        raise ValidationError(f"omega must be positive, got {omega!r}")
    return n * HBAR * omega / KB
