"""Numerical mode functions and late-time Bogoliubov extraction.

A mode starts as the positive-frequency in-state
``f = exp(-i w_in t) / sqrt(2 w_in)`` deep in the past, is integrated
through ``f'' + (k^2 + m^2 a^2(t)) f = 0``, and is projected onto out-region
plane waves. Two integrators are available:

``"rk"``
    scipy's DOP853 (8th order with embedded 5th/3rd order error estimates
    and dense output) on four real components.
``"taylor"``
    arbitrary-precision Taylor series, for coefficients below the
    double-precision floor.

``"auto"`` (used by :func:`solve_mode`) runs ``rk`` and falls back to
``taylor`` when the run's own error estimate cannot resolve ``|beta|^2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from . import _taylor
from .analytic import BogoliubovPair, ModeSpec, particle_number_sudden, particle_number_tanh
from .errors import (
    FluxonError,
    NotConverged,
    PreconditionNotAsymptotic,
    StepSizeUnderflow,
    ValidationError,
)
from .records import SpectrumRecord
from .scalefactor import ScaleFactorProfile, Step, Tabulated, Tanh, asymptotics, breakpoints, evaluate

ASYMPTOTIC_TOL = 1e-12
SPREAD_LIMIT = 1e-6
DEFAULT_SAMPLES = 2001
# fallback threshold on the estimated relative error of |beta|^2
AUTO_REL_TARGET = 1e-7


@dataclass(frozen=True, eq=False)
class ModeTrajectory:
    """Sampled mode function.

    For ``method == "taylor"`` the ``f`` and ``fdot`` arrays hold
    :class:`mpmath.mpc` objects computed at ``precision_digits``.
    """

    times: np.ndarray
    f: np.ndarray
    fdot: np.ndarray
    wronskian_drift: float
    profile: ScaleFactorProfile = field(repr=False)
    mode: ModeSpec = field(repr=False)
    method: str = "rk"
    precision_digits: Optional[int] = None


@dataclass(frozen=True)
class ExtractionReport:
    pair: BogoliubovPair
    convergence_spread: float
    t_start: float
    t_end: float
    wronskian_drift: float = 0.0
    method: str = "rk"


def integration_span(profile: ScaleFactorProfile, mode: ModeSpec) -> tuple[float, float]:
    """Default ``(t_start, t_end)``: ``+-max(25/rho, 20 in-periods)``."""
    if isinstance(profile, Tabulated):
        return profile.t_min, profile.t_max
    periods = 20 * 2 * math.pi / mode.omega_in
    half = max(25.0 / profile.rho, periods) if isinstance(profile, Tanh) else periods
    return -half, half


def mass_sq_for(profile: ScaleFactorProfile, mode: ModeSpec) -> float:
    """The ``m^2`` that makes ``mode`` consistent with ``profile``'s asymptotes."""
    a_in, a_out = asymptotics(profile)
    k_sq = mode.k * mode.k
    m_sq = (mode.omega_in ** 2 - k_sq) / a_in
    predicted = k_sq + m_sq * a_out
    if abs(predicted - mode.omega_out ** 2) > 1e-9 * mode.omega_out ** 2:
        raise ValidationError(
            f"mode (omega_in={mode.omega_in:.6g}, omega_out={mode.omega_out:.6g}) is inconsistent "
            f"with profile asymptotes ({a_in:.6g}, {a_out:.6g}) for any single mass"
        )
    return m_sq


def _check_asymptotic(profile, t_start, t_end):
    if t_end <= t_start:
        raise ValidationError("t_end must exceed t_start")
    if isinstance(profile, Step):
        if t_start >= 0:
            raise PreconditionNotAsymptotic("a step profile needs t_start < 0")
        if t_end < 0:
            raise PreconditionNotAsymptotic("a step profile needs t_end >= 0")
        return
    a_in, a_out = asymptotics(profile)
    for label, t, ref in (("t_start", t_start, a_in), ("t_end", t_end, a_out)):
        dev = abs(evaluate(profile, t) - ref)
        if dev >= ASYMPTOTIC_TOL * ref:
            raise PreconditionNotAsymptotic(
                f"a^2({label}={t:.6g}) deviates from its asymptote by {dev / ref:.3g} relative"
            )


def frequency_coefficients(profile, mode, num=float):
    """Coefficients of the squared frequency ``W(t)`` in arithmetic ``num``.

    Tanh: ``(c0, c1)`` with ``W = c0 + c1 tanh(rho t)``; Step: ``(W_in, W_out)``;
    Tabulated: ``(k^2, m^2)`` with ``W = k^2 + m^2 a^2(t)``. The analytic shapes
    are written through ``omega_in`` and ``omega_out`` themselves so that
    ``W`` hits both asymptotes exactly; a residual mismatch would seed a
    spurious negative-frequency component far larger than an exponentially
    small ``beta``.
    """
    w_in2 = num(mode.omega_in) ** 2
    w_out2 = num(mode.omega_out) ** 2
    if isinstance(profile, Tanh):
        return (w_in2 + w_out2) / 2, (w_out2 - w_in2) / 2
    if isinstance(profile, Step):
        return w_in2, w_out2
    a_in, _ = asymptotics(profile)
    k_sq = num(mode.k) ** 2
    return k_sq, (w_in2 - k_sq) / num(a_in)


def _w_callable(profile, mode):
    if isinstance(profile, Tanh):
        c0, c1 = frequency_coefficients(profile, mode)
        rho = profile.rho
        return lambda t: c0 + c1 * math.tanh(rho * t)
    if isinstance(profile, Step):
        lo, hi = frequency_coefficients(profile, mode)
        return lambda t: lo if t < 0 else hi
    k_sq, m_sq = frequency_coefficients(profile, mode)
    interp = profile.interpolant
    t_lo, t_hi = profile.t_min, profile.t_max
    return lambda t: k_sq + m_sq * float(interp(min(max(t, t_lo), t_hi)))


def _evolve_rk(profile, mode, t_start, t_end, times, tol):
    w_in = mode.omega_in
    wsq = _w_callable(profile, mode)

    # g = sqrt(2 w_in) f and p = g'/w_in are O(1)
    def rhs(t, y):
        w = wsq(t) / w_in
        return (w_in * y[2], w_in * y[3], -w * y[0], -w * y[1])

    phase = complex(math.cos(w_in * t_start), -math.sin(w_in * t_start))
    g0, p0 = phase, -1j * phase
    y0 = np.array([g0.real, g0.imag, p0.real, p0.imag])

    cuts = [t_start] + [b for b in breakpoints(profile) if t_start < b < t_end and
                        isinstance(profile, Step)] + [t_end]
    g = np.empty(times.size, dtype=complex)
    p = np.empty(times.size, dtype=complex)
    for a, b in zip(cuts[:-1], cuts[1:]):
        last = b == t_end
        sel = (times >= a) & ((times <= b) if last else (times < b))
        t_eval = np.unique(np.concatenate([times[sel], [b]]))
        sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                        t_eval=t_eval)
        if sol.status != 0:
            raise StepSizeUnderflow(f"DOP853 failed on [{a:.6g}, {b:.6g}]: {sol.message}")
        ys = sol.y
        y0 = ys[:, -1]
        keep = np.isin(sol.t, times[sel])
        g[sel] = ys[0, keep] + 1j * ys[1, keep]
        p[sel] = ys[2, keep] + 1j * ys[3, keep]

    norm = math.sqrt(2 * w_in)
    f = g / norm
    fdot = p * w_in / norm
    drift = float(np.max(np.abs(2.0 * np.imag(f * np.conj(fdot)) - 1.0)))
    return f, fdot, drift


def _precision_for(tol: float) -> int:
    return int(math.ceil(-math.log10(tol))) + 12


def _evolve_taylor(profile, mode, t_start, t_end, times, tol):
    digits = _precision_for(tol)
    with mpmath.workdps(digits):
        w_in = mpmath.mpf(mode.omega_in)
        t0 = mpmath.mpf(t_start)
        f0 = mpmath.exp(mpmath.mpc(0, -1) * w_in * t0) / mpmath.sqrt(2 * w_in)
        fd0 = mpmath.mpc(0, -1) * w_in * f0
        f, fd = _taylor.integrate(
            profile, frequency_coefficients(profile, mode, mpmath.mpf), t_start, t_end, f0, fd0,
            times, breakpoints(profile), tol, max(mode.omega_in, mode.omega_out),
        )
        drift = float(max(abs(2 * mpmath.im(a * mpmath.conj(b)) - 1) for a, b in zip(f, fd)))
    return np.array(f, dtype=object), np.array(fd, dtype=object), drift, digits


def evolve_mode(profile: ScaleFactorProfile, mode: ModeSpec, t_start: Optional[float] = None,
                t_end: Optional[float] = None, tol: float = 1e-12, method: str = "rk",
                n_samples: int = DEFAULT_SAMPLES) -> ModeTrajectory:
    """Integrate the in-state of ``mode`` across ``profile``.

    Parameters
    ----------
    t_start, t_end
        Integration span; defaults to :func:`integration_span`. Both ends
        must lie in the static regions of the profile.
    tol
        Local relative error target. ``rk`` accepts ``1e-14 < tol < 1``;
        ``taylor`` accepts any ``0 < tol < 1`` and sets its working precision
        to about ``-log10(tol) + 12`` digits.
    n_samples
        Number of evenly spaced output samples.

    Raises
    ------
    PreconditionNotAsymptotic
        If an endpoint is not inside the in- or out-region.
    StepSizeUnderflow
        If the integrator cannot meet ``tol``.
    """
    if method not in ("rk", "taylor"):
        raise ValidationError(f"unknown method {method!r}")
    lower = 1e-14 if method == "rk" else 0.0
    if not (lower < tol < 1.0):
        raise ValidationError(f"tol={tol!r} outside ({lower:g}, 1) for method {method!r}")
    default_start, default_end = integration_span(profile, mode)
    t_start = default_start if t_start is None else float(t_start)
    t_end = default_end if t_end is None else float(t_end)
    _check_asymptotic(profile, t_start, t_end)
    mass_sq_for(profile, mode)
    times = np.linspace(t_start, t_end, max(int(n_samples), 2))

    if method == "rk":
        f, fdot, drift = _evolve_rk(profile, mode, t_start, t_end, times, tol)
        digits = None
    else:
        f, fdot, drift, digits = _evolve_taylor(profile, mode, t_start, t_end, times, tol)
    return ModeTrajectory(times=times, f=f, fdot=fdot, wronskian_drift=drift, profile=profile,
                          mode=mode, method=method, precision_digits=digits)


def bogoliubov_at(traj: ModeTrajectory, index: int, omega_out: float) -> tuple[complex, complex]:
    """Instantaneous ``(alpha, beta)`` from sample ``index`` of ``traj``."""
    t = traj.times[index]
    f, fd = traj.f[index], traj.fdot[index]
    if traj.precision_digits is None:
        amp = math.sqrt(omega_out / 2)
        ph = complex(math.cos(omega_out * t), math.sin(omega_out * t))
        alpha = amp * ph * (f + 1j * fd / omega_out)
        beta = amp * ph.conjugate() * (f - 1j * fd / omega_out)
        return complex(alpha), complex(beta)
    with mpmath.workdps(traj.precision_digits):
        w = mpmath.mpf(omega_out)
        amp = mpmath.sqrt(w / 2)
        ph = mpmath.exp(mpmath.mpc(0, 1) * w * mpmath.mpf(t))
        j = mpmath.mpc(0, 1)
        alpha = amp * ph * (f + j * fd / w)
        beta = amp * mpmath.conj(ph) * (f - j * fd / w)
        return complex(alpha), complex(beta)


def extract_bogoliubov(traj: ModeTrajectory, omega_out: float, windows: int = 8,
                       strict: bool = True) -> ExtractionReport:
    """Project the late-time mode function onto out-region plane waves.

    ``windows`` samples spread evenly over the final 10% of the trajectory
    each give an ``(alpha, beta)``; their mean is returned and the range of
    ``|beta|`` across them is the convergence spread.

    Raises
    ------
    NotConverged
        If the spread reaches 1e-6 and ``strict`` is true.
    """
    if windows < 1:
        raise ValidationError("windows must be at least 1")
    times = traj.times
    t0, t1 = times[0], times[-1]
    first = int(np.searchsorted(times, t1 - 0.1 * (t1 - t0)))
    _, a_out = asymptotics(traj.profile)
    if abs(evaluate(traj.profile, times[first]) - a_out) > 1e-9 * a_out:
        raise PreconditionNotAsymptotic("final 10% of the trajectory is not in the out-region")
    idx = np.unique(np.linspace(first, times.size - 1, windows).round().astype(int))
    pairs = [bogoliubov_at(traj, i, omega_out) for i in idx]
    alphas = np.array([a for a, _ in pairs])
    betas = np.array([b for _, b in pairs])
    spread = float(np.abs(betas).max() - np.abs(betas).min())
    if strict and spread >= SPREAD_LIMIT:
        raise NotConverged(f"|beta| varies by {spread:.3g} across extraction windows")
    if traj.precision_digits is None:
        pair = BogoliubovPair(alpha=complex(alphas.mean()), beta=complex(betas.mean()))
    else:
        # the mean of doubles would lose tiny |beta|; the last window is exact enough
        pair = BogoliubovPair(alpha=complex(alphas[-1]), beta=complex(betas[-1]))
    return ExtractionReport(pair=pair, convergence_spread=spread, t_start=float(t0),
                            t_end=float(t1), wronskian_drift=traj.wronskian_drift,
                            method=traj.method)


def _resolves(report: ExtractionReport, tol: float) -> bool:
    beta = abs(report.pair.beta)
    noise = max(report.wronskian_drift, report.convergence_spread, tol)
    return beta > 0 and 2.0 * noise / beta < AUTO_REL_TARGET


def _is_static(profile) -> bool:
    if isinstance(profile, Tabulated):
        values = np.asarray(profile.values, dtype=float)
        return bool(np.all(values == values[0]))
    a_in, a_out = asymptotics(profile)
    return a_in == a_out


def solve_mode(profile: ScaleFactorProfile, mode: ModeSpec, tol: float = 1e-12,
               windows: int = 8, method: str = "auto", t_start=None, t_end=None,
               n_samples: int = DEFAULT_SAMPLES) -> ExtractionReport:
    """Evolve and extract in one call.

    With ``method="auto"`` a double-precision run is accepted when its
    Wronskian drift and window spread put the relative error of ``|beta|^2``
    below 1e-7; otherwise the mode is recomputed with the Taylor integrator
    at tolerance ``tol**2``.
    """
    if method in ("rk", "taylor"):
        traj = evolve_mode(profile, mode, t_start, t_end, tol, method, n_samples)
        return extract_bogoliubov(traj, mode.omega_out, windows)
    if method != "auto":
        raise ValidationError(f"unknown method {method!r}")
    traj = evolve_mode(profile, mode, t_start, t_end, tol, "rk", n_samples)
    report = extract_bogoliubov(traj, mode.omega_out, windows, strict=False)
    if _is_static(profile) or _resolves(report, tol):
        if report.convergence_spread >= SPREAD_LIMIT:
            raise NotConverged(
                f"|beta| varies by {report.convergence_spread:.3g} across extraction windows"
            )
        return report
    traj = evolve_mode(profile, mode, t_start, t_end, max(tol * tol, 1e-60), "taylor", n_samples)
    return extract_bogoliubov(traj, mode.omega_out, windows)


def analytic_reference(profile: ScaleFactorProfile, mode: ModeSpec) -> Optional[float]:
    """Closed-form particle number when the profile has one."""
    if isinstance(profile, Tanh):
        return particle_number_tanh(mode, profile.rho)
    if isinstance(profile, Step):
        return particle_number_sudden(mode)
    return None


def _profile_rate(profile) -> Optional[float]:
    if isinstance(profile, Tanh):
        return profile.rho
    if isinstance(profile, Step):
        return math.inf
    return None


def solve_record(profile: ScaleFactorProfile, mode: ModeSpec, tol: float = 1e-12,
                 windows: int = 8, method: str = "auto") -> SpectrumRecord:
    """Numeric and (where available) analytic particle number for one mode."""
    rho = _profile_rate(profile)
    try:
        n_ref = analytic_reference(profile, mode)
    except FluxonError:
        n_ref = None
    try:
        report = solve_mode(profile, mode, tol=tol, windows=windows, method=method)
    except (FluxonError, ArithmeticError) as exc:
        return SpectrumRecord(k=mode.k, rho=rho, n_analytic=n_ref,
                              status=f"{type(exc).__name__}: {exc}")
    return SpectrumRecord(
        k=mode.k, rho=rho, n_analytic=n_ref, n_numeric=report.pair.particle_number,
        wronskian_drift=report.wronskian_drift, spread=report.convergence_spread,
    )


def spectrum_numeric(profile: ScaleFactorProfile, modes: Sequence[ModeSpec], tol: float = 1e-12,
                     windows: int = 8, method: str = "auto", jobs: int = 1) -> list[SpectrumRecord]:
    """Numeric particle numbers for a batch of modes on one profile.

    Failures are reported in each record's ``status`` and do not stop the
    batch. Output order follows ``modes`` for any ``jobs``.
    """
    tasks = [(profile, mode, tol, windows, method) for mode in modes]
    return run_ordered(_solve_task, tasks, jobs)


def _solve_task(args) -> SpectrumRecord:
    return solve_record(*args)


def run_ordered(fn, tasks, jobs: int = 1) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))
