"""Conformal scale-factor profiles a^2(t).

Three shapes are supported: the smooth ``Tanh`` expansion
``A + B tanh(rho t)``, its sudden ``Step`` limit, and ``Tabulated`` samples
interpolated with a monotone cubic. Negative ``B`` describes contraction.
Profiles are unit-agnostic: ``t`` is in whatever unit ``1/rho`` is.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import OutOfRange, ValidationError

# fraction of samples at each end of a table that defines the static regions
END_FRACTION = 0.1
END_FLATNESS = 1e-6


def _check_asymptotes(A: float, B: float) -> None:
    if not (math.isfinite(A) and math.isfinite(B)):
        raise ValidationError(f"A and B must be finite, got A={A!r}, B={B!r}")
    if A - B <= 0 or A + B <= 0:
        raise ValidationError(
            f"both asymptotic values must be positive, got A-B={A - B:.6g}, A+B={A + B:.6g}"
        )


@dataclass(frozen=True)
class Tanh:
    A: float
    B: float
    rho: float

    def __post_init__(self):
        _check_asymptotes(self.A, self.B)
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValidationError(f"rho must be positive, got {self.rho!r}")


@dataclass(frozen=True)
class Step:
    """Sudden limit ``A - B + 2B Theta(t)`` with ``Theta(0) = 1``."""

    A: float
    B: float

    def __post_init__(self):
        _check_asymptotes(self.A, self.B)


def _end_count(n: int) -> int:
    return max(1, math.ceil(END_FRACTION * n))


@dataclass(frozen=True)
class Tabulated:
    times: tuple
    values: tuple
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValidationError("times and values must be 1-d sequences of equal length")
        if t.size < 4:
            raise ValidationError("a tabulated profile needs at least 4 samples")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
            raise ValidationError("tabulated profile contains non-finite entries")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if np.any(v <= 0):
            raise ValidationError("all a^2 values must be positive")
        n = _end_count(t.size)
        for label, seg in (("first", v[:n]), ("last", v[-n:])):
            spread = (seg.max() - seg.min()) / seg.mean()
            if spread >= END_FLATNESS:
                raise ValidationError(
                    f"{label} {END_FRACTION:.0%} of samples vary by {spread:.3g} relative; "
                    "the profile must be static at both ends"
                )
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        object.__setattr__(self, "_interp", PchipInterpolator(t, v, extrapolate=False))

    @property
    def interpolant(self) -> PchipInterpolator:
        return self._interp

    @property
    def t_min(self) -> float:
        return self.times[0]

    @property
    def t_max(self) -> float:
        return self.times[-1]


ScaleFactorProfile = Union[Tanh, Step, Tabulated]


def evaluate(profile: ScaleFactorProfile, t):
    """Value of a^2 at time ``t`` (scalar or array)."""
    if isinstance(profile, Tanh):
        if np.ndim(t):
            return profile.A + profile.B * np.tanh(profile.rho * np.asarray(t, dtype=float))
        return profile.A + profile.B * math.tanh(profile.rho * t)
    if isinstance(profile, Step):
        lo, hi = profile.A - profile.B, profile.A + profile.B
        if np.ndim(t):
            return np.where(np.asarray(t) < 0, lo, hi)
        return lo if t < 0 else hi
    if isinstance(profile, Tabulated):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < profile.t_min) or np.any(arr > profile.t_max):
            raise OutOfRange(
                f"t outside tabulated range [{profile.t_min:.6g}, {profile.t_max:.6g}]"
            )
        out = profile.interpolant(arr)
        return out if np.ndim(t) else float(out)
    raise TypeError(f"not a scale-factor profile: {profile!r}")


def asymptotics(profile: ScaleFactorProfile) -> tuple[float, float]:
    """Static in- and out-region values ``(a^2_in, a^2_out)``."""
    if isinstance(profile, (Tanh, Step)):
        return profile.A - profile.B, profile.A + profile.B
    if isinstance(profile, Tabulated):
        n = _end_count(len(profile.values))
        v = np.asarray(profile.values)
        return float(v[:n].mean()), float(v[-n:].mean())
    raise TypeError(f"not a scale-factor profile: {profile!r}")


def breakpoints(profile: ScaleFactorProfile) -> tuple[float, ...]:
    """Times where a^2 is not smooth; integrators must step onto these."""
    if isinstance(profile, Step):
        return (0.0,)
    if isinstance(profile, Tabulated):
        return profile.times
    return ()


def tabulate(profile: ScaleFactorProfile, times) -> Tabulated:
    times = np.asarray(times, dtype=float)
    return Tabulated(tuple(times), tuple(np.asarray(evaluate(profile, times), dtype=float)))


def read_tabulated_csv(path) -> Tabulated:
    """Load a profile from a CSV with ``time_s, a2`` columns.

    Lines starting with ``#`` are ignored.
    """
    times, values = [], []
    with Path(path).open(newline="") as fh:
        rows = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
        header = next(rows)
        if [h.strip() for h in header[:2]] != ["time_s", "a2"]:
            raise ValidationError(f"{path}: expected header 'time_s,a2', got {header!r}")
        for row in rows:
            if not row:
                continue
            times.append(float(row[0]))
            values.append(float(row[1]))
    return Tabulated(tuple(times), tuple(values))
