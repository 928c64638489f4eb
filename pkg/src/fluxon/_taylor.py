"""Arbitrary-precision Taylor-series integrator for ``g'' = -W(t) g``.

Only profiles whose ``W(t)`` has cheaply computable Taylor coefficients are
supported: the tanh ramp (via the Riccati recurrence ``u' = rho (1 - u^2)``),
piecewise constants and piecewise cubics. Exponentially small Bogoliubov
coefficients sit far below double-precision round-off of an O(1) mode
function; here the working precision is raised instead.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import StepSizeUnderflow
from .scalefactor import Step, Tabulated, Tanh

_SAFETY = 0.6
_MAX_STEPS = 2_000_000


def _w_series_factory(profile, wparams, order):
    """Return ``coeffs(t0) -> list of mpf`` of W(t0 + s) in powers of s.

    ``wparams`` are the mpf coefficients from
    :func:`fluxon.modesolver.frequency_coefficients`. The returned callable
    assumes ``t0`` and the step stay inside one smooth piece of the profile.
    """
    mpf = mpmath.mpf
    if isinstance(profile, Tanh):
        rho = mpf(profile.rho)
        c0, c1 = wparams

        def coeffs(t0):
            u = [mpmath.tanh(rho * t0)]
            for n in range(order):
                acc = -mpmath.fsum(u[j] * u[n - j] for j in range(n + 1))
                if n == 0:
                    acc += 1
                u.append(rho * acc / (n + 1))
            w = [c1 * x for x in u]
            w[0] += c0
            return w

        return coeffs

    if isinstance(profile, Step):
        lo, hi = wparams

        def coeffs(t0):
            return [lo if t0 < 0 else hi]

        return coeffs

    if isinstance(profile, Tabulated):
        k_sq, m_sq = wparams
        knots = np.asarray(profile.times)
        poly = profile.interpolant.c  # shape (4, n-1), highest power first

        def coeffs(t0):
            i = int(np.searchsorted(knots, float(t0), side="right")) - 1
            i = min(max(i, 0), len(knots) - 2)
            d = t0 - mpf(knots[i])
            a = [mpf(poly[3 - j, i]) for j in range(4)]  # ascending powers of (t - x_i)
            out = []
            for n in range(4):
                out.append(mpmath.fsum(a[j] * math.comb(j, n) * d ** (j - n) for j in range(n, 4)))
            w = [m_sq * x for x in out]
            w[0] += k_sq
            return w

        return coeffs

    raise TypeError(f"unsupported profile for the Taylor integrator: {profile!r}")


def _radius_cap(profile, t0):
    if isinstance(profile, Tanh):
        # nearest pole of tanh(rho t) is at t = i pi / (2 rho)
        return 0.5 * math.hypot(float(t0), math.pi / (2 * profile.rho))
    return math.inf


def integrate(profile, wparams, t_start, t_end, g0, gdot0, sample_times, breaks,
              tol, omega_scale):
    """Integrate from ``t_start`` and return ``(g, gdot)`` at ``sample_times``.

    All arithmetic happens at the caller's :data:`mpmath.mp` precision;
    ``g0``/``gdot0`` are mpc. ``sample_times`` must be sorted and inside
    ``[t_start, t_end]``; ``breaks`` are times the stepper lands on exactly.
    """
    mpf = mpmath.mpf
    digits = max(8.0, -math.log10(tol))
    order = max(20, int(math.ceil(1.15 * digits)) + 6)
    w_coeffs = _w_series_factory(profile, wparams, order)

    stops = sorted({float(b) for b in breaks if t_start < b < t_end} | {float(t_end)})
    samples = [float(s) for s in sample_times]
    out_g, out_gd = [], []
    si = 0

    t = mpf(t_start)
    gr, gi = mpmath.re(g0), mpmath.im(g0)
    dr, di = mpmath.re(gdot0), mpmath.im(gdot0)

    while si < len(samples) and samples[si] <= float(t):
        out_g.append(mpmath.mpc(gr, gi))
        out_gd.append(mpmath.mpc(dr, di))
        si += 1

    steps = 0
    for stop in stops:
        stop_mp = mpf(stop)
        while t < stop_mp:
            steps += 1
            if steps > _MAX_STEPS:
                raise StepSizeUnderflow("Taylor integrator exceeded its step budget")
            w = w_coeffs(t)
            nw = len(w)
            cr = [gr, dr]
            ci = [gi, di]
            for n in range(order - 1):
                lim = min(n, nw - 1)
                sr = mpmath.fsum(w[j] * cr[n - j] for j in range(lim + 1))
                sim = mpmath.fsum(w[j] * ci[n - j] for j in range(lim + 1))
                denom = (n + 1) * (n + 2)
                cr.append(-sr / denom)
                ci.append(-sim / denom)

            scale = float(abs(gr) + abs(gi) + (abs(dr) + abs(di)) / omega_scale)
            tol_abs = tol * max(scale, 1e-300)
            h = math.inf
            log_tol = math.log(tol_abs)
            for j in (order - 2, order - 1):
                mag = cr[j] ** 2 + ci[j] ** 2
                if mag > 0:
                    # coefficients reach ~1e450 in SI units; stay in logs
                    h = min(h, math.exp((log_tol - float(mpmath.log(mag)) / 2) / j))
            h = _SAFETY * min(h, _radius_cap(profile, t))
            remaining = float(stop_mp - t)
            if not h > 0 or h < 1e-13 / omega_scale:
                raise StepSizeUnderflow(f"Taylor step size underflow at t = {float(t):.6g}")
            if h >= remaining:
                t_next = stop_mp
                h_mp = t_next - t
            else:
                h_mp = mpf(h)
                t_next = t + h_mp

            while si < len(samples) and mpf(samples[si]) <= t_next:
                s = mpf(samples[si]) - t
                out_g.append(mpmath.mpc(*_eval(cr, ci, s)))
                out_gd.append(mpmath.mpc(*_eval_deriv(cr, ci, s)))
                si += 1

            gr, gi = _eval(cr, ci, h_mp)
            dr, di = _eval_deriv(cr, ci, h_mp)
            t = t_next

    return out_g, out_gd


def _eval(cr, ci, s):
    ar = ai = mpmath.mpf(0)
    for j in range(len(cr) - 1, -1, -1):
        ar = ar * s + cr[j]
        ai = ai * s + ci[j]
    return ar, ai


def _eval_deriv(cr, ci, s):
    ar = ai = mpmath.mpf(0)
    for j in range(len(cr) - 1, 0, -1):
        ar = ar * s + j * cr[j]
        ai = ai * s + j * ci[j]
    return ar, ai
