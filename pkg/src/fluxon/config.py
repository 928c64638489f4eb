"""JSON run configuration: loading, overrides and validation.

A config is a plain JSON object. Recognised keys (all optional unless a
command needs them):

``circuit``
    ``"reference"`` or an object with ``critical_current``, ``junction_capacitance``,
    ``ground_capacitance``, ``cell_inductance``, ``cell_length`` (SI).
``model``
    ``{"A": ..., "B": ..., "mass": 1.0}`` in field-theory units, used with ``k``.
``k``
    List of field-theory wave numbers.
``k_prime``, ``flux_in``, ``flux_out``
    Circuit wave numbers (rad/m) and the in/out flux biases (Wb).
``targets``
    ``{"omega_in": ..., "omega_out": ..., "flux_out": 0.0}``: solve for a single
    circuit mode with those frequencies.
``rho``
    List of rates, or ``{"start", "stop", "num", "spacing": "log"|"linear"}``.
``profile``
    ``{"kind": "tanh"}`` (default), ``{"kind": "step"}`` or
    ``{"kind": "tabulated", "path": "file.csv"}`` (numeric commands only).
``tol``, ``method``, ``windows``
    Modesolver settings.
``lattice``
    ``{"n_cells": 100, "boundary": "periodic", "flux": 0.0}``.
``drive``
    ``{"sample_rate": Hz, "rho": rad/s}`` plus either ``targets`` at top level or
    ``"A", "B", "mass"`` here.
``analytic_grid``, ``numeric_grid``
    ``verify`` only: ``{"rho_over_omega_out": grid, "omega_ratio": grid}``.
``tolerances``
    ``verify`` only: per-invariant overrides, keyed by invariant name.
``only``
    ``verify`` only: list of invariant names to run.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .analytic import ModeSpec
from .errors import FluxonError, ValidationError
from .params import REFERENCE_CIRCUIT, CircuitParams, mode_from_circuit, solve_circuit_mode
from .scalefactor import ScaleFactorProfile, Step, Tanh, read_tabulated_csv


def load_config(path: Optional[str], overrides: Optional[list[str]] = None) -> dict:
    config: dict[str, Any] = {}
    if path is not None:
        try:
            config = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise ValidationError("config must be a JSON object")
    for item in overrides or ():
        apply_override(config, item)
    return config


def apply_override(config: dict, item: str) -> None:
    """Apply ``dotted.key=value``; ``value`` is parsed as JSON when possible."""
    if "=" not in item:
        raise ValidationError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ValidationError(f"override {key!r}: {part!r} is not an object")
    node[parts[-1]] = value


def _number(config, key, default=None, positive=False) -> float:
    value = config.get(key, default)
    if value is None:
        raise ValidationError(f"config.{key}: required")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"config.{key}: expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ValidationError(f"config.{key}: must be positive, got {value!r}")
    return float(value)


def circuit_from(config: dict) -> CircuitParams:
    spec = config.get("circuit", "reference")
    if spec == "reference":
        return REFERENCE_CIRCUIT
    if not isinstance(spec, dict):
        raise ValidationError("config.circuit: expected \"reference\" or an object")
    try:
        return CircuitParams(**{k: float(v) for k, v in spec.items()})
    except TypeError as exc:
        raise ValidationError(f"config.circuit: {exc}") from exc
    except ValidationError as exc:
        raise ValidationError(f"config.circuit: {exc}") from exc


def grid_from(value, key: str) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if isinstance(value, list):
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"config.{key}: non-numeric entry {v!r}")
            out.append(float(v))
    elif isinstance(value, dict):
        start = _number(value, "start", positive=True)
        stop = _number(value, "stop", positive=True)
        num = value.get("num")
        if not isinstance(num, int) or num < 1:
            raise ValidationError(f"config.{key}.num: expected a positive integer")
        spacing = value.get("spacing", "log")
        if spacing == "log":
            out = list(np.geomspace(start, stop, num))
        elif spacing == "linear":
            out = list(np.linspace(start, stop, num))
        else:
            raise ValidationError(f"config.{key}.spacing: expected 'log' or 'linear'")
        out = [float(x) for x in out]
    else:
        raise ValidationError(f"config.{key}: expected a number, list or range object")
    if not out:
        raise ValidationError(f"config.{key}: empty grid")
    return out


@dataclass(frozen=True)
class ModeCase:
    """One row-group of a sweep: a label for the k column and its mode."""

    label: float
    mode: Optional[ModeSpec]
    a2_in: float
    a2_out: float
    error: Optional[str] = None


def mode_cases(config: dict) -> list[ModeCase]:
    """Modes named by the config, each with scale-factor asymptotes to match."""
    if "targets" in config:
        circuit = circuit_from(config)
        t = config["targets"]
        if not isinstance(t, dict):
            raise ValidationError("config.targets: expected an object")
        cm = solve_circuit_mode(circuit, _number(t, "omega_in", positive=True),
                                _number(t, "omega_out", positive=True),
                                _number(t, "flux_out", 0.0))
        return [_circuit_case(circuit, cm.wavenumber, cm.mode)]
    if "k_prime" in config:
        circuit = circuit_from(config)
        flux_in = _number(config, "flux_in")
        flux_out = _number(config, "flux_out")
        cases = []
        for kp in grid_from(config["k_prime"], "k_prime"):
            try:
                mode = mode_from_circuit(circuit, kp, flux_in, flux_out)
            except FluxonError as exc:
                cases.append(ModeCase(kp, None, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
                continue
            cases.append(_circuit_case(circuit, kp, mode))
        return cases
    model = config.get("model")
    if not isinstance(model, dict):
        raise ValidationError("config: one of 'model' (with 'k'), 'k_prime' or 'targets' is required")
    A = _number(model, "A")
    B = _number(model, "B")
    mass = _number(model, "mass", 1.0, positive=True)
    if A - B <= 0 or A + B <= 0:
        raise ValidationError(f"config.model: A-B and A+B must be positive, got A={A}, B={B}")
    ks = grid_from(config.get("k", [0.0]), "k")
    return [ModeCase(k, ModeSpec.from_asymptotics(k, A - B, A + B, mass), A - B, A + B) for k in ks]


def _circuit_case(circuit: CircuitParams, label: float, mode: ModeSpec) -> ModeCase:
    m2 = circuit.max_mass_sq
    k2 = mode.k ** 2
    return ModeCase(label, mode, (mode.omega_in ** 2 - k2) / m2, (mode.omega_out ** 2 - k2) / m2)


def profile_kind(config: dict) -> str:
    spec = config.get("profile", {"kind": "tanh"})
    kind = spec.get("kind", "tanh") if isinstance(spec, dict) else spec
    if kind not in ("tanh", "step", "tabulated"):
        raise ValidationError(f"config.profile.kind: unknown kind {kind!r}")
    return kind


def rho_values(config: dict) -> list[Optional[float]]:
    kind = profile_kind(config)
    if kind == "step":
        return [math.inf]
    if kind == "tabulated":
        return [None]
    if "rho" not in config:
        raise ValidationError("config.rho: required for tanh profiles")
    values = grid_from(config["rho"], "rho")
    if any(v <= 0 for v in values):
        raise ValidationError("config.rho: rates must be positive")
    return values


def profile_for(config: dict, case: ModeCase, rho: Optional[float]) -> ScaleFactorProfile:
    kind = profile_kind(config)
    A = 0.5 * (case.a2_in + case.a2_out)
    B = 0.5 * (case.a2_out - case.a2_in)
    if kind == "tanh":
        return Tanh(A, B, rho)
    if kind == "step":
        return Step(A, B)
    path = config["profile"].get("path")
    if not path:
        raise ValidationError("config.profile.path: required for tabulated profiles")
    return read_tabulated_csv(path)


def solver_settings(config: dict) -> dict:
    tol = _number(config, "tol", 1e-12, positive=True)
    method = config.get("method", "auto")
    if method not in ("auto", "rk", "taylor"):
        raise ValidationError(f"config.method: expected auto, rk or taylor, got {method!r}")
    windows = config.get("windows", 8)
    if not isinstance(windows, int) or windows < 1:
        raise ValidationError("config.windows: expected a positive integer")
    return {"tol": tol, "method": method, "windows": windows}


def effective(config: dict) -> dict:
    """Deep copy used for hashing; the dict as the run saw it."""
    return copy.deepcopy(config)
