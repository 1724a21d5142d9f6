"""Emitter parameters, unit handling and laser control-field protocols.

Everything inside the package is expressed in units of the spontaneous
emission rate (Gamma = 1): Rabi frequencies and detunings in Gamma, times in
1/Gamma.  Physical units only appear at the boundary, where frequencies are
given in MHz and times in microseconds (so that MHz * us = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import ConfigurationError

__all__ = [
    "EmitterParams",
    "SquarePulse",
    "RAF",
    "Piecewise",
    "ControlField",
    "field_at",
    "to_dimensionless",
    "from_dimensionless",
    "read_run_config",
    "field_from_config",
]

_KINDS = ("rate", "frequency", "time")


@dataclass(frozen=True)
class EmitterParams:
    """Spontaneous emission rate of the emitter.

    ``gamma_mhz=None`` means pure dimensionless mode: no conversion possible.
    """

    gamma_mhz: float | None = None

    def __post_init__(self):
        if self.gamma_mhz is not None and not self.gamma_mhz > 0:
            raise ConfigurationError(f"gamma_mhz must be positive, got {self.gamma_mhz}")


def to_dimensionless(params: EmitterParams, value, kind: str):
    """Convert a physical quantity to Gamma units.

    Rates and frequencies (MHz) are divided by Gamma, times (us) are
    multiplied by it.

    >>> to_dimensionless(EmitterParams(20.0), 3.0, "frequency")
    0.15
    """
    gamma = _require_gamma(params)
    if kind in ("rate", "frequency"):
        return value / gamma
    if kind == "time":
        return value * gamma
    raise ConfigurationError(f"unknown quantity kind {kind!r}; expected one of {_KINDS}")


def from_dimensionless(params: EmitterParams, value, kind: str):
    """Inverse of :func:`to_dimensionless`."""
    gamma = _require_gamma(params)
    if kind in ("rate", "frequency"):
        return value * gamma
    if kind == "time":
        return value / gamma
    raise ConfigurationError(f"unknown quantity kind {kind!r}; expected one of {_KINDS}")


def _require_gamma(params: EmitterParams) -> float:
    if params.gamma_mhz is None:
        raise ConfigurationError("gamma_mhz is required for unit conversion")
    return params.gamma_mhz


@dataclass(frozen=True)
class SquarePulse:
    """Resonant square pulse: Rabi frequency ``omega`` on for 0 <= t < T."""

    omega: float
    duration_T: float

    def __post_init__(self):
        if self.omega < 0 or self.duration_T < 0:
            raise ConfigurationError("square pulse needs omega >= 0 and T >= 0")

    def at(self, t: float) -> tuple[float, float]:
        if 0.0 <= t < self.duration_T:
            return self.omega, 0.0
        return 0.0, 0.0

    @property
    def support_end(self) -> float:
        return self.duration_T

    def breakpoints(self) -> list[float]:
        return [0.0, self.duration_T]

    def max_rate(self) -> float:
        return self.omega

    def min_spacing(self) -> float:
        return math.inf


@dataclass(frozen=True)
class RAF:
    """Rapid adiabatic following: cw drive plus a sinusoidally swept detuning.

    The detuning is ``(delta_rf / 2) * cos(nu_rf * t + phase)``; ``nu_rf`` is
    the angular modulation frequency in Gamma units, so 3 MHz with
    Gamma = 20 MHz enters as 0.15.  The counting window defaults to half a
    modulation period, i.e. one passage through resonance.  ``extended``
    adds free decay after the window so late photons are counted too.
    """

    omega: float
    delta_rf: float
    nu_rf: float
    phase: float = 0.0
    window: float | None = None
    extended: bool = False

    def __post_init__(self):
        if self.omega < 0:
            raise ConfigurationError("RAF omega must be >= 0")
        if self.delta_rf < 0:
            raise ConfigurationError("RAF delta_rf must be >= 0")
        if not self.nu_rf > 0:
            raise ConfigurationError("RAF nu_rf must be > 0")
        if self.window is None:
            object.__setattr__(self, "window", math.pi / self.nu_rf)
        elif not self.window > 0:
            raise ConfigurationError("RAF window must be > 0")

    def detuning(self, t):
        return 0.5 * self.delta_rf * np.cos(self.nu_rf * t + self.phase)

    def at(self, t: float) -> tuple[float, float]:
        return self.omega, float(self.detuning(t))

    @property
    def support_end(self) -> float:
        return self.window

    def breakpoints(self) -> list[float]:
        return [0.0, self.window]

    def max_rate(self) -> float:
        return max(self.omega, 0.5 * self.delta_rf)

    def min_spacing(self) -> float:
        return math.inf


@dataclass(frozen=True)
class Piecewise:
    """Tabulated field ``(t, omega, delta)`` with linear interpolation.

    Zero outside the table's time range.
    """

    samples: tuple = field(default=())

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 2:
            raise ConfigurationError("piecewise field needs >= 2 samples of (t, omega, delta)")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise ConfigurationError("piecewise sample times must be strictly increasing")
        if arr[0, 0] < 0:
            raise ConfigurationError("piecewise sample times must be >= 0")
        object.__setattr__(self, "samples", tuple(map(tuple, arr.tolist())))
        object.__setattr__(self, "_arr", arr)

    def at(self, t: float) -> tuple[float, float]:
        ts = self._arr[:, 0]
        if t < ts[0] or t > ts[-1]:
            return 0.0, 0.0
        return (float(np.interp(t, ts, self._arr[:, 1])),
                float(np.interp(t, ts, self._arr[:, 2])))

    @property
    def support_end(self) -> float:
        return float(self._arr[-1, 0])

    def breakpoints(self) -> list[float]:
        return [0.0] + [float(t) for t in self._arr[:, 0] if t > 0]

    def max_rate(self) -> float:
        return float(np.max(np.abs(self._arr[:, 1:])))

    def min_spacing(self) -> float:
        return float(np.min(np.diff(self._arr[:, 0])))


ControlField = Union[SquarePulse, RAF, Piecewise]


def field_at(field: ControlField, t: float) -> tuple[float, float]:
    """Rabi frequency and detuning of ``field`` at time ``t`` (Gamma units)."""
    return field.at(t)


# --- flat key = value run configuration -------------------------------------

_FIELD_KINDS = ("square", "raf", "piecewise")


def read_run_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    config = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        config[key.lower().replace("-", "_")] = value
    return config


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"not a boolean: {text!r}")


def _parse_samples(text: str) -> list[tuple[float, float, float]]:
    samples = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(p) for p in chunk.split(",")]
        if len(parts) != 3:
            raise ConfigurationError(f"piecewise sample needs t,omega,delta: {chunk!r}")
        samples.append(tuple(parts))
    return samples


def field_from_config(config: dict) -> tuple[ControlField, EmitterParams]:
    """Build a control field from a parsed run configuration.

    When ``gamma_mhz`` is present, frequencies are read in MHz and times in
    microseconds; otherwise all values are in Gamma units.
    """
    try:
        kind = str(config.get("field", "square")).lower()
        gamma = config.get("gamma_mhz")
        params = EmitterParams(float(gamma) if gamma not in (None, "") else None)

        def freq(key, default=None):
            if key not in config:
                if default is None:
                    raise ConfigurationError(f"missing required key {key!r}")
                return default
            value = float(config[key])
            return to_dimensionless(params, value, "frequency") if params.gamma_mhz else value

        def time(key, default=None):
            if key not in config or config[key] in ("", "auto", None):
                return default
            value = float(config[key])
            return to_dimensionless(params, value, "time") if params.gamma_mhz else value

        if kind == "square":
            duration = time("t")
            if duration is None:
                duration = time("duration_t")
            if duration is None:
                raise ConfigurationError("square field needs 'T'")
            return SquarePulse(freq("omega"), duration), params
        if kind == "raf":
            return RAF(
                omega=freq("omega"),
                delta_rf=freq("delta_rf"),
                nu_rf=freq("nu_rf"),
                phase=float(config.get("phase", 0.0)),
                window=time("window"),
                extended=_parse_bool(config.get("extended", "false")),
            ), params
        if kind == "piecewise":
            samples = _parse_samples(str(config.get("samples", "")))
            if params.gamma_mhz:
                samples = [
                    (to_dimensionless(params, t, "time"),
                     to_dimensionless(params, om, "frequency"),
                     to_dimensionless(params, de, "frequency"))
                    for t, om, de in samples
                ]
            return Piecewise(tuple(samples)), params
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc
    raise ConfigurationError(f"unknown field kind {kind!r}; expected one of {_FIELD_KINDS}")
