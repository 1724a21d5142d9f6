"""Exact square-pulse photon statistics and their limiting laws.

All functions work in Gamma = 1 units and broadcast over numpy arrays.  The
long-time (t >> T) statistics of a resonant square pulse of Rabi frequency
``omega`` and length ``big_t`` are written in terms of the auxiliary roots

    y = sqrt(1 - 4 omega**2),    x = sqrt(1 - 16 omega**2)

which are real for weak driving and imaginary for strong driving.  Every
expression is even in y (resp. x), so evaluation in complex arithmetic gives
a real result for either branch.  The expressions carry removable
singularities at y = 0 (omega = 1/2) and x = 0 (omega = 1/4); near those
points the value is taken as the mean over a circle in the y**2 (x**2) plane,
which for an entire function equals the value at the centre and never
touches the cancelling region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalInstabilityError

__all__ = [
    "SquarePulseContext",
    "cf_pn",
    "cf_mean_n",
    "cf_fac2",
    "cf_q",
    "strong_field_pn",
    "p1_p2_upper_bounds",
    "pi_pulse_p1",
    "p1_extremum_residual",
    "p1max_strong_asymptote",
    "p1_intermediate",
    "poisson_pn",
    "p2_short_time",
    "q_longtime",
    "q_strongfield",
    "q_shortpulse_limit",
    "T_P2_STRONG",
]

# Guard radius around the removable singularities, in the squared-root plane.
# Direct evaluation loses ~eps/|y|**8 for P2, so switch well before |y| -> 0.
_GUARD = 0.1
_CIRCLE_RADIUS = 0.3
_CIRCLE_NODES = 64
_IMAG_LIMIT = 1e-8

#: Pulse length maximising the strong-field 2 pi-pulse envelope of P2.
T_P2_STRONG = 2.0 * (math.sqrt(61.0) - 1.0) / 5.0


# --- exponential building blocks, pre-multiplied to avoid overflow ----------

def _damped_cosh_sinh(root, big_t, rate, scale):
    """Return e^{-rate T} cosh(root T scale), e^{-rate T} sinh(root T scale)."""
    up = np.exp((root * scale - rate) * big_t)
    down = np.exp((-root * scale - rate) * big_t)
    return 0.5 * (up + down), 0.5 * (up - down)


def _p0_kernel(y, T):
    y2 = y * y
    c, s = _damped_cosh_sinh(y, T, 0.5, 0.5)
    return ((1 + y2) * c + (y2 - 1) * np.exp(-T / 2) + 2 * y * s) / (2 * y2)


def _p1_kernel(y, T):
    y2 = y * y
    c, s = _damped_cosh_sinh(y, T, 0.5, 0.5)
    bracket = (y * (-8 + T + 4 * y2 + T * y2) * c
               + 2 * y * (4 + T - 2 * y2 - T * y2) * np.exp(-T / 2)
               + 2 * (-3 + (1 + T) * y2) * s)
    return (1 - y2) * bracket / (8 * y2 * y2 * y)


def _p2_kernel(y, T):
    y2 = y * y
    y4 = y2 * y2
    c, s = _damped_cosh_sinh(y, T, 0.5, 0.5)
    bracket = ((T * (T + 8) * y4 + (T * T - 28 * T - 32) * y2 + 96) * c
               + 4 * (T * (T + 4) * y4 - (T * T + 8 * T - 8) * y2 - 24) * np.exp(-T / 2)
               + 2 * y * ((T * T - 24) * y2 - T * (y2 + 9) + 60) * s)
    return (y2 - 1) ** 2 * bracket / (64 * y4 * y4)


def _mean_kernel(x, T):
    om2 = (1 - x * x) / 16
    c, s = _damped_cosh_sinh(x, T, 0.75, 0.25)
    transient = (2 - 2 * om2) * c + (2 - 14 * om2) * s / x
    return om2 / (1 + 2 * om2) ** 2 * (T * (1 + 2 * om2) - 2 + 2 * om2 + transient)


def _fac2_kernel(x, T):
    # (x -+ 3) never vanish: x is in [0, 1] or purely imaginary for real omega.
    x2 = x * x
    x3 = x2 * x
    plus = np.exp((-3 + x) * T / 4) * (12 - (16 + 3 * T) * x - 2 * (6 + T) * x2 + T * x3) \
        / ((x - 3) ** 4 * x3)
    minus = np.exp((-3 - x) * T / 4) * (-12 - (16 + 3 * T) * x + 2 * (6 + T) * x2 + T * x3) \
        / ((x + 3) ** 4 * x3)
    steady = 2 * (T * T * (x2 - 9) ** 2 + 32 * (63 + 5 * x2) + 2 * T * (-351 + 30 * x2 + x2 * x2)) \
        / (x2 - 9) ** 4
    return (1 - x2) ** 2 / 8 * (plus + minus + steady)


def _evaluate_even(kernel, z, big_t, what):
    """Evaluate ``kernel(sqrt(z), T)`` for an even kernel, guarding z ~ 0."""
    z, big_t = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(big_t, dtype=float))
    out = np.empty(z.shape, dtype=complex)
    near = np.abs(z) < _GUARD
    far = ~near
    if np.any(far):
        out[far] = kernel(np.sqrt(z[far]), big_t[far])
    if np.any(near):
        theta = 2 * np.pi * np.arange(_CIRCLE_NODES) / _CIRCLE_NODES
        nodes = z[near][:, None] + _CIRCLE_RADIUS * np.exp(1j * theta)[None, :]
        out[near] = kernel(np.sqrt(nodes), big_t[near][:, None]).mean(axis=1)
    residue = np.max(np.abs(out.imag)) if out.size else 0.0
    if residue > _IMAG_LIMIT:
        raise NumericalInstabilityError(
            f"{what}: imaginary residue {residue:.3e} exceeds {_IMAG_LIMIT:g}")
    real = out.real
    return real if real.ndim else float(real)


def _check_inputs(omega, big_t):
    omega = np.asarray(omega, dtype=float)
    big_t = np.asarray(big_t, dtype=float)
    if np.any(omega < 0) or np.any(big_t < 0):
        raise ValueError("omega and T must be non-negative")
    return omega, big_t


_PN_KERNELS = {0: _p0_kernel, 1: _p1_kernel, 2: _p2_kernel}


def cf_pn(omega, big_t, n: int):
    """Exact probability of emitting ``n`` (0, 1 or 2) photons for a square pulse."""
    if n not in _PN_KERNELS:
        raise ValueError("closed forms exist only for n = 0, 1, 2")
    omega, big_t = _check_inputs(omega, big_t)
    return _evaluate_even(_PN_KERNELS[n], 1 - 4 * omega**2, big_t, f"P{n}")


def cf_mean_n(omega, big_t):
    """Exact mean photon number <N> for a square pulse."""
    omega, big_t = _check_inputs(omega, big_t)
    return _evaluate_even(_mean_kernel, 1 - 16 * omega**2, big_t, "<N>")


def cf_fac2(omega, big_t):
    """Exact second factorial moment <N(N-1)> for a square pulse."""
    omega, big_t = _check_inputs(omega, big_t)
    return _evaluate_even(_fac2_kernel, 1 - 16 * omega**2, big_t, "<N(N-1)>")


def mandel_q(mean_n, fac2, zero_mean=1e-12):
    """Mandel Q = (<N(N-1)> - <N>^2) / <N>; NaN where the mean vanishes."""
    mean_n = np.asarray(mean_n, dtype=float)
    fac2 = np.asarray(fac2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(mean_n > zero_mean, (fac2 - mean_n**2) / mean_n, np.nan)
    return q if q.ndim else float(q)


def cf_q(omega, big_t):
    """Exact Mandel Q parameter for a square pulse (NaN at zero mean)."""
    return mandel_q(cf_mean_n(omega, big_t), cf_fac2(omega, big_t))


@dataclass(frozen=True)
class SquarePulseContext:
    """A square pulse together with its auxiliary roots y and x."""

    omega: float
    big_t: float

    @property
    def y_aux(self) -> complex:
        return complex(np.sqrt(complex(1 - 4 * self.omega**2)))

    @property
    def x_aux(self) -> complex:
        return complex(np.sqrt(complex(1 - 16 * self.omega**2)))

    def pn(self, n: int) -> float:
        return cf_pn(self.omega, self.big_t, n)

    def mean_n(self) -> float:
        return cf_mean_n(self.omega, self.big_t)

    def fac2(self) -> float:
        return cf_fac2(self.omega, self.big_t)

    def q(self) -> float:
        return cf_q(self.omega, self.big_t)


# --- asymptotic and limiting laws -------------------------------------------

def strong_field_pn(omega, big_t, n: int):
    """Leading strong-field (omega >> 1) form of P0, P1 or P2."""
    omega = np.asarray(omega, dtype=float)
    big_t = np.asarray(big_t, dtype=float)
    damp = np.exp(-big_t / 2)
    phase = omega * big_t
    if n == 0:
        return damp * np.cos(phase / 2) ** 2
    if n == 1:
        return damp / 8 * (4 + 2 * big_t - (4 + big_t) * np.cos(phase))
    if n == 2:
        return damp / 64 * big_t * ((8 + big_t) * np.cos(phase) + 4 * big_t + 16)
    raise ValueError("strong-field forms exist only for n = 0, 1, 2")


def p1_p2_upper_bounds(big_t):
    """Strong-field envelopes of P1 and P2 (reached where cos(omega T) = -1 / +1)."""
    big_t = np.asarray(big_t, dtype=float)
    damp = np.exp(-big_t / 2)
    return (8 + 3 * big_t) * damp / 8, damp * big_t * (5 * big_t + 24) / 64


def pi_pulse_p1(omega_t_product):
    """P1 in the short, strong pulse limit at fixed pulse area; P0 = 1 - P1."""
    return np.sin(np.asarray(omega_t_product, dtype=float) / 2) ** 2


def p1_extremum_residual(omega, big_t):
    """Proportional to dP1/dT of the strong-field P1; zero at its extrema."""
    omega = np.asarray(omega, dtype=float)
    big_t = np.asarray(big_t, dtype=float)
    phase = omega * big_t
    return -2 * big_t + (2 + big_t) * np.cos(phase) + 2 * (4 + big_t) * omega * np.sin(phase)


def p1max_strong_asymptote(omega):
    """Large-omega approximation of the best single-photon probability."""
    omega = np.asarray(omega, dtype=float)
    return np.exp(-np.pi / (2 * omega)) * (1 + 3 * np.pi / (8 * omega))


def p1_intermediate(big_t):
    """Exact P1 at the critical Rabi frequency omega = 1/2."""
    big_t = np.asarray(big_t, dtype=float)
    return big_t**2 * (480 + 160 * big_t + 20 * big_t**2 + big_t**3) / 7680 * np.exp(-big_t / 2)


def poisson_pn(omega, big_t, n: int):
    """Semiclassical weak-field limit: Poisson law with mean omega^2 T."""
    mean = np.asarray(omega, dtype=float) ** 2 * np.asarray(big_t, dtype=float)
    return mean**n * np.exp(-mean) / math.factorial(n)


def p2_short_time(omega, big_t):
    """Leading short-pulse behaviour of P2."""
    return np.asarray(omega, dtype=float) ** 4 * np.asarray(big_t, dtype=float) ** 5 / 480


def q_longtime(omega):
    """Long pulse (cw resonance fluorescence) Mandel Q."""
    om2 = np.asarray(omega, dtype=float) ** 2
    return -6 * om2 / (1 + 2 * om2) ** 2


def q_strongfield(omega, big_t):
    """Strong-field approximation of Q for finite pulse length."""
    omega = np.asarray(omega, dtype=float)
    big_t = np.asarray(big_t, dtype=float)
    c = np.cos(omega * big_t) * np.exp(-3 * big_t / 4)
    return (-(1 - c) ** 2 + 3 * big_t * c) / (2 * (1 + big_t - c))


def q_shortpulse_limit(omega_t_product, on_resonance_2pin: bool | None = None):
    """Short, strong pulse limit of Q at fixed pulse area.

    The limit is discontinuous: -sin^2(area / 2) in general but 6/7 on the
    2 pi n resonances.  With ``on_resonance_2pin=None`` the resonance is
    detected from the area itself.
    """
    area = float(omega_t_product)
    if on_resonance_2pin is None:
        turns = area / (2 * math.pi)
        on_resonance_2pin = turns >= 0.5 and abs(turns - round(turns)) < 1e-12
    if on_resonance_2pin:
        return 6.0 / 7.0
    return -math.sin(area / 2) ** 2
