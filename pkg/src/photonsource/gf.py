"""Generating-function Bloch equations for a driven two-level emitter.

The generating function ``2 Y(s, t) = sum_N s^N P_N(t)`` follows from a
four-component linear system (U, V, W, Y) in which the counting variable s
enters affinely (Gamma = 1):

    U' = -U/2 + delta V
    V' = -delta U - V/2 - Omega W
    W' = Omega V - (1 + s)(W + Y)/2
    Y' = -(1 - s)(W + Y)/2

Three propagations are provided:

* the scalar system at a fixed s,
* the exact Taylor hierarchy in s, whose coefficients are P_n / 2,
* the s-derivative system at s = 1, giving the factorial moments.

The emitter starts in its ground state: U = V = 0, W = -1/2, Y = 1/2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp

from .closed_form import mandel_q
from .exceptions import IntegrationError
from .params import RAF, ControlField

__all__ = [
    "GFState",
    "PhotonDistribution",
    "Moments",
    "propagate_gf",
    "photon_distribution",
    "moments",
    "raf_distribution",
    "raf_distribution_batch",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
ABS_TOL_RATIO = 1e-2
#: Step cap as a fraction of the fastest field time scale 1 / max(Omega, |delta|, 1).
STEP_FRACTION = 0.5
#: Excited population below which the post-pulse decay counts as finished.
DECAY_FLOOR = 1e-12
#: Longest free decay appended after the field support (Gamma units).
MAX_DECAY = 60.0
TAIL_THRESHOLD = 1e-6

Horizon = Union[float, str]


@dataclass(frozen=True)
class GFState:
    u: float
    v: float
    w: float
    y: float
    s: float
    t: float


@dataclass(frozen=True)
class PhotonDistribution:
    """Photon-number probabilities P_0 ... P_nmax.

    ``tail_bound`` is the probability mass above n_max, ``1 - sum(probs)``.
    """

    probs: np.ndarray
    tail_bound: float
    method: str
    ci_halfwidths: np.ndarray | None = None
    horizon: float | None = None
    tail_threshold: float = TAIL_THRESHOLD

    def __getitem__(self, n):
        return self.probs[n]

    def __len__(self):
        return len(self.probs)

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    @property
    def truncated(self) -> bool:
        """True when n_max is too small for the declared tail threshold."""
        return self.tail_bound > self.tail_threshold

    def mean_n(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    def fac2(self) -> float:
        n = np.arange(len(self.probs))
        return float(np.dot(n * (n - 1), self.probs))


@dataclass(frozen=True)
class Moments:
    """Mean photon number, second factorial moment and Mandel Q.

    ``q`` is None when the mean is too small for Q to be defined.
    """

    mean_n: float
    fac2: float
    q: float | None
    horizon: float | None = None

    @property
    def second_moment(self) -> float:
        return self.fac2 + self.mean_n


# --- right-hand sides --------------------------------------------------------

def _field_fn(fld: ControlField):
    """Field as a function of time, switched off after its support."""
    end = fld.support_end

    def at(t):
        if t >= end:
            return 0.0, 0.0
        return fld.at(t)

    return at


def _gf_rhs(field_fn, s):
    a, b = (1 + s) / 2, (1 - s) / 2

    def rhs(t, x):
        omega, delta = field_fn(t)
        u, v, w, y = x
        e = w + y
        return [-u / 2 + delta * v, -delta * u - v / 2 - omega * w, omega * v - a * e, -b * e]

    return rhs


def _hierarchy_rhs(field_fn, m):
    """Taylor coefficients in s: order n couples only to order n - 1."""

    def rhs(t, x):
        omega, delta = field_fn(t)
        u, v, w, y = x.reshape(4, m, -1)
        e = w + y
        e_prev = np.zeros_like(e)
        e_prev[1:] = e[:-1]
        out = np.empty((4,) + e.shape)
        out[0] = -u / 2 + delta * v
        out[1] = -delta * u - v / 2 - omega * w
        out[2] = omega * v - (e + e_prev) / 2
        out[3] = (e_prev - e) / 2
        return out.ravel()

    return rhs


def _moment_rhs(field_fn):
    """(U, V, W, Y) at s = 1 with their first and second s-derivatives."""

    def rhs(t, x):
        omega, delta = field_fn(t)
        u, v, w, y = x.reshape(4, 3)
        e = w + y
        # d^k/ds^k of (1+s)/2 * e and (1-s)/2 * e at s = 1
        src = np.array([0.0, e[0] / 2, e[1]])
        out = np.empty((4, 3))
        out[0] = -u / 2 + delta * v
        out[1] = -delta * u - v / 2 - omega * w
        out[2] = omega * v - e - src
        out[3] = src
        return out.ravel()

    return rhs


# --- integration driver ------------------------------------------------------

def _step_cap(rate: float, spacing: float = math.inf) -> float:
    return min(STEP_FRACTION / max(rate, 1.0), spacing)


def _integrate(rhs, x0, t0, t1, tol, max_step):
    if t1 <= t0:
        return np.asarray(x0, dtype=float)
    sol = solve_ivp(rhs, (t0, t1), np.asarray(x0, dtype=float), method="DOP853",
                    rtol=tol, atol=tol * ABS_TOL_RATIO, max_step=max_step)
    if sol.status != 0:
        raise IntegrationError(
            f"integration failed on [{t0:g}, {t1:g}]: {sol.message}",
            t_failed=float(sol.t[-1]) if sol.t.size else t0,
            diagnostics={"nfev": sol.nfev, "message": sol.message, "tol": tol},
        )
    return sol.y[:, -1]


def _propagate(rhs, x0, fld: ControlField, t_end: float, tol: float):
    """Integrate over [0, t_end], restarting at every field breakpoint."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    support = fld.support_end
    cuts = sorted({0.0, t_end, *[b for b in fld.breakpoints() if 0 < b < t_end]})
    cap = _step_cap(fld.max_rate(), fld.min_spacing())
    x = np.asarray(x0, dtype=float)
    for a, b in zip(cuts[:-1], cuts[1:]):
        x = _integrate(rhs, x, a, b, tol, cap if a < support else math.inf)
    return x


def _decay_time(excited) -> float:
    """Free-decay time for the largest excited amplitude to drop below the floor."""
    peak = float(np.max(np.abs(excited))) if np.size(excited) else 0.0
    if peak <= DECAY_FLOOR:
        return 0.0
    return min(MAX_DECAY, math.log(peak / DECAY_FLOOR))


def _resolve_horizon(fld: ControlField, horizon: Horizon) -> float | None:
    """None means 'auto'; otherwise a concrete end time."""
    if horizon is None or horizon == "auto":
        return None
    horizon = float(horizon)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    return horizon


def _run_with_horizon(rhs, x0, fld, horizon, tol, excited_of):
    """Propagate through the field support, then freely to the horizon."""
    end = _resolve_horizon(fld, horizon)
    support = fld.support_end
    if end is not None and end <= support:
        return _propagate(rhs, x0, fld, end, tol), end
    x = _propagate(rhs, x0, fld, support, tol)
    tail = _decay_time(excited_of(x)) if end is None else end - support
    x = _integrate(rhs, x, support, support + tail, tol, math.inf)
    return x, support + tail


# --- public operations -------------------------------------------------------

def propagate_gf(fld: ControlField, s: float, t_end: float, tol: float = DEFAULT_TOL) -> GFState:
    """Generating-function variables at counting variable ``s`` and time ``t_end``."""
    if not -1.0 <= s <= 1.0:
        raise ValueError("s must lie in [-1, 1]")
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    x = _propagate(_gf_rhs(_field_fn(fld), s), [0.0, 0.0, -0.5, 0.5], fld, t_end, tol)
    return GFState(*map(float, x), s=s, t=t_end)


def _hierarchy_initial(m: int, batch: int = 1) -> np.ndarray:
    x0 = np.zeros((4, m, batch))
    x0[2, 0] = -0.5
    x0[3, 0] = 0.5
    return x0.ravel()


def photon_distribution(fld: ControlField, n_max: int = 8, horizon: Horizon = "auto",
                        tol: float = DEFAULT_TOL,
                        tail_threshold: float = TAIL_THRESHOLD) -> PhotonDistribution:
    """P_0 ... P_nmax from the exact s-hierarchy.

    With ``horizon="auto"`` the field is switched off after its support and
    the emitter decays freely until no excitation is left, so every photon
    the field produced is counted.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    m = n_max + 1

    def excited(x):
        w, y = x.reshape(4, m)[2:]
        return w + y

    x, end = _run_with_horizon(_hierarchy_rhs(_field_fn(fld), m), _hierarchy_initial(m),
                               fld, horizon, tol, excited)
    probs = 2.0 * x.reshape(4, m)[3]
    dist = PhotonDistribution(probs=probs, tail_bound=float(1.0 - probs.sum()),
                              method="hierarchy", horizon=end, tail_threshold=tail_threshold)
    if dist.truncated:
        log.warning("n_max=%d leaves tail probability %.3g above threshold %.3g",
                    n_max, dist.tail_bound, tail_threshold)
    return dist


def moments(fld: ControlField, horizon: Horizon = "auto", tol: float = DEFAULT_TOL) -> Moments:
    """<N>, <N(N-1)> and Mandel Q from the s-derivatives at s = 1."""
    x0 = np.zeros((4, 3))
    x0[2, 0] = -0.5
    x0[3, 0] = 0.5

    def excited(x):
        w, y = x.reshape(4, 3)[2:]
        return w + y

    x, end = _run_with_horizon(_moment_rhs(_field_fn(fld)), x0.ravel(), fld, horizon, tol, excited)
    y = x.reshape(4, 3)[3]
    mean_n, fac2 = 2.0 * y[1], 2.0 * y[2]
    q = mandel_q(mean_n, fac2)
    return Moments(mean_n=float(mean_n), fac2=float(fac2),
                   q=None if math.isnan(q) else float(q), horizon=end)


def raf_distribution(omega: float, delta_rf: float, nu_rf: float, phase: float = 0.0,
                     window: float | None = None, n_max: int = 6, tol: float = DEFAULT_TOL,
                     extended: bool = False) -> PhotonDistribution:
    """Photon statistics of one rapid-adiabatic-following counting window.

    The cw field stays on for the whole window; photons are counted from a
    ground-state start at t = 0 to the end of the window.  ``extended``
    also counts the photons emitted during the free decay afterwards.
    """
    fld = RAF(omega, delta_rf, nu_rf, phase=phase, window=window, extended=extended)
    return photon_distribution(fld, n_max=n_max, horizon="auto" if extended else fld.window,
                               tol=tol)


def raf_distribution_batch(omegas, delta_rfs, nu_rf: float, phase: float = 0.0,
                           window: float | None = None, n_max: int = 2,
                           tol: float = 1e-9) -> np.ndarray:
    """P_0 ... P_nmax for many (omega, delta_rf) pairs sharing one window.

    All members are integrated as one stacked linear system, which amortises
    the integrator overhead; returns an array of shape (len, n_max + 1).
    """
    omegas, delta_rfs = np.broadcast_arrays(np.asarray(omegas, float).ravel(),
                                            np.asarray(delta_rfs, float).ravel())
    proto = RAF(float(omegas.max(initial=0.0)), float(delta_rfs.max(initial=0.0)), nu_rf,
                phase=phase, window=window)
    m, k = n_max + 1, omegas.size
    half = delta_rfs / 2

    def rhs(t, x):
        delta = half * math.cos(nu_rf * t + phase)
        u, v, w, y = x.reshape(4, m, k)
        e = w + y
        e_prev = np.zeros_like(e)
        e_prev[1:] = e[:-1]
        out = np.empty((4, m, k))
        out[0] = -u / 2 + delta * v
        out[1] = -delta * u - v / 2 - omegas * w
        out[2] = omegas * v - (e + e_prev) / 2
        out[3] = (e_prev - e) / 2
        return out.ravel()

    x = _integrate(rhs, _hierarchy_initial(m, k), 0.0, proto.window, tol,
                   _step_cap(proto.max_rate()))
    return 2.0 * x.reshape(4, m, k)[3].T
