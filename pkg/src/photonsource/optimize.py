"""Maximising one- and two-photon emission probabilities.

Square pulses are scored with the exact closed forms, rapid adiabatic
following with the generating-function hierarchy.  Every search is a dense
grid followed by a bracketing refinement; the returned :class:`OptResult`
carries the final bracket and the probe values that certify a local maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .closed_form import cf_pn, p1_extremum_residual
from .exceptions import RootNotFoundError
from .gf import raf_distribution_batch

__all__ = [
    "OptResult",
    "golden_section_max",
    "t_grid",
    "maximize_over_t",
    "maximize_global",
    "maximize_on_resonance",
    "maximize_raf",
    "solve_p1_extremum",
]

_OBJECTIVES = {"p1": 1, "p2": 2}
_POINTS_PER_PERIOD = 20
_LINEAR_T_MAX = 10.0
_MAX_GRID = 400_000
_REFINE_CANDIDATES = 8
_PROBE_SLACK = 1e-13


@dataclass
class OptResult:
    """Best control parameters found and how well they are pinned down."""

    argmax: dict
    value: float
    iterations: int
    bracket: dict
    probes: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        """Objective at the argmax is not below any probe point."""
        return all(v <= self.value + _PROBE_SLACK for _, v in self.probes)

    def as_row(self) -> dict:
        row = dict(self.argmax)
        row["value"] = self.value
        row["iterations"] = self.iterations
        for name, (lo, hi) in self.bracket.items():
            row[f"{name}_bracket"] = hi - lo
        row["certified"] = self.certified
        return row


def _photon_index(objective: str) -> int:
    try:
        return _OBJECTIVES[objective]
    except KeyError:
        raise ValueError(f"objective must be one of {sorted(_OBJECTIVES)}, got {objective!r}") from None


def golden_section_max(f, a: float, b: float, xtol: float = 1e-6, max_iter: int = 200):
    """Maximise a unimodal scalar function on [a, b].

    Returns ``(x, f(x), (lo, hi), iterations)`` with ``hi - lo <= xtol``
    unless ``max_iter`` is reached first.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = float(a), float(b)
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    it = 0
    while hi - lo > xtol and it < max_iter:
        it += 1
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    # the interval ends are candidates too (maxima sitting on a boundary)
    cands = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best_f, best_x = max(cands, key=lambda p: (p[0], -p[1]))
    return best_x, best_f, (lo, hi), it


def t_grid(omega: float, t_lo: float, t_hi: float, n_grid: int = 400) -> np.ndarray:
    """Pulse-length grid: linear up to T = 10, logarithmic above.

    Dense enough to put at least 20 points in every Rabi period 2 pi / omega.
    """
    if not 0 <= t_lo <= t_hi:
        raise ValueError("need 0 <= t_lo <= t_hi")
    if t_lo == t_hi:
        return np.array([t_lo])
    period = 2 * math.pi / omega if omega > 0 else math.inf
    parts = []
    lin_hi = min(t_hi, _LINEAR_T_MAX)
    if t_lo < lin_hi:
        n = max(n_grid, math.ceil(_POINTS_PER_PERIOD * (lin_hi - t_lo) / period) + 1)
        parts.append(np.linspace(t_lo, lin_hi, min(n, _MAX_GRID)))
    log_lo = max(t_lo, _LINEAR_T_MAX)
    if t_hi > log_lo:
        # log spacing ratio r gives local spacing T (r - 1); keep it below period / 20
        n = max(n_grid, math.ceil(math.log(t_hi / log_lo) * t_hi * _POINTS_PER_PERIOD / period) + 1)
        parts.append(np.geomspace(log_lo, t_hi, min(n, _MAX_GRID)))
    return np.unique(np.concatenate(parts))


def _local_maxima(values: np.ndarray) -> np.ndarray:
    n = values.size
    if n == 1:
        return np.array([0])
    left = np.r_[-np.inf, values[:-1]]
    right = np.r_[values[1:], -np.inf]
    return np.flatnonzero((values >= left) & (values >= right))


def _maximize_1d(f, grid: np.ndarray, values: np.ndarray, xtol: float):
    """Refine the best few grid maxima of f; smallest x wins ties."""
    peaks = _local_maxima(values)
    peaks = peaks[np.argsort(-values[peaks], kind="stable")][:_REFINE_CANDIDATES]
    best = None
    iterations = 0
    for i in peaks:
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, grid.size - 1)]
        if a == b:
            x, fx, br, it = a, float(values[i]), (a, b), 0
        else:
            x, fx, br, it = golden_section_max(f, a, b, xtol)
        iterations += it
        if best is None or fx > best[1] + 1e-12 or (abs(fx - best[1]) <= 1e-12 and x < best[0]):
            best = (x, fx, br)
    return best[0], best[1], best[2], iterations


def _probe_1d(f, x, width, lo, hi):
    probes = []
    for dx in (-width, width):
        p = x + dx
        if lo <= p <= hi:
            probes.append(((p,), float(f(p))))
    return probes


def maximize_over_t(objective: str, omega: float, t_range=(0.0, 50.0), n_grid: int = 400,
                    xtol: float = 1e-6) -> OptResult:
    """Best square-pulse length at fixed Rabi frequency."""
    n = _photon_index(objective)
    t_lo, t_hi = map(float, t_range)
    if not (0 <= t_lo <= t_hi <= 2000):
        raise ValueError("t_range must lie within [0, 2000]")

    def f(t):
        return float(cf_pn(omega, t, n))

    grid = t_grid(omega, t_lo, t_hi, n_grid)
    values = np.asarray(cf_pn(omega, grid, n))
    t_best, value, br, it = _maximize_1d(f, grid, values, xtol)
    width = max(br[1] - br[0], xtol)
    return OptResult(
        argmax={"omega": float(omega), "T": float(t_best)},
        value=float(value),
        iterations=it,
        bracket={"T": br},
        probes=_probe_1d(f, t_best, width, t_lo, t_hi),
    )


def _probe_2d(f, x, y, wx, wy, box):
    (xlo, xhi), (ylo, yhi) = box
    probes = []
    for dx in (-wx, 0.0, wx):
        for dy in (-wy, 0.0, wy):
            if dx == 0.0 and dy == 0.0:
                continue
            px, py = x + dx, y + dy
            if xlo <= px <= xhi and ylo <= py <= yhi:
                probes.append(((px, py), float(f(px, py))))
    return probes


def maximize_global(objective: str, omega_range=(0.05, 20.0), t_range=(0.0, 50.0),
                    n_omega: int = 200, n_grid: int = 400, xtol: float = 1e-6,
                    max_sweeps: int = 500) -> OptResult:
    """Best (omega, T) for a square pulse inside a box.

    Nested scan (best T for each omega on a geometric omega grid), then
    coordinate ascent in (omega, T) until both coordinates move less than
    ``xtol``.
    """
    n = _photon_index(objective)
    o_lo, o_hi = map(float, omega_range)
    t_lo, t_hi = map(float, t_range)
    if o_lo == o_hi:
        omegas = np.array([o_lo])
    elif o_lo > 0:
        omegas = np.geomspace(o_lo, o_hi, n_omega)
    else:
        omegas = np.linspace(o_lo, o_hi, n_omega)
    scans = [maximize_over_t(objective, om, (t_lo, t_hi), n_grid, xtol) for om in omegas]
    k = max(range(len(scans)), key=lambda i: (scans[i].value, -scans[i].argmax["T"]))
    om, t = scans[k].argmax["omega"], scans[k].argmax["T"]
    value = scans[k].value
    iterations = sum(s.iterations for s in scans)

    def f(o, tt):
        return float(cf_pn(o, tt, n))

    o_half = 0.5 * (omegas[min(k + 1, omegas.size - 1)] - omegas[max(k - 1, 0)])
    t_half = max(0.05 * t, 10 * xtol)
    o_br, t_br = (om, om), scans[k].bracket["T"]
    for _ in range(max_sweeps):
        moved = 0.0
        if o_lo < o_hi:
            a, b = max(o_lo, om - o_half), min(o_hi, om + o_half)
            o_new, v, o_br, it = golden_section_max(lambda o: f(o, t), a, b, xtol)
            iterations += it
            if v >= value:
                moved = max(moved, abs(o_new - om))
                om, value = o_new, v
        if t_lo < t_hi:
            a, b = max(t_lo, t - t_half), min(t_hi, t + t_half)
            t_new, v, t_br, it = golden_section_max(lambda tt: f(om, tt), a, b, xtol)
            iterations += it
            if v >= value:
                moved = max(moved, abs(t_new - t))
                t, value = t_new, v
        if moved < xtol:
            break
    wx = max(o_br[1] - o_br[0], xtol) if o_lo < o_hi else 0.0
    wy = max(t_br[1] - t_br[0], xtol) if t_lo < t_hi else 0.0
    return OptResult(
        argmax={"omega": float(om), "T": float(t)},
        value=float(value),
        iterations=iterations,
        bracket={"omega": o_br, "T": t_br},
        probes=_probe_2d(f, om, t, wx, wy, ((o_lo, o_hi), (t_lo, t_hi))),
    )


def resonant_omega(omega: float, big_t, turns: float = 2 * math.pi):
    """Rabi frequency closest to ``omega`` with omega * T a multiple of ``turns``."""
    big_t = np.asarray(big_t, dtype=float)
    k = np.maximum(1, np.round(omega * big_t / turns))
    return k * turns / big_t


def maximize_on_resonance(objective: str, omega: float, t_range=(0.5, 10.0),
                          n_grid: int = 4000, xtol: float = 1e-6) -> OptResult:
    """Maximise along the 2 pi n pulse family near a strong Rabi frequency.

    For each T the Rabi frequency is moved to the nearest value with
    omega * T = 2 pi n, so T varies continuously while the pulse area stays
    an exact multiple of 2 pi.
    """
    n = _photon_index(objective)
    t_lo, t_hi = map(float, t_range)

    def f(t):
        return float(cf_pn(resonant_omega(omega, t), t, n))

    grid = np.linspace(t_lo, t_hi, n_grid)
    values = np.asarray(cf_pn(resonant_omega(omega, grid), grid, n))
    t_best, value, br, it = _maximize_1d(f, grid, values, xtol)
    width = max(br[1] - br[0], xtol)
    return OptResult(
        argmax={"omega": float(resonant_omega(omega, t_best)), "T": float(t_best)},
        value=float(value),
        iterations=it,
        bracket={"T": br},
        probes=_probe_1d(f, t_best, width, t_lo, t_hi),
    )


def maximize_raf(objective: str, omega_range, delta_rf_range, nu_rf: float, phase: float = 0.0,
                 window: float | None = None, n_grid=(12, 24), xtol: float = 1e-3,
                 tol: float = 1e-9, max_iter: int = 100) -> OptResult:
    """Best (omega, delta_rf) for rapid adiabatic following.

    A batched grid scan is followed by a shrinking 5 x 5 pattern search:
    the stencil recentres on its best point and contracts by 4 whenever the
    centre wins, until both spacings are below ``xtol``.
    """
    n = _photon_index(objective)
    o_lo, o_hi = map(float, omega_range)
    d_lo, d_hi = map(float, delta_rf_range)
    if o_lo > o_hi or d_lo > d_hi or o_lo < 0 or d_lo < 0:
        raise ValueError("invalid omega / delta_rf ranges")

    def evaluate(oms, dds):
        probs = raf_distribution_batch(oms, dds, nu_rf, phase=phase, window=window,
                                       n_max=n, tol=tol)
        return probs[:, n]

    def axis(lo, hi, k):
        return np.array([lo]) if lo == hi else np.linspace(lo, hi, k)

    o_axis, d_axis = axis(o_lo, o_hi, n_grid[0]), axis(d_lo, d_hi, n_grid[1])
    oo, dd = np.meshgrid(o_axis, d_axis, indexing="ij")
    values = evaluate(oo.ravel(), dd.ravel())
    i = int(np.argmax(values))
    om, de, value = float(oo.ravel()[i]), float(dd.ravel()[i]), float(values[i])
    h_o = (o_axis[1] - o_axis[0]) if o_axis.size > 1 else 0.0
    h_d = (d_axis[1] - d_axis[0]) if d_axis.size > 1 else 0.0
    offsets = np.array([-2, -1, 0, 1, 2], dtype=float)
    iterations = 0
    probes = []
    while iterations < max_iter:
        iterations += 1
        po = np.clip(om + h_o * offsets, o_lo, o_hi)
        pd = np.clip(de + h_d * offsets, d_lo, d_hi)
        so, sd = np.meshgrid(po, pd, indexing="ij")
        pts = np.unique(np.column_stack([so.ravel(), sd.ravel()]), axis=0)
        vals = evaluate(pts[:, 0], pts[:, 1])
        j = int(np.argmax(vals))
        centre = (pts[:, 0] == om) & (pts[:, 1] == de)
        v_centre = float(vals[centre][0])
        if vals[j] > v_centre + 1e-12:
            om, de, value = float(pts[j, 0]), float(pts[j, 1]), float(vals[j])
            continue
        value = v_centre
        probes = [((float(p[0]), float(p[1])), float(v)) for p, v, c in zip(pts, vals, centre)
                  if not c and abs(p[0] - om) <= h_o + 1e-15 and abs(p[1] - de) <= h_d + 1e-15]
        if h_o <= xtol and h_d <= xtol:
            break
        h_o, h_d = h_o / 4, h_d / 4
    return OptResult(
        argmax={"omega": om, "delta_rf": de},
        value=value,
        iterations=iterations,
        bracket={"omega": (max(o_lo, om - h_o), min(o_hi, om + h_o)),
                 "delta_rf": (max(d_lo, de - h_d), min(d_hi, de + h_d))},
        probes=probes,
    )


def solve_p1_extremum(omega: float, root_index: int = 1, xtol: float = 1e-13) -> float:
    """The ``root_index``-th positive pulse length where the strong-field P1 is stationary.

    Roots sit near k pi / omega: odd k are maxima (pi pulses), even k minima.
    """
    if omega <= 0 or root_index < 1:
        raise ValueError("need omega > 0 and root_index >= 1")
    lo = (root_index - 1) * math.pi / omega
    hi = (root_index + 1) * math.pi / omega
    grid = np.linspace(0.0, hi, 64 * (root_index + 1) + 1)
    res = p1_extremum_residual(omega, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], res[:-1], res[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(lambda t: float(p1_extremum_residual(omega, t)), a, b,
                                xtol=xtol, rtol=4 * np.finfo(float).eps))
    if len(roots) < root_index or not lo < roots[root_index - 1] < hi:
        raise RootNotFoundError(
            f"no sign change for root {root_index} of the P1 extremum equation at omega={omega}",
            bracket=(lo, hi), samples=list(zip(grid.tolist(), res.tolist())))
    return roots[root_index - 1]
