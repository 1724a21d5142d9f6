"""Quantum-jump Monte Carlo for photon counting.

Each trajectory evolves an unnormalised two-level wavefunction under the
effective Hamiltonian

    H_eff = [[0, Omega/2], [Omega/2, -delta]] - (i/2) |e><e|      (Gamma = 1)

until its squared norm falls below a uniform random threshold.  At that
instant a photon is emitted, the state collapses to the ground state and a
fresh threshold is drawn.  Trajectories are advanced together as numpy
arrays; the per-step propagator is a fourth-order Magnus exponential, exact
for piecewise-constant fields such as a square pulse.

Randomness is per trajectory: trajectory ``i`` of a run with seed ``s``
draws from ``SeedSequence(s, spawn_key=(i,))``, so results do not depend on
chunking or on the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .params import RAF, ControlField, Piecewise, SquarePulse

__all__ = ["TrajectoryRecord", "McEstimate", "simulate", "wilson_halfwidths", "write_trajectories"]

_SQRT3 = math.sqrt(3.0)
_GAUSS = (0.5 - _SQRT3 / 6, 0.5 + _SQRT3 / 6)
_THRESHOLD_BLOCK = 8
_JUMP_RTOL = 1e-10
_CHUNK = 20_000


@dataclass(frozen=True)
class TrajectoryRecord:
    emission_times: tuple
    final_time: float


@dataclass(frozen=True)
class McEstimate:
    """Empirical photon-number distribution from ``n_traj`` trajectories."""

    probs: np.ndarray
    ci_halfwidths: np.ndarray
    n_traj: int
    seed: int
    counts: np.ndarray = field(repr=False)
    records: list | None = field(default=None, repr=False)

    @property
    def mean_n(self) -> float:
        return float(self.counts.mean())

    @property
    def mean_stderr(self) -> float:
        if self.n_traj < 2:
            return 0.0
        return float(self.counts.std(ddof=1) / math.sqrt(self.n_traj))

    @property
    def fac2(self) -> float:
        c = self.counts.astype(float)
        return float(np.mean(c * (c - 1)))


def wilson_halfwidths(hits, n: int, confidence: float = 0.95) -> np.ndarray:
    """Half-widths of Wilson score intervals for binomial proportions."""
    out = []
    for k in np.asarray(hits, dtype=int):
        ci = binomtest(int(k), n).proportion_ci(confidence_level=confidence, method="wilson")
        out.append(0.5 * (ci.high - ci.low))
    return np.asarray(out)


# --- field and propagators ---------------------------------------------------

def _field_values(fld: ControlField, t):
    t = np.asarray(t, dtype=float)
    inside = (t >= 0) & (t < fld.support_end)
    if isinstance(fld, SquarePulse):
        return np.where(inside, fld.omega, 0.0), np.zeros_like(t)
    if isinstance(fld, RAF):
        return np.where(inside, fld.omega, 0.0), np.where(inside, fld.detuning(t), 0.0)
    if isinstance(fld, Piecewise):
        arr = np.asarray(fld.samples)
        om = np.interp(t, arr[:, 0], arr[:, 1], left=0.0, right=0.0)
        de = np.interp(t, arr[:, 0], arr[:, 2], left=0.0, right=0.0)
        return om, de
    raise TypeError(f"unsupported field type {type(fld).__name__}")


def _generator(omega, delta):
    """-i H_eff as an array of 2x2 matrices."""
    omega = np.asarray(omega, dtype=float)
    gen = np.zeros(omega.shape + (2, 2), dtype=complex)
    gen[..., 0, 1] = gen[..., 1, 0] = -0.5j * omega
    gen[..., 1, 1] = 1j * np.asarray(delta) - 0.5
    return gen


def _expm2(mat):
    """Matrix exponential of a stack of 2x2 matrices."""
    half_tr = 0.5 * (mat[..., 0, 0] + mat[..., 1, 1])
    p = mat[..., 0, 0] - half_tr
    q = np.sqrt(p * p + mat[..., 0, 1] * mat[..., 1, 0])
    small = np.abs(q) < 1e-8
    safe_q = np.where(small, 1.0, q)
    sinhc = np.where(small, 1.0 + q * q / 6.0, np.sinh(safe_q) / safe_q)
    cosh = np.cosh(q)
    scale = np.exp(half_tr)
    out = np.empty_like(mat)
    out[..., 0, 0] = scale * (cosh + sinhc * p)
    out[..., 1, 1] = scale * (cosh - sinhc * p)
    out[..., 0, 1] = scale * sinhc * mat[..., 0, 1]
    out[..., 1, 0] = scale * sinhc * mat[..., 1, 0]
    return out


def _propagator(fld: ControlField, t_a, t_b):
    """Fourth-order Magnus propagator from t_a to t_b (arrays broadcast)."""
    t_a, t_b = np.broadcast_arrays(np.asarray(t_a, float), np.asarray(t_b, float))
    h = t_b - t_a
    a1 = _generator(*_field_values(fld, t_a + _GAUSS[0] * h))
    a2 = _generator(*_field_values(fld, t_a + _GAUSS[1] * h))
    hh = h[..., None, None]
    magnus = 0.5 * hh * (a1 + a2) + (_SQRT3 / 12) * hh**2 * (a2 @ a1 - a1 @ a2)
    return _expm2(magnus)


def _apply(u, psi):
    return np.einsum("...ij,...j->...i", u, psi)


def _norm2(psi):
    return np.einsum("...i,...i->...", psi.real, psi.real) + np.einsum("...i,...i->...", psi.imag, psi.imag)


def _step_grid(fld: ControlField, end: float, max_step: float | None) -> np.ndarray:
    if max_step is None:
        if isinstance(fld, SquarePulse):
            max_step = math.inf
        else:
            max_step = min(0.05, 0.5 / max(fld.max_rate(), 1.0))
    cuts = sorted({0.0, end, *[b for b in fld.breakpoints() if 0 < b < end]})
    grid = [0.0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = 1 if math.isinf(max_step) else max(1, math.ceil((b - a) / max_step))
        grid.extend(np.linspace(a, b, n + 1)[1:].tolist())
    return np.asarray(grid)


# --- per-trajectory random thresholds ----------------------------------------

class _Thresholds:
    def __init__(self, seed: int, indices: np.ndarray):
        self.seed = seed
        self.indices = indices
        self.block = _THRESHOLD_BLOCK
        self.values = np.stack([self._draw(i, self.block) for i in indices])
        self.used = np.zeros(len(indices), dtype=int)

    def _draw(self, traj: int, count: int) -> np.ndarray:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(int(traj),))).random(count)

    def current(self, rows):
        return self.values[rows, self.used[rows]]

    def advance(self, rows):
        self.used[rows] += 1
        if np.any(self.used[rows] >= self.block):
            self.block *= 2
            self.values = np.stack([self._draw(i, self.block) for i in self.indices])


# --- jump-time refinement ----------------------------------------------------

def _locate_jumps(fld, t0, t1, psi0, thresh):
    """Times in (t0, t1) where the squared norm from psi0 falls to thresh.

    Safeguarded Newton on the monotone norm, using d|psi|^2/dt = -|c_e|^2;
    the bracket shrinks every iteration and the loop runs until it is below
    the relative tolerance.
    """
    lo = np.array(t0, dtype=float)
    hi = np.array(t1, dtype=float)
    t = 0.5 * (lo + hi)
    for _ in range(200):
        psi = _apply(_propagator(fld, t0, t), psi0)
        excess = _norm2(psi) - thresh
        above = excess > 0
        lo = np.where(above, t, lo)
        hi = np.where(above, hi, t)
        slope = np.abs(psi[..., 1]) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t + excess / slope
        inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
        t_next = np.where(inside, newton, 0.5 * (lo + hi))
        width = hi - lo
        done = (np.abs(t_next - t) <= _JUMP_RTOL * np.maximum(np.abs(t), 1e-300)) | (
            width <= _JUMP_RTOL * np.maximum(np.abs(hi), 1e-300))
        t = t_next
        if np.all(done):
            break
    return t


# --- simulation --------------------------------------------------------------

def _resolve_end(fld: ControlField, horizon) -> tuple[float, float]:
    """Return (end of field stepping, length of free decay afterwards)."""
    support = fld.support_end
    if horizon is None or horizon == "auto":
        return support, math.inf
    horizon = float(horizon)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if horizon <= support:
        return horizon, 0.0
    return support, horizon - support


def _run_chunk(fld, indices, seed, horizon, max_step, record):
    n = len(indices)
    end, decay = _resolve_end(fld, horizon)
    grid = _step_grid(fld, end, max_step)
    psi = np.zeros((n, 2), dtype=complex)
    psi[:, 0] = 1.0
    counts = np.zeros(n, dtype=int)
    rng = _Thresholds(seed, indices)
    events_row, events_t = [], []

    def emit(rows, times):
        counts[rows] += 1
        rng.advance(rows)
        if record:
            events_row.append(rows.copy())
            events_t.append(np.asarray(times, dtype=float).copy())

    for a, b in zip(grid[:-1], grid[1:]):
        u_step = _propagator(fld, a, b)
        start = psi
        psi = _apply(u_step, start)
        rows = np.flatnonzero(_norm2(psi) < rng.current(np.arange(n)))
        t_start = np.full(rows.size, a)
        psi_start = start[rows]
        while rows.size:
            times = _locate_jumps(fld, t_start, np.full(rows.size, b), psi_start, rng.current(rows))
            emit(rows, times)
            ground = np.zeros((rows.size, 2), dtype=complex)
            ground[:, 0] = 1.0
            after = _apply(_propagator(fld, times, np.full(rows.size, b)), ground)
            psi[rows] = after
            again = _norm2(after) < rng.current(rows)
            rows, t_start, psi_start = rows[again], times[again], ground[again]

    if decay > 0:
        # Field off: |psi|^2(tau) = |c_g|^2 + |c_e|^2 exp(-tau); at most one more jump.
        pg = np.abs(psi[:, 0]) ** 2
        pe = np.abs(psi[:, 1]) ** 2
        thresh = rng.current(np.arange(n))
        floor = pg + (0.0 if math.isinf(decay) else pe * math.exp(-decay))
        rows = np.flatnonzero(floor < thresh)
        if rows.size:
            with np.errstate(divide="ignore"):
                tau = -np.log((thresh[rows] - pg[rows]) / pe[rows])
            emit(rows, end + tau)

    records = None
    if record:
        final = end + decay
        rows = np.concatenate(events_row) if events_row else np.zeros(0, dtype=int)
        times = np.concatenate(events_t) if events_t else np.zeros(0)
        order = np.lexsort((times, rows))
        rows, times = rows[order], times[order]
        split = np.searchsorted(rows, np.arange(n + 1))
        records = [TrajectoryRecord(tuple(times[split[i]:split[i + 1]].tolist()), final)
                   for i in range(n)]
    return counts, records


def simulate(fld: ControlField, horizon="auto", n_traj: int = 10_000, seed: int = 0,
             n_max: int | None = None, record: bool = False, max_step: float | None = None,
             chunk_size: int = _CHUNK, workers: int = 1) -> McEstimate:
    """Estimate P_N by unravelling the emitter dynamics into quantum jumps.

    ``horizon="auto"`` counts every photon: after the field support the
    remaining excitation decays freely and is resolved exactly.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    chunks = [np.arange(i, min(i + chunk_size, n_traj)) for i in range(0, n_traj, chunk_size)]
    args = [(fld, idx, seed, horizon, max_step, record) for idx in chunks]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, *zip(*args)))
    else:
        results = [_run_chunk(*a) for a in args]
    counts = np.concatenate([c for c, _ in results])
    records = [r for _, recs in results for r in recs] if record else None
    top = int(counts.max()) if n_max is None else n_max
    hist = np.bincount(np.minimum(counts, top + 1), minlength=top + 2)[: top + 1]
    return McEstimate(
        probs=hist / n_traj,
        ci_halfwidths=wilson_halfwidths(hist, n_traj),
        n_traj=n_traj,
        seed=seed,
        counts=counts,
        records=records,
    )


def write_trajectories(records, path) -> None:
    """One line per trajectory: emission times (Gamma units), tab-separated."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write("\t".join(f"{t:.12g}" for t in rec.emission_times) + "\n")
