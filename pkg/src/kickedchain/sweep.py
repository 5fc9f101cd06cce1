"""Grid searches over drive and chain parameters, plus periodicity analysis.

A sweep walks one axis (kick interval, kick amplitude, coupling ratio,
impurity strength, or kick count) and reports, per grid value and per
input family, the maximum fidelity over an exhaustive kick-interval by
kick-count lattice together with where it was attained.  Setting the kick
amplitude to zero switches a point to the no-kick protocol: continuous
evolution probed at integer times 1..5000.

Grid points are independent; the engine may evaluate them on a thread
pool, and rows are always emitted in grid order so results do not depend
on the worker count.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .basis import enumerate_basis, index_of
from .fidelity import (
    KNOWN_STATES,
    OMEGA2_CONVENTIONS,
    bell_fidelity_omega1,
    bell_fidelity_omega2,
    out_of_range,
    single_qubit_fidelity,
)
from .model import (
    ChainParams,
    ImpuritySpec,
    apply_impurity,
    build_hamiltonian,
    impurity_from_strength,
    uniform_profile,
    vacuum_energy,
)
from .propagator import U0_CONVENTIONS, KickSchedule, eigendecompose, kick_step

__all__ = [
    "SWEEP_AXES",
    "DEFAULT_TAU_GRID",
    "CONTINUOUS_TIMES",
    "float_grid",
    "SweepPlan",
    "SweepRow",
    "SweepResult",
    "fidelity_series",
    "continuous_fidelity_series",
    "max_fidelity",
    "sweep_axis",
    "periodogram",
]

SWEEP_AXES = ("tau", "e1", "j2_over_j1", "impurity_ratio", "kick_count")


def float_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive arithmetic grid with decimal-clean values.

    Values are rounded to 12 decimals so a grid like 0.1..10 step 0.1
    carries 0.3, not 0.30000000000000004; the endpoint is included when it
    lies on the lattice within half a step.
    """
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"empty grid: stop {stop} < start {start}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    values = tuple(round(start + i * step, 12) for i in range(count))
    return tuple(v for v in values if v <= stop + step * 1e-9)


DEFAULT_TAU_GRID = float_grid(0.1, 10.0, 0.1)
CONTINUOUS_TIMES = tuple(range(1, 5001))


def _check_grid(grid: Sequence[float], name: str, positive: bool = False) -> tuple[float, ...]:
    values = tuple(float(g) for g in grid)
    if not values:
        raise ValueError(f"{name} must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    if positive and values[0] <= 0:
        raise ValueError(f"{name} values must be positive")
    return values


@dataclass(frozen=True)
class SweepPlan:
    """One swept axis over a chain template.

    ``params`` (plus the optional ``impurity``) describes the point every
    grid value perturbs.  For axis ``j2_over_j1`` the template profile
    must be uniform, since the grid value replaces the ratio of the two
    uniform couplings; for axis ``impurity_ratio`` the template impurity
    supplies kind and site while the grid value sets the strength; for
    axis ``kick_count`` the grid values are kick counts and the search
    runs over ``tau_grid`` at that fixed count.
    """

    params: ChainParams
    axis: str
    grid: tuple[float, ...]
    states: tuple[str, ...] = ("omega0",)
    impurity: ImpuritySpec | None = None
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID
    m_max: int = 500
    e0: float = 0.1
    e1: float = 1.0
    u0_convention: str = "hamiltonian_tau"
    omega2_convention: str = "re_amplitude"
    retain_series: bool = False

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        object.__setattr__(self, "grid", _check_grid(self.grid, "grid"))
        object.__setattr__(self, "tau_grid", _check_grid(self.tau_grid, "tau_grid", positive=True))
        states = tuple(self.states)
        if not states:
            raise ValueError("states must be nonempty")
        for s in states:
            if s not in KNOWN_STATES:
                raise ValueError(f"unknown state {s!r}; expected one of {KNOWN_STATES}")
        if len(set(states)) != len(states):
            raise ValueError("duplicate states in plan")
        object.__setattr__(self, "states", states)
        if self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")
        if self.u0_convention not in U0_CONVENTIONS:
            raise ValueError(f"unknown u0_convention {self.u0_convention!r}")
        if self.omega2_convention not in OMEGA2_CONVENTIONS:
            raise ValueError(f"unknown omega2_convention {self.omega2_convention!r}")
        if self.axis == "impurity_ratio" and self.impurity is None:
            raise ValueError("impurity_ratio axis needs an impurity template (kind and site)")
        if self.axis == "kick_count":
            for g in self.grid:
                if g != int(g) or g < 0:
                    raise ValueError(f"kick_count grid values must be non-negative integers, got {g}")
        if self.axis == "j2_over_j1":
            profile = self.params.profile
            if len(set(profile.j1_bonds)) != 1 or len(set(profile.j2_bonds)) > 1:
                raise ValueError("j2_over_j1 axis requires a uniform coupling template")


@dataclass(frozen=True)
class SweepRow:
    """Maximum fidelity for one grid value and one input family."""

    grid_index: int
    grid_value: float
    state: str
    max_fidelity: float
    argmax_tau: float
    argmax_kicks: int
    out_of_range: bool
    series: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SweepResult:
    """Rows for every (grid value, state) pair, ordered by grid index then plan state order."""

    axis: str
    grid: tuple[float, ...]
    states: tuple[str, ...]
    rows: tuple[SweepRow, ...]


def _probe(state: str, n_sites: int):
    """Sector, source configurations, and target configurations for one input family."""
    if state not in KNOWN_STATES:
        raise ValueError(f"unknown state {state!r}; expected one of {KNOWN_STATES}")
    if state == "omega0":
        return 1, ((1,),), ((n_sites,),)
    if n_sites < 4:
        raise ValueError("Bell transfer needs N >= 4 so the receiver pair is distinct")
    if state == "omega1":
        return 1, ((1,), (2,)), ((n_sites - 1,), (n_sites,))
    cross = tuple((m, n_sites - 1) for m in range(1, n_sites - 1))
    cross += tuple((m, n_sites) for m in range(1, n_sites - 1))
    return 2, ((1, 2),), cross + ((n_sites - 1, n_sites),)


def _score(state: str, amp: np.ndarray, vacuum_angle: float, omega2_convention: str) -> float:
    """Fidelity from the (targets x sources) amplitude block at one instant.

    The single-qubit amplitude is taken in the vacuum gauge (multiplied by
    e^{+i E_vac t}) because its fidelity formula interferes the excitation
    against the vacuum branch.  The Bell formulas consume the raw sector
    amplitudes as printed: omega1 is insensitive to the shared phase and
    omega2's final term is deliberately left in the bare convention, with
    the direct oracle available to quantify the difference.
    """
    if state == "omega0":
        return single_qubit_fidelity(complex(amp[0, 0]) * cmath.exp(1j * vacuum_angle))
    if state == "omega1":
        return bell_fidelity_omega1(amp[0, 0], amp[1, 1], amp[0, 1], amp[1, 0])
    return bell_fidelity_omega2(amp[:-1, 0], complex(amp[-1, 0]), omega2_convention)


def fidelity_series(params: ChainParams, schedule: KickSchedule, state: str,
                    m_max: int | None = None, u0_convention: str = "hamiltonian_tau",
                    omega2_convention: str = "re_amplitude") -> np.ndarray:
    """Fidelity after each of 0..m_max kicks for one input family.

    Entry m is evaluated just after the m-th kick; entry 0 is the
    untouched initial state (0.5 for the single qubit, whose amplitude has
    not yet reached the receiver).
    """
    n = params.profile.n_sites
    if m_max is None:
        m_max = schedule.n_kicks
    if m_max < 0:
        raise ValueError(f"m_max must be non-negative, got {m_max}")
    k, sources, targets = _probe(state, n)
    basis = enumerate_basis(n, k)
    step = kick_step(params, schedule, basis, u0_convention=u0_convention).matrix
    src_idx = [index_of(basis, s) for s in sources]
    tgt_idx = [index_of(basis, t) for t in targets]
    cols = np.zeros((basis.size, len(src_idx)), dtype=complex)
    for j, i in enumerate(src_idx):
        cols[i, j] = 1.0
    e_vac = vacuum_energy(params)
    out = np.empty(m_max + 1, dtype=float)
    for m in range(m_max + 1):
        if m:
            cols = step @ cols
        out[m] = _score(state, cols[tgt_idx, :], e_vac * schedule.tau * m, omega2_convention)
    return out


def continuous_fidelity_series(params: ChainParams, times: Sequence[float], state: str,
                               omega2_convention: str = "re_amplitude") -> np.ndarray:
    """Fidelity under continuous (kick-free) evolution at each requested time.

    All requested amplitudes come from one eigendecomposition per sector,
    so long integer-time grids are cheap.
    """
    n = params.profile.n_sites
    k, sources, targets = _probe(state, n)
    basis = enumerate_basis(n, k)
    w, v = eigendecompose(build_hamiltonian(params, basis))
    src_idx = [index_of(basis, s) for s in sources]
    tgt_idx = [index_of(basis, t) for t in targets]
    # <t|e^{-iHt}|s> = sum_a v[t,a] conj(v[s,a]) e^{-i w_a t}, one weight row per (t, s)
    weights = np.stack([v[ti, :] * v[si, :].conj() for ti in tgt_idx for si in src_idx])
    t_arr = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.outer(w, t_arr))
    amp_all = weights @ phases
    e_vac = vacuum_energy(params)
    out = np.empty(t_arr.size, dtype=float)
    shape = (len(tgt_idx), len(src_idx))
    for j in range(t_arr.size):
        amp = amp_all[:, j].reshape(shape)
        out[j] = _score(state, amp, e_vac * t_arr[j], omega2_convention)
    return out


def max_fidelity(params: ChainParams, state: str,
                 tau_grid: Sequence[float] = DEFAULT_TAU_GRID, m_max: int = 500,
                 e0: float = 0.1, e1: float = 1.0,
                 u0_convention: str = "hamiltonian_tau",
                 omega2_convention: str = "re_amplitude",
                 continuous_times: Sequence[float] = CONTINUOUS_TIMES):
    """Exhaustive maximum of the fidelity over the kick-interval by kick-count lattice.

    Returns (max value, argmax tau, argmax kick count); ties go to the
    smallest tau, then the smallest kick count, so reported argmaxima are
    reproducible.  With e1 = 0 there is no kick at all and the lattice
    degenerates, so the search instead runs over ``continuous_times``
    (integer times by default); the row then reports the equivalent
    stroboscopic interval 1.0 and the argmax time in the kick-count slot.
    """
    taus = _check_grid(tau_grid, "tau_grid", positive=True)
    if e1 == 0.0:
        series = continuous_fidelity_series(params, continuous_times, state,
                                            omega2_convention=omega2_convention)
        best = int(np.argmax(series))
        return float(series[best]), 1.0, int(continuous_times[best])
    best_val, best_tau, best_m = -math.inf, taus[0], 0
    for tau in taus:
        schedule = KickSchedule(tau=tau, e0=e0, e1=e1, n_kicks=m_max)
        series = fidelity_series(params, schedule, state, m_max,
                                 u0_convention=u0_convention,
                                 omega2_convention=omega2_convention)
        m = int(np.argmax(series))
        if series[m] > best_val:
            best_val, best_tau, best_m = float(series[m]), float(tau), m
    return best_val, best_tau, best_m


def _point_setup(plan: SweepPlan, value: float):
    """Chain parameters, kick amplitude, tau lattice, and fixed kick count for one grid value."""
    params = plan.params
    impurity = plan.impurity
    e1 = plan.e1
    taus = plan.tau_grid
    fixed_kicks = None
    if plan.axis == "tau":
        taus = (float(value),)
    elif plan.axis == "e1":
        e1 = float(value)
    elif plan.axis == "j2_over_j1":
        j1 = params.profile.j1_bonds[0]
        profile = uniform_profile(params.profile.n_sites, j1, j1 * float(value))
        params = replace(params, profile=profile)
    elif plan.axis == "impurity_ratio":
        impurity = impurity_from_strength(impurity.kind, impurity.site, float(value))
    elif plan.axis == "kick_count":
        fixed_kicks = int(value)
    if impurity is not None:
        params = replace(params, profile=apply_impurity(params.profile, impurity))
    return params, e1, taus, fixed_kicks


def _evaluate_point(plan: SweepPlan, idx: int) -> list[SweepRow]:
    value = plan.grid[idx]
    params, e1, taus, fixed_kicks = _point_setup(plan, value)
    rows = []
    for state in plan.states:
        series = None
        if fixed_kicks is not None and e1 != 0.0:
            # fixed kick count: search tau only, scoring the series endpoint
            best_val, best_tau = -math.inf, taus[0]
            for tau in taus:
                schedule = KickSchedule(tau=tau, e0=plan.e0, e1=e1, n_kicks=fixed_kicks)
                full = fidelity_series(params, schedule, state, fixed_kicks,
                                       u0_convention=plan.u0_convention,
                                       omega2_convention=plan.omega2_convention)
                if full[-1] > best_val:
                    best_val, best_tau = float(full[-1]), float(tau)
            val, atau, am = best_val, best_tau, fixed_kicks
            if plan.retain_series:
                series = (val,)
        else:
            val, atau, am = max_fidelity(params, state, taus,
                                         plan.m_max, e0=plan.e0, e1=e1,
                                         u0_convention=plan.u0_convention,
                                         omega2_convention=plan.omega2_convention)
            if plan.retain_series:
                if e1 == 0.0:
                    series = tuple(continuous_fidelity_series(
                        params, CONTINUOUS_TIMES, state,
                        omega2_convention=plan.omega2_convention))
                else:
                    schedule = KickSchedule(tau=atau, e0=plan.e0, e1=e1, n_kicks=plan.m_max)
                    series = tuple(fidelity_series(
                        params, schedule, state, plan.m_max,
                        u0_convention=plan.u0_convention,
                        omega2_convention=plan.omega2_convention))
        rows.append(SweepRow(
            grid_index=idx, grid_value=float(value), state=state,
            max_fidelity=val, argmax_tau=atau, argmax_kicks=am,
            out_of_range=out_of_range(val), series=series,
        ))
    return rows


def sweep_axis(plan: SweepPlan, workers: int = 1) -> SweepResult:
    """Evaluate the plan at every grid value; rows ordered by grid index.

    ``workers`` bounds the thread pool; results are bit-identical for any
    worker count because each grid point is computed independently and
    aggregation follows grid order.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    def job(idx: int) -> list[SweepRow]:
        try:
            return _evaluate_point(plan, idx)
        except Exception as exc:
            raise RuntimeError(
                f"sweep point {idx} (grid value {plan.grid[idx]!r}) failed: {exc}"
            ) from exc

    indices = range(len(plan.grid))
    if workers == 1:
        chunks = [job(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, indices))
    rows = tuple(row for chunk in chunks for row in chunk)
    return SweepResult(axis=plan.axis, grid=plan.grid, states=plan.states, rows=rows)


def periodogram(series: Sequence[float]):
    """Discrete Fourier transform of a mean-subtracted fidelity series.

    Returns (frequencies, magnitudes, dominant): frequencies are k/L in
    cycles per sample, magnitudes the unnormalized |DFT|, and dominant the
    nonzero frequency with the largest magnitude (ties to the lowest
    frequency).  A flat series has no dominant frequency and reports None;
    the cutoff is a round-off-level threshold, L*eps*max(1, max|x|).
    Parseval's identity holds as sum(y^2) = sum(|Y|^2)/L.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {x.shape}")
    if x.size < 4:
        raise ValueError(f"series too short for a periodogram: {x.size} < 4")
    y = x - x.mean()
    spectrum = np.fft.fft(y)
    magnitudes = np.abs(spectrum)
    frequencies = np.arange(x.size) / x.size
    threshold = x.size * np.finfo(float).eps * max(1.0, float(np.max(np.abs(x))))
    k = 1 + int(np.argmax(magnitudes[1:]))
    dominant = float(frequencies[k]) if magnitudes[k] > threshold else None
    return frequencies, magnitudes, dominant
