"""Exact unitary evolution within one excitation sector.

Sector dimensions never exceed a few tens here, so every propagator is
built from a full Hermitian eigendecomposition, U = V e^{-i lambda t} V+.
That keeps unitarity at round-off level and gives the spectrum for free.

Kicked driving alternates free evolution under the static Hamiltonian H0
for an interval tau with an instantaneous chirality kick of amplitude e1,
so one period is U = U1 U0 and the state after m kicks is U^m |psi(0)>,
read out just after the kick.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .basis import ExcitationBasis, index_of
from .model import ChainParams, build_hamiltonian, chirality_operator

__all__ = [
    "KickSchedule",
    "UnitaryPropagator",
    "StateVector",
    "eigendecompose",
    "unitary_exp",
    "kick_step",
    "evolve_kicked",
    "amplitude_series",
    "U0_CONVENTIONS",
]

# How the static stretch of one kick period is exponentiated:
#   "hamiltonian_tau": U0 = exp(-i H0 tau) with tau multiplying all of H0,
#       including the static field e0 (free evolution over the interval).
#   "literal_eq5": tau multiplies only the exchange and magnetic terms while
#       the e0 chirality term enters with unit weight, for comparison.
U0_CONVENTIONS = ("hamiltonian_tau", "literal_eq5")


@dataclass(frozen=True)
class KickSchedule:
    """Drive parameters: kick interval tau, static field e0, kick amplitude e1, kick budget."""

    tau: float
    e0: float = 0.0
    e1: float = 0.0
    n_kicks: int = 1

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"kick interval must be positive, got {self.tau}")
        if self.n_kicks < 0:
            raise ValueError(f"kick count must be non-negative, got {self.n_kicks}")


@dataclass(frozen=True)
class UnitaryPropagator:
    """Dense unitary on a fixed sector, tagged with how it was built."""

    matrix: np.ndarray
    sector: tuple[int, int] | None = None
    provenance: tuple[Any, ...] = ()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitude vector over an ExcitationBasis."""

    amplitudes: np.ndarray
    sector: tuple[int, int] | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state vector norm {norm} is not 1 within 1e-10")
        object.__setattr__(self, "amplitudes", amps)


def eigendecompose(h: np.ndarray, hermiticity_tol: float = 1e-12):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Rejects matrices whose Hermiticity defect exceeds ``hermiticity_tol``
    rather than silently symmetrizing them.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    defect = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if defect > hermiticity_tol:
        raise ValueError(f"matrix is not Hermitian (max|H - H^+| = {defect:.3e})")
    return np.linalg.eigh(h)


def _exp_matrix(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h; t = 0 short-circuits to the exact identity."""
    if t == 0.0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = eigendecompose(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def unitary_exp(h: np.ndarray, t: float,
                sector: tuple[int, int] | None = None) -> UnitaryPropagator:
    """Continuous-evolution propagator exp(-i h t)."""
    u = _exp_matrix(np.asarray(h, dtype=complex), t)
    return UnitaryPropagator(u, sector=sector, provenance=("continuous", float(t)))


def kick_step(params: ChainParams, schedule: KickSchedule, basis: ExcitationBasis,
              u0_convention: str = "hamiltonian_tau") -> UnitaryPropagator:
    """One Floquet period U1 U0: free evolution for tau, then a chirality kick.

    The static Hamiltonian is built with the schedule's background field
    ``e0`` (overriding ``params.dm_field``); the kick is exp(-i e1 D) with
    D the bare chirality operator in the same sector.
    """
    if u0_convention not in U0_CONVENTIONS:
        raise ValueError(
            f"unknown u0_convention {u0_convention!r}; expected one of {U0_CONVENTIONS}"
        )
    d = chirality_operator(basis)
    if u0_convention == "hamiltonian_tau":
        h0 = build_hamiltonian(replace(params, dm_field=schedule.e0), basis)
        u0 = _exp_matrix(h0, schedule.tau)
    else:
        # tau weights only the field-free part; the e0 term enters bare.
        h_static = build_hamiltonian(replace(params, dm_field=0.0), basis)
        u0 = _exp_matrix(schedule.tau * h_static + schedule.e0 * d, 1.0)
    u1 = _exp_matrix(d, schedule.e1)
    return UnitaryPropagator(
        u1 @ u0,
        sector=(basis.n_sites, basis.n_excitations),
        provenance=("kick_step", schedule, u0_convention),
    )


def evolve_kicked(step: UnitaryPropagator, n_kicks: int, psi0: StateVector) -> StateVector:
    """Apply the kick-period propagator n_kicks times by repeated matrix-vector products."""
    if n_kicks < 0:
        raise ValueError(f"kick count must be non-negative, got {n_kicks}")
    if step.sector is not None and psi0.sector is not None and step.sector != psi0.sector:
        raise ValueError(f"sector mismatch: step {step.sector} vs state {psi0.sector}")
    if step.matrix.shape[0] != psi0.amplitudes.shape[0]:
        raise ValueError("propagator and state dimensions differ")
    amps = psi0.amplitudes
    for _ in range(n_kicks):
        amps = step.matrix @ amps
    return StateVector(amps, sector=psi0.sector)


def amplitude_series(params: ChainParams, schedule: KickSchedule, basis: ExcitationBasis,
                     source, target, m_max: int,
                     u0_convention: str = "hamiltonian_tau") -> np.ndarray:
    """Stroboscopic transition amplitudes <target|(U1 U0)^m|source>, m = 0..m_max."""
    if m_max < 0:
        raise ValueError(f"m_max must be non-negative, got {m_max}")
    src = index_of(basis, source)
    tgt = index_of(basis, target)
    step = kick_step(params, schedule, basis, u0_convention=u0_convention).matrix
    psi = np.zeros(basis.size, dtype=complex)
    psi[src] = 1.0
    out = np.empty(m_max + 1, dtype=complex)
    out[0] = psi[tgt]
    for m in range(1, m_max + 1):
        psi = step @ psi
        out[m] = psi[tgt]
    return out
