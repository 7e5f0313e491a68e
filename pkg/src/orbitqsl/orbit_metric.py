"""Operation-dependent distance between states on a unitary orbit.

For a state rho and the unitary U that carries it along the orbit, the
complex amplitude ``Tr(rho U)`` carries everything: its modulus is the
interference visibility, its argument the relative phase, and

    D^2 = 4 (1 - |Tr(rho U)|^2),   cos(s0 / 2) = |Tr(rho U)|.

Infinitesimally the squared distance grows as (2 dH / hbar)^2 dt^2, so
``2 dH / hbar`` is the speed along the orbit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import schur

from .errors import ValidationError
from .numerics import check_hermitian, check_same_dim, check_unitary
from .states import DensityMatrix, HamiltonianSchedule, PurifiedState, as_density


@dataclass(frozen=True)
class PhaseVisibility:
    visibility: float
    phase: float


@dataclass(frozen=True)
class OrbitPoint:
    rho: DensityMatrix
    U: np.ndarray

    @classmethod
    def from_origin(cls, rho0, U) -> "OrbitPoint":
        U = check_unitary(U)
        return cls(as_density(rho0).evolve(U), U)


def overlap_amplitude(rho, U) -> complex:
    """Tr(rho U), after checking dimensions and unitarity."""
    rho = as_density(rho)
    U = check_unitary(U)
    check_same_dim(rho.mat, U)
    return complex(np.trace(rho.mat @ U))


def wrap_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    phi = float(np.angle(np.exp(1j * phi)))
    return np.pi if phi <= -np.pi else phi


def visibility_phase(rho, U) -> PhaseVisibility:
    amp = overlap_amplitude(rho, U)
    vis = float(np.clip(abs(amp), 0.0, 1.0))
    phase = 0.0 if vis < 1e-14 else wrap_phase(np.angle(amp))
    return PhaseVisibility(vis, phase)


def visibility_deficit(rho, U) -> float:
    """1 - |Tr(rho U)|^2 without cancellation.

    With U = sum_k l_k |u_k><u_k| and p_k = <u_k|rho|u_k>, the deficit is
    (1/2) sum_jk p_j p_k |l_j - l_k|^2, which stays accurate when U is close
    to the identity and 1 - V^2 is far below machine epsilon relative to 1.
    """
    rho = as_density(rho)
    U = check_unitary(U)
    check_same_dim(rho.mat, U)
    T, Z = schur(U, output="complex")  # normal matrix: T diagonal, Z unitary
    lam = np.diag(T)
    p = np.einsum("ji,jk,ki->i", Z.conj(), rho.mat, Z).real
    gaps = np.abs(lam[:, None] - lam[None, :]) ** 2
    return float(np.clip(0.5 * p @ gaps @ p, 0.0, 1.0))


def orbit_distance(rho, U) -> float:
    """D = 2 sqrt(1 - V^2), in [0, 2]."""
    return 2.0 * float(np.sqrt(visibility_deficit(rho, U)))


def angle_from_visibility(vis: float) -> float:
    return 2.0 * float(np.arccos(np.clip(vis, 0.0, 1.0)))


def bargmann_angle(rho, U) -> float:
    """s0 = 2 arccos |Tr(rho U)|, in [0, pi], evaluated as 2 atan2(sqrt(1 - V^2), V)."""
    vis = visibility_phase(rho, U).visibility
    return 2.0 * float(np.arctan2(np.sqrt(visibility_deficit(rho, U)), vis))


def energy_moments(rho, H) -> tuple[float, float]:
    """(<H>, (dH)^2) in the state rho; the variance is clamped at zero."""
    rho = as_density(rho)
    H = check_hermitian(H, "H")
    check_same_dim(rho.mat, H)
    RH = rho.mat @ H
    mean = float(np.trace(RH).real)
    second = float(np.einsum("ij,ji->", RH, H).real)
    return mean, max(0.0, second - mean * mean)


def energy_uncertainty(rho, H) -> float:
    return float(np.sqrt(energy_moments(rho, H)[1]))


def quantum_speed(rho, H, hbar: float = 1.0) -> float:
    return 2.0 * energy_uncertainty(rho, H) / hbar


def speed_profile(rho0, sched: HamiltonianSchedule, t1: float, t2: float) -> tuple[np.ndarray, np.ndarray]:
    """Speeds on the schedule's integration grid, with rho stepped along it."""
    rho = as_density(rho0)
    grid = sched.grid(t1, t2)
    speeds = np.empty(grid.size)
    for k, t in enumerate(grid):
        if k:
            rho = rho.evolve(sched.step(grid[k - 1], t))
        speeds[k] = quantum_speed(rho, sched.at(t), sched.hbar)
    return grid, speeds


def path_length(rho0, sched: HamiltonianSchedule, t1: float, t2: float) -> float:
    """Total orbit distance (2/hbar) * integral of dH dt over [t1, t2]."""
    if not t2 > t1:
        raise ValidationError(f"path_length needs t2 > t1, got [{t1}, {t2}]")
    if sched.kind == "constant":
        return quantum_speed(rho0, sched.constant_H, sched.hbar) * (t2 - t1)
    grid, speeds = speed_profile(rho0, sched, t1, t2)
    return float(simpson(speeds, x=grid))


def purified_angle(a: PurifiedState, b: PurifiedState) -> float:
    """arccos |<a|b>| between two purified points."""
    return float(np.arccos(np.clip(abs(a.overlap(b)), 0.0, 1.0)))
