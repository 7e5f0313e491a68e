"""Validated states, Hamiltonian schedules, purification and random ensembles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import get_tolerances
from .errors import BlochOutOfBall, EmptySchedule, NotPSD, ParseError, TraceNotOne, ValidationError
from .numerics import (
    PAULI,
    EigenSystem,
    check_hermitian,
    clamp_spectrum,
    dagger,
    hermitian_eig,
    matrix_from_json,
    matrix_to_json,
    propagator,
    sqrt_psd,
)


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian, unit-trace, positive semi-definite matrix.

    Construct through :func:`validate_density` (or the helpers below);
    the dataclass constructor itself does not check anything.
    """

    mat: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def is_pure(self) -> bool:
        return bool(spectral_decompose(self).values[-1] > 1.0 - get_tolerances().pure)

    def evolve(self, U: np.ndarray) -> "DensityMatrix":
        M = U @ self.mat @ dagger(U)
        return DensityMatrix(0.5 * (M + dagger(M)))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.mat @ op))


def validate_density(M) -> DensityMatrix:
    tol = get_tolerances()
    A = check_hermitian(M, "density matrix")
    tr = float(np.trace(A).real)
    if abs(tr - 1.0) > tol.trace:
        raise TraceNotOne(f"density matrix has trace {tr!r}")
    lowest = float(np.linalg.eigvalsh(A)[0])
    if lowest < -tol.psd:
        raise NotPSD(f"density matrix has negative eigenvalue {lowest:.3e}")
    return DensityMatrix(0.5 * (A + dagger(A)))


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else validate_density(rho)


def density_from_bloch(r: Sequence[float]) -> DensityMatrix:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise BlochOutOfBall(f"Bloch vector must have 3 components, got shape {r.shape}")
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise BlochOutOfBall(f"|r| = {np.linalg.norm(r):.6g} exceeds 1")
    M = 0.5 * (np.eye(2) + sum(c * s for c, s in zip(r, PAULI)))
    return DensityMatrix(M)


def bloch_vector(rho) -> np.ndarray:
    rho = as_density(rho)
    if rho.dim != 2:
        raise ValidationError(f"Bloch vector needs a qubit, got dim {rho.dim}")
    return np.array([np.trace(rho.mat @ s).real for s in PAULI])


def pure_state(psi: Sequence[complex]) -> DensityMatrix:
    v = np.asarray(psi, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def spectral_decompose(rho) -> EigenSystem:
    """Eigen-decomposition with eigenvalues clamped into [0, 1]."""
    rho = as_density(rho)
    eig = hermitian_eig(rho.mat)
    values = np.clip(clamp_spectrum(eig.values, "density matrix"), 0.0, 1.0)
    return EigenSystem(values=values, vectors=eig.vectors)


@dataclass(frozen=True)
class PurifiedState:
    """Pure state on C^d (x) C^d; ``vec[a*d + b]`` is the amplitude of |a>|b>."""

    vec: np.ndarray = field(repr=False)
    dims: tuple[int, int]

    def as_matrix(self) -> np.ndarray:
        return self.vec.reshape(self.dims)

    def apply_local(self, U: np.ndarray) -> "PurifiedState":
        """(U (x) I) |Psi>."""
        return PurifiedState((U @ self.as_matrix()).ravel(), self.dims)

    def overlap(self, other: "PurifiedState") -> complex:
        return complex(np.vdot(self.vec, other.vec))

    def reduced(self) -> np.ndarray:
        """Partial trace over the second factor."""
        X = self.as_matrix()
        return X @ dagger(X)


def purify(rho, local_A: np.ndarray | None = None, local_B: np.ndarray | None = None) -> PurifiedState:
    """(sqrt(rho) V_A (x) V_B) sum_i |i i>, with V_A = V_B = I by default.

    Since (X (x) Y) sum_i |ii> = vec(X Y^T), the amplitude matrix is
    sqrt(rho) V_A V_B^T.
    """
    rho = as_density(rho)
    d = rho.dim
    X = sqrt_psd(rho.mat)
    if local_A is not None:
        X = X @ local_A
    if local_B is not None:
        X = X @ np.asarray(local_B).T
    return PurifiedState(X.ravel(), (d, d))


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Constant or piecewise-linearly sampled Hermitian generator H(t)."""

    kind: str
    constant_H: np.ndarray | None = field(default=None, repr=False)
    times: np.ndarray | None = None
    matrices: tuple[np.ndarray, ...] = field(default=(), repr=False)
    hbar: float = 1.0

    @classmethod
    def constant(cls, H, hbar: float = 1.0) -> "HamiltonianSchedule":
        if hbar <= 0:
            raise ValidationError("hbar must be positive")
        return cls(kind="constant", constant_H=check_hermitian(H, "H"), hbar=float(hbar))

    @classmethod
    def sampled(cls, times: Sequence[float], matrices: Sequence, hbar: float = 1.0) -> "HamiltonianSchedule":
        if len(times) == 0 or len(matrices) == 0:
            raise EmptySchedule("sampled schedule needs at least one (time, H) sample")
        if len(times) != len(matrices):
            raise ValidationError("times and matrices differ in length")
        t = np.asarray(times, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValidationError("sample times must be strictly increasing")
        if hbar <= 0:
            raise ValidationError("hbar must be positive")
        mats = tuple(check_hermitian(H, f"H(t={tk})") for H, tk in zip(matrices, t))
        if len({m.shape for m in mats}) != 1:
            raise ValidationError("sampled Hamiltonians differ in dimension")
        return cls(kind="sampled", times=t, matrices=mats, hbar=float(hbar))

    @property
    def dim(self) -> int:
        return (self.constant_H if self.kind == "constant" else self.matrices[0]).shape[0]

    def at(self, t: float) -> np.ndarray:
        """H(t); linear between samples, held constant outside the sampled range."""
        if self.kind == "constant":
            return self.constant_H
        ts = self.times
        if t <= ts[0]:
            return self.matrices[0]
        if t >= ts[-1]:
            return self.matrices[-1]
        k = int(np.searchsorted(ts, t, side="right")) - 1
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1 - w) * self.matrices[k] + w * self.matrices[k + 1]

    def grid(self, t1: float, t2: float) -> np.ndarray:
        """Integration grid: the sample times inside (t1, t2) plus both ends."""
        if self.kind == "constant":
            return np.array([t1, t2], dtype=float)
        # samples within roundoff of an end would create a near-zero interval
        eps = 1e-12 * max(1.0, abs(t2 - t1))
        inner = self.times[(self.times > t1 + eps) & (self.times < t2 - eps)]
        return np.concatenate([[t1], inner, [t2]])

    def step(self, a: float, b: float) -> np.ndarray:
        """Propagator from a to b using the midpoint Hamiltonian."""
        return propagator(self.at(0.5 * (a + b)), b - a, self.hbar)

    def propagator(self, t1: float, t2: float) -> np.ndarray:
        if self.kind == "constant":
            return propagator(self.constant_H, t2 - t1, self.hbar)
        grid = self.grid(t1, t2)
        U = np.eye(self.dim, dtype=complex)
        for a, b in zip(grid[:-1], grid[1:]):
            U = self.step(a, b) @ U
        return U


def schedule_from_json(obj, hbar: float = 1.0) -> HamiltonianSchedule:
    """``{"H": matrix}`` or ``{"samples": [{"t": x, "H": matrix}, ...]}``."""
    hbar = float(obj.get("hbar", hbar)) if isinstance(obj, dict) else hbar
    if isinstance(obj, dict) and "samples" in obj:
        samples = obj["samples"]
        if not samples:
            raise EmptySchedule("schedule has no samples")
        try:
            times = [float(s["t"]) for s in samples]
            mats = [matrix_from_json(s["H"]) for s in samples]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed schedule sample: {exc}") from exc
        return HamiltonianSchedule.sampled(times, mats, hbar)
    if isinstance(obj, dict) and "H" in obj:
        return HamiltonianSchedule.constant(matrix_from_json(obj["H"]), hbar)
    return HamiltonianSchedule.constant(matrix_from_json(obj), hbar)


def state_from_json(obj) -> DensityMatrix:
    if isinstance(obj, dict) and "bloch" in obj:
        return density_from_bloch(obj["bloch"])
    return validate_density(matrix_from_json(obj))


def state_to_json(rho) -> dict:
    return matrix_to_json(as_density(rho).mat)


# -- random ensembles -----------------------------------------------------------


def _ginibre(dim: int, rng: np.random.Generator, cols: int | None = None) -> np.ndarray:
    cols = dim if cols is None else cols
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt (rank = dim) or induced-measure state G G^dagger / Tr."""
    G = _ginibre(dim, rng, rank)
    M = G @ dagger(G)
    M = 0.5 * (M + dagger(M))
    return DensityMatrix(M / np.trace(M).real)


def random_pure(dim: int, rng: np.random.Generator) -> DensityMatrix:
    return pure_state(_ginibre(dim, rng, 1)[:, 0])


def random_hermitian(dim: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """(G + G^dagger)/2 rescaled to the given operator norm."""
    G = _ginibre(dim, rng)
    H = 0.5 * (G + dagger(G))
    return H * (norm / np.max(np.abs(np.linalg.eigvalsh(H))))


def random_psd_hamiltonian(dim: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    H = random_hermitian(dim, rng, norm)
    return H - np.linalg.eigvalsh(H)[0] * np.eye(dim)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(_ginibre(dim, rng))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_bloch(rng: np.random.Generator, radius: float | None = None) -> np.ndarray:
    """Uniform in the unit ball, or on the sphere of the given radius."""
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    if radius is None:
        radius = rng.random() ** (1 / 3)
    return radius * direction
