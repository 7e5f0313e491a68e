"""Dense complex linear algebra on small Hermitian/unitary matrices.

Matrices are plain ``numpy`` complex arrays of shape ``(n, n)``.  All
exponentials go through the Hermitian eigendecomposition, so propagators
are unitary up to eigensolver round-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .config import get_tolerances
from .errors import DimensionMismatch, NotHermitian, NotPSD, NotUnitary, ParseError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class EigenSystem:
    """Ascending real eigenvalues and the matching column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex array, raising DimensionMismatch otherwise."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def hermiticity_defect(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - dagger(M))))


def check_hermitian(M, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    defect = hermiticity_defect(A)
    if defect > get_tolerances().herm:
        raise NotHermitian(f"{name} is not Hermitian (max |M - M^dagger| = {defect:.3e})")
    return A


def check_unitary(U, name: str = "U") -> np.ndarray:
    A = as_matrix(U, name)
    defect = float(np.max(np.abs(dagger(A) @ A - np.eye(A.shape[0]))))
    if defect > get_tolerances().unit:
        raise NotUnitary(f"{name} is not unitary (max |U^dagger U - I| = {defect:.3e})")
    return A


def check_same_dim(*mats: np.ndarray) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def hermitian_eig(M) -> EigenSystem:
    A = check_hermitian(M)
    # symmetrise so eigh sees an exactly Hermitian input
    values, vectors = np.linalg.eigh(0.5 * (A + dagger(A)))
    return EigenSystem(values=values, vectors=vectors)


def propagator(H, t: float, hbar: float = 1.0) -> np.ndarray:
    """exp(-i H t / hbar) for Hermitian H."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    eig = hermitian_eig(H)
    phases = np.exp(-1j * eig.values * (t / hbar))
    return (eig.vectors * phases) @ eig.vectors.conj().T


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def partial_trace(M, dims: tuple[int, int], keep: Literal["A", "B"] = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator on C^dA (x) C^dB."""
    dA, dB = (int(d) for d in dims)
    A = as_matrix(M)
    if A.shape[0] != dA * dB:
        raise DimensionMismatch(f"matrix of dim {A.shape[0]} is not {dA}x{dB}")
    T = A.reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ibjb->ij", T)
    if keep == "B":
        return np.einsum("aiaj->ij", T)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _spectral_floor(values: np.ndarray) -> float:
    # eigensolver noise level; eigenvalues below it are indistinguishable from 0
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    return 10.0 * values.size * np.finfo(float).eps * scale


def clamp_spectrum(values: np.ndarray, name: str = "matrix") -> np.ndarray:
    tol = get_tolerances()
    if values.size and values[0] < -tol.psd:
        raise NotPSD(f"{name} has eigenvalue {values[0]:.3e} < -{tol.psd:g}")
    out = values.copy()
    out[out < _spectral_floor(values)] = 0.0
    return out


def sqrt_psd(M) -> np.ndarray:
    eig = hermitian_eig(M)
    roots = np.sqrt(clamp_spectrum(eig.values))
    return (eig.vectors * roots) @ eig.vectors.conj().T


def is_psd(M) -> bool:
    return bool(hermitian_eig(M).values[0] >= -get_tolerances().psd)


# -- JSON ---------------------------------------------------------------------


def matrix_to_json(M) -> dict:
    A = as_matrix(M)
    return {"dim": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim", "re", "im"}``; ``im`` may be omitted for real matrices."""
    if not isinstance(obj, dict) or "re" not in obj:
        raise ParseError("matrix must be an object with 're' (and optionally 'im', 'dim')")
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix entries must be numeric: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
        raise ParseError(f"re/im must be equal square arrays, got {re.shape} and {im.shape}")
    if "dim" in obj and int(obj["dim"]) != re.shape[0]:
        raise ParseError(f"declared dim {obj['dim']} does not match {re.shape[0]}")
    return re + 1j * im


def pauli_dot(n: Sequence[float]) -> np.ndarray:
    """n . sigma for a real 3-vector."""
    return sum(float(c) * s for c, s in zip(n, PAULI))
