"""Speed limits for channels realised as a unitary on system (x) ancilla.

With the ancilla prepared in |nu>, the channel's Kraus operators are the
blocks ``E_k = <k| U_AB(T) |nu>`` and the relevant overlap amplitude is
``Tr(rho E_nu(T))``.  The speed uses the ancilla-projected operators
``<nu|H_AB|nu>`` and ``<nu|H_AB^2|nu>``, which are *not* related by squaring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import get_tolerances
from .errors import DegenerateDenominator, DimensionMismatch, IncompleteKraus, ParseError, ValidationError
from .numerics import PAULI, as_matrix, check_hermitian, dagger, kron, matrix_from_json, matrix_to_json, propagator
from .orbit_metric import angle_from_visibility
from .states import DensityMatrix, as_density

_STILL = 1e-12


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness_defect(self) -> float:
        S = sum(dagger(E) @ E for E in self.kraus)
        return float(np.max(np.abs(S - np.eye(self.dim))))

    def to_json(self) -> dict:
        return {"kraus": [matrix_to_json(E) for E in self.kraus]}


def kraus_channel(ops: Sequence) -> KrausChannel:
    """Build a channel, checking sum E^dagger E = I."""
    if len(ops) == 0:
        raise IncompleteKraus("channel needs at least one Kraus operator")
    mats = tuple(as_matrix(E, "Kraus operator") for E in ops)
    if len({m.shape for m in mats}) != 1:
        raise DimensionMismatch("Kraus operators differ in shape")
    ch = KrausChannel(mats)
    defect = ch.completeness_defect()
    if defect > get_tolerances().kraus:
        raise IncompleteKraus(f"sum E^dagger E deviates from I by {defect:.3e}")
    return ch


def channel_from_json(obj) -> KrausChannel:
    try:
        return kraus_channel([matrix_from_json(m) for m in obj["kraus"]])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"channel JSON needs a 'kraus' list: {exc}") from exc


def apply_channel(rho, ch: KrausChannel) -> DensityMatrix:
    rho = as_density(rho)
    if ch.dim != rho.dim:
        raise DimensionMismatch(f"channel acts on dim {ch.dim}, state has dim {rho.dim}")
    defect = ch.completeness_defect()
    if defect > get_tolerances().kraus:
        raise IncompleteKraus(f"sum E^dagger E deviates from I by {defect:.3e}")
    out = sum(E @ rho.mat @ dagger(E) for E in ch.kraus)
    return DensityMatrix(0.5 * (out + dagger(out)))


@dataclass(frozen=True)
class DilatedSystem:
    """Hermitian H_AB on C^dA (x) C^dB with the ancilla starting in a pure state.

    The default ancilla state is the basis vector |nu>; passing
    ``ancilla_state`` replaces it by an arbitrary normalised vector |e>.
    """

    H_AB: np.ndarray = field(repr=False)
    ancilla_dim: int
    nu: int = 0
    hbar: float = 1.0
    ancilla_state: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        H = check_hermitian(self.H_AB, "H_AB")
        object.__setattr__(self, "H_AB", H)
        if self.ancilla_dim < 1 or H.shape[0] % self.ancilla_dim:
            raise DimensionMismatch(f"dim {H.shape[0]} is not divisible by ancilla dim {self.ancilla_dim}")
        if not 0 <= self.nu < self.ancilla_dim:
            raise ValidationError(f"ancilla index {self.nu} outside [0, {self.ancilla_dim})")
        if self.hbar <= 0:
            raise ValidationError("hbar must be positive")
        if self.ancilla_state is not None:
            e = np.asarray(self.ancilla_state, dtype=complex).ravel()
            if e.size != self.ancilla_dim:
                raise DimensionMismatch("ancilla_state has the wrong length")
            object.__setattr__(self, "ancilla_state", e / np.linalg.norm(e))

    @property
    def system_dim(self) -> int:
        return self.H_AB.shape[0] // self.ancilla_dim

    @property
    def dims(self) -> tuple[int, int]:
        return self.system_dim, self.ancilla_dim

    def ancilla_vector(self) -> np.ndarray:
        if self.ancilla_state is not None:
            return self.ancilla_state
        e = np.zeros(self.ancilla_dim, dtype=complex)
        e[self.nu] = 1.0
        return e

    def unitary(self, T: float) -> np.ndarray:
        return propagator(self.H_AB, T, self.hbar)

    def initial_joint_state(self, rho) -> np.ndarray:
        e = self.ancilla_vector()
        return kron(as_density(rho).mat, np.outer(e, e.conj()))


def system_from_json(obj, hbar: float = 1.0) -> DilatedSystem:
    try:
        return DilatedSystem(
            H_AB=matrix_from_json(obj["H_AB"]),
            ancilla_dim=int(obj["dB"]),
            nu=int(obj.get("nu", 0)),
            hbar=float(obj.get("hbar", hbar)),
            ancilla_state=None if obj.get("ancilla_state") is None else _vector_from_json(obj["ancilla_state"]),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"dilated system JSON needs H_AB and dB: {exc}") from exc


def _vector_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
    return np.asarray(obj, dtype=complex)


def ancilla_block(M: np.ndarray, dims: tuple[int, int], bra: np.ndarray, ket: np.ndarray) -> np.ndarray:
    """<bra|_B M |ket>_B as an operator on the system factor."""
    dA, dB = dims
    M4 = M.reshape(dA, dB, dA, dB)
    return np.einsum("i,aibj,j->ab", bra.conj(), M4, ket)


def dilate(sys: DilatedSystem, T: float) -> KrausChannel:
    """Kraus operators E_k = <k|U_AB(T)|nu>, one per ancilla basis state."""
    U = sys.unitary(T)
    e = sys.ancilla_vector()
    basis = np.eye(sys.ancilla_dim, dtype=complex)
    ops = tuple(ancilla_block(U, sys.dims, basis[k], e) for k in range(sys.ancilla_dim))
    ch = KrausChannel(ops)
    defect = ch.completeness_defect()
    if defect > get_tolerances().kraus:
        raise IncompleteKraus(f"dilation produced incomplete Kraus set ({defect:.3e})")
    return ch


def return_operator(sys: DilatedSystem, T: float) -> np.ndarray:
    """E_nu(T) = <nu|U_AB(T)|nu>; equals sum_k c_k^* E_k for a general |e>."""
    e = sys.ancilla_vector()
    return ancilla_block(sys.unitary(T), sys.dims, e, e)


def effective_hamiltonians(sys: DilatedSystem) -> tuple[np.ndarray, np.ndarray]:
    """(<nu|H_AB|nu>, <nu|H_AB^2|nu>)."""
    e = sys.ancilla_vector()
    H = sys.H_AB
    return ancilla_block(H, sys.dims, e, e), ancilla_block(H @ H, sys.dims, e, e)


def effective_speed(rho, sys: DilatedSystem) -> float:
    rho = as_density(rho)
    if rho.dim != sys.system_dim:
        raise DimensionMismatch(f"state dim {rho.dim} != system dim {sys.system_dim}")
    H1, H2 = effective_hamiltonians(sys)
    mean = float(np.trace(rho.mat @ H1).real)
    second = float(np.trace(rho.mat @ H2).real)
    return 2.0 * math.sqrt(max(0.0, second - mean * mean)) / sys.hbar


def channel_visibility(rho, sys: DilatedSystem, T: float) -> float:
    rho = as_density(rho)
    if rho.dim != sys.system_dim:
        raise DimensionMismatch(f"state dim {rho.dim} != system dim {sys.system_dim}")
    return float(np.clip(abs(np.trace(rho.mat @ return_operator(sys, T))), 0.0, 1.0))


def cptp_bound(rho, sys: DilatedSystem, T: float) -> float:
    """(2 / v) arccos |Tr(rho E_nu(T))|; +inf if v = 0 while the overlap has moved."""
    vis = channel_visibility(rho, sys, T)
    v = effective_speed(rho, sys)
    if v < get_tolerances().zero:
        return 0.0 if 1.0 - vis <= _STILL else math.inf
    return angle_from_visibility(vis) / v


# -- canonical two-qubit interaction --------------------------------------------


def canonical_hamiltonian(mu: Sequence[float]) -> np.ndarray:
    """sum_i mu_i sigma_i (x) sigma_i."""
    return sum(float(m) * kron(s, s) for m, s in zip(mu, PAULI))


def canonical_system(mu: Sequence[float], hbar: float = 1.0) -> DilatedSystem:
    return DilatedSystem(canonical_hamiltonian(mu), ancilla_dim=2, nu=0, hbar=hbar)


def canonical_overlap(mu: Sequence[float], r3: float, T: float, hbar: float = 1.0) -> float:
    """K: the closed-form |Tr(rho E_0(T))| for the canonical interaction."""
    t1, t2, t3 = (float(m) * T / hbar for m in mu)
    c1, c2, c3 = math.cos(t1), math.cos(t2), math.cos(t3)
    s1, s2, s3 = math.sin(t1), math.sin(t2), math.sin(t3)
    re = c1 * c2 * c3 + r3 * s1 * s2 * c3
    im = s1 * s2 * s3 + r3 * c1 * c2 * s3
    return min(1.0, max(0.0, math.sqrt(re * re + im * im)))


def canonical_speed_scale(mu: Sequence[float], r3: float) -> float:
    """sqrt(mu1^2 + mu2^2 + mu3^2 (1 - r3^2) - 2 mu1 mu2 r3)."""
    m1, m2, m3 = (float(m) for m in mu)
    return math.sqrt(max(0.0, m1 * m1 + m2 * m2 + m3 * m3 * (1.0 - r3 * r3) - 2.0 * m1 * m2 * r3))


def canonical_bound(mu: Sequence[float], r3: float, T: float, hbar: float = 1.0) -> float:
    if abs(r3) > 1.0 + 1e-12:
        raise ValidationError(f"|r3| = {abs(r3)} exceeds 1")
    K = canonical_overlap(mu, r3, T, hbar)
    denom = canonical_speed_scale(mu, r3)
    if denom < get_tolerances().zero:
        if 1.0 - K <= _STILL:
            return 0.0
        raise DegenerateDenominator("speed scale vanishes while the overlap has moved")
    return hbar * math.acos(K) / denom
