"""Lower bounds on the time of a unitary evolution rho(0) -> rho(T).

Every bound is built from the overlap amplitude Tr(rho U(T)) plus one
spectral statistic of H in the initial state:

* uncertainty type:   T >= hbar s0 / (2 dH)
* mean-energy type:   T >= (pi hbar / 2<H>) (1 - Re + (2/pi) Im),  H >= 0
* Chau type:          T >= hbar (1 - V) / (A sum p|E|)   and
                      T >= hbar (1 - V) / (A E_DE)
* Bures comparator:   T >= hbar Theta_B / (2 dH)

where E_DE is the average absolute deviation of the energy distribution
from its weighted median.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import CHAU_A, get_tolerances
from .errors import DegenerateSpectrum, NotPSD, ZeroMeanEnergy
from .numerics import check_hermitian, check_same_dim, hermitian_eig, propagator, sqrt_psd
from .orbit_metric import (
    angle_from_visibility,
    bargmann_angle,
    energy_moments,
    overlap_amplitude,
    path_length,
    visibility_phase,
)
from .states import HamiltonianSchedule, as_density

# 1 - V below this counts as "no motion": s0 = 0 exactly.
_STILL = 1e-12


@dataclass(frozen=True)
class EnergyDistribution:
    energies: np.ndarray
    probs: np.ndarray

    @property
    def mean_abs(self) -> float:
        return float(np.sum(self.probs * np.abs(self.energies)))


def energy_distribution(rho, H) -> EnergyDistribution:
    """Weights p_n = Tr(P_n rho) on the distinct eigenvalues E_n of H."""
    rho = as_density(rho)
    H = check_hermitian(H, "H")
    check_same_dim(rho.mat, H)
    eig = hermitian_eig(H)
    # diagonal of V^dagger rho V: weight of each eigenvector
    weights = np.einsum("ji,jk,ki->i", eig.vectors.conj(), rho.mat, eig.vectors).real
    breaks = np.flatnonzero(np.diff(eig.values) > get_tolerances().degeneracy) + 1
    groups = np.split(np.arange(eig.values.size), breaks)
    energies = np.array([eig.values[g].mean() for g in groups])
    probs = np.clip(np.array([weights[g].sum() for g in groups]), 0.0, None)
    return EnergyDistribution(energies, probs)


def weighted_median(dist: EnergyDistribution) -> float:
    """Smallest energy whose cumulative probability reaches one half."""
    cum = np.cumsum(dist.probs)
    k = int(np.searchsorted(cum, 0.5 - 1e-12, side="left"))
    return float(dist.energies[min(k, dist.energies.size - 1)])


def aadm(dist: EnergyDistribution) -> float:
    """Average absolute deviation from the weighted median."""
    M = weighted_median(dist)
    return float(np.sum(dist.probs * np.abs(dist.energies - M)))


# -- individual bounds ----------------------------------------------------------


def _as_schedule(H, hbar: float) -> HamiltonianSchedule:
    return H if isinstance(H, HamiltonianSchedule) else HamiltonianSchedule.constant(H, hbar)


def mean_uncertainty(rho, sched: HamiltonianSchedule, T: float) -> float:
    """Time-averaged dH over [0, T]; dH in rho(0) for a constant generator."""
    if sched.kind == "constant":
        return math.sqrt(energy_moments(rho, sched.constant_H)[1])
    return path_length(rho, sched, 0.0, T) * sched.hbar / (2.0 * T)


def _angle_over_rate(angle: float, vis: float, rate: float) -> float:
    if rate < get_tolerances().zero:
        return 0.0 if 1.0 - vis <= _STILL else math.inf
    return angle / rate


def mt_bound(rho, sched, T: float, hbar: float = 1.0) -> float:
    """hbar s0 / (2 dH_avg); +inf when nothing moves the state yet s0 > 0."""
    sched = _as_schedule(sched, hbar)
    U = sched.propagator(0.0, T)
    vis = visibility_phase(rho, U).visibility
    s0 = bargmann_angle(rho, U)
    return _angle_over_rate(sched.hbar * s0, vis, 2.0 * mean_uncertainty(rho, sched, T))


def require_psd(H) -> np.ndarray:
    H = check_hermitian(H, "H")
    lowest = float(hermitian_eig(H).values[0])
    if lowest < -get_tolerances().psd:
        raise NotPSD(f"H has eigenvalue {lowest:.3e} < 0; the mean-energy bound needs H >= 0")
    return H


def ml_bound(rho, H, T: float, hbar: float = 1.0) -> float:
    H = require_psd(H)
    mean_H = energy_moments(rho, H)[0]
    amp = overlap_amplitude(rho, propagator(H, T, hbar))
    numerator = 1.0 - amp.real + (2.0 / math.pi) * amp.imag
    if mean_H <= get_tolerances().zero:
        # <H> = 0 with H >= 0 puts rho in the kernel of H, so nothing moves
        if abs(numerator) <= _STILL:
            return 0.0
        raise ZeroMeanEnergy(f"<H> = {mean_H:.3e}; the mean-energy bound is undefined")
    return max(0.0, (math.pi * hbar / (2.0 * mean_H)) * numerator)


def _chau_value(vis: float, hbar: float, A: float, spread: float, label: str) -> float:
    if 1.0 - vis <= _STILL:
        return 0.0
    if spread < get_tolerances().zero:
        raise DegenerateSpectrum(f"{label} = {spread:.3e}; the bound is undefined")
    return (1.0 - vis) * hbar / (A * spread)


def chau_bounds(rho, H, T: float, hbar: float = 1.0, A: float = CHAU_A) -> tuple[float | None, float | None]:
    """(mean-absolute-energy form, median-deviation form); None where undefined.

    The first form needs H >= 0.
    """
    H = check_hermitian(H, "H")
    vis = visibility_phase(rho, propagator(H, T, hbar)).visibility
    dist = energy_distribution(rho, H)
    chau = None
    if float(hermitian_eig(H).values[0]) >= -get_tolerances().psd:
        try:
            chau = _chau_value(vis, hbar, A, dist.mean_abs, "sum p|E|")
        except DegenerateSpectrum:
            chau = None
    try:
        improved = _chau_value(vis, hbar, A, aadm(dist), "E_DE")
    except DegenerateSpectrum:
        improved = None
    return chau, improved


def improved_chau_bound(rho, H, T: float, hbar: float = 1.0, A: float = CHAU_A) -> float:
    """Median-deviation Chau bound; raises DegenerateSpectrum when E_DE = 0 and V < 1."""
    H = check_hermitian(H, "H")
    vis = visibility_phase(rho, propagator(H, T, hbar)).visibility
    return _chau_value(vis, hbar, A, aadm(energy_distribution(rho, H)), "E_DE")


def root_fidelity(rho1, rho2) -> float:
    """Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), clamped into [0, 1]."""
    a, b = as_density(rho1), as_density(rho2)
    check_same_dim(a.mat, b.mat)
    s = sqrt_psd(a.mat)
    return float(np.clip(np.trace(sqrt_psd(s @ b.mat @ s)).real, 0.0, 1.0))


def bures_angle(rho1, rho2) -> float:
    return 2.0 * float(np.arccos(root_fidelity(rho1, rho2)))


def bures_baseline_bound(rho, H, T: float, hbar: float = 1.0) -> float:
    """hbar Theta_B / (2 dH): the Bures-angle analogue of the uncertainty bound."""
    rho = as_density(rho)
    H = check_hermitian(H, "H")
    theta = bures_angle(rho, rho.evolve(propagator(H, T, hbar)))
    fid = math.cos(theta / 2.0)
    return _angle_over_rate(hbar * theta, fid, 2.0 * math.sqrt(energy_moments(rho, H)[1]))


# -- report ---------------------------------------------------------------------

BASELINE_NOTE = (
    "bures_baseline_bound = hbar*Theta_B/(2*dH), a comparator built from the Bures "
    "angle between rho(0) and rho(T); not a reproduction of any specific published formula"
)


@dataclass
class BoundReport:
    T: float
    hbar: float
    visibility: float
    phase: float
    bargmann_angle: float
    bures_angle: float
    delta_H: float
    mean_H: float
    re_part: float
    im_part: float
    E_DE: float
    mean_abs_energy: float
    h_psd: bool
    mt_bound: float | None = None
    ml_bound: float | None = None
    combined_bound: float | None = None
    chau_bound: float | None = None
    improved_chau_bound: float | None = None
    bures_baseline_bound: float | None = None
    reasons: dict[str, str] = field(default_factory=dict)
    measured: dict | None = None

    BOUND_FIELDS = (
        "mt_bound",
        "ml_bound",
        "combined_bound",
        "chau_bound",
        "improved_chau_bound",
        "bures_baseline_bound",
    )

    def defined_bounds(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in self.BOUND_FIELDS if getattr(self, k) is not None}

    def to_json(self) -> dict:
        out = asdict(self)
        reasons = dict(self.reasons)
        for key, value in out.items():
            if isinstance(value, float) and not math.isfinite(value):
                out[key] = None
                reasons.setdefault(key, "infinite: state has zero speed but nonzero angle")
        out["reasons"] = reasons
        out["baseline_note"] = BASELINE_NOTE
        if out["measured"] is None:
            del out["measured"]
        return out


def combined_bound(rho, H, T: float, hbar: float = 1.0, A: float = CHAU_A) -> BoundReport:
    """Evaluate every bound for one (rho, H, T) instance."""
    rho = as_density(rho)
    H = check_hermitian(H, "H")
    check_same_dim(rho.mat, H)
    U = propagator(H, T, hbar)
    amp = overlap_amplitude(rho, U)
    pv = visibility_phase(rho, U)
    mean_H, var_H = energy_moments(rho, H)
    dist = energy_distribution(rho, H)
    h_psd = float(hermitian_eig(H).values[0]) >= -get_tolerances().psd
    report = BoundReport(
        T=float(T),
        hbar=float(hbar),
        visibility=pv.visibility,
        phase=pv.phase,
        bargmann_angle=bargmann_angle(rho, U),
        bures_angle=bures_angle(rho, rho.evolve(U)),
        delta_H=math.sqrt(var_H),
        mean_H=mean_H,
        re_part=amp.real,
        im_part=amp.imag,
        E_DE=aadm(dist),
        mean_abs_energy=dist.mean_abs,
        h_psd=bool(h_psd),
    )
    report.mt_bound = mt_bound(rho, H, T, hbar)
    if h_psd:
        try:
            report.ml_bound = ml_bound(rho, H, T, hbar)
        except ZeroMeanEnergy as exc:
            report.reasons["ml_bound"] = str(exc)
    else:
        report.reasons["ml_bound"] = "H is not positive semi-definite"
    branches = [b for b in (report.mt_bound, report.ml_bound) if b is not None]
    report.combined_bound = max(branches)
    report.chau_bound, report.improved_chau_bound = chau_bounds(rho, H, T, hbar, A)
    if report.chau_bound is None:
        report.reasons["chau_bound"] = (
            "H is not positive semi-definite" if not h_psd else "sum p|E| = 0"
        )
    if report.improved_chau_bound is None:
        report.reasons["improved_chau_bound"] = "E_DE = 0 (degenerate energy distribution)"
    report.bures_baseline_bound = bures_baseline_bound(rho, H, T, hbar)
    return report
