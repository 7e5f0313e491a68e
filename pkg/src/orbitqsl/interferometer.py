"""Two-arm interferometer with a mixed input state.

An ideal 50/50 splitter sends rho through U_upper in one arm and U_lower
in the other; a phase shifter chi sits in the upper arm.  The fraction of
particles reaching detector D is

    p_D(chi) = (1 + V cos(Phi + chi)) / 2,   V e^{i Phi} = Tr(rho U_lower^dagger U_upper),

so a scan over chi recovers the visibility and relative phase.  With
U_lower = I this is the overlap Tr(rho U); with U_upper = U(t) and
U_lower = U(t + tau) the visibility falls as 1 - v^2 tau^2 / 8 and yields
the speed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateFit, InsufficientSettings, ParseError, ValidationError
from .numerics import check_same_dim, check_unitary, dagger, propagator
from .orbit_metric import PhaseVisibility, angle_from_visibility, quantum_speed, wrap_phase
from .states import as_density

DEFAULT_SETTINGS = 12


def default_settings(n: int = DEFAULT_SETTINGS) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def interference_kernel(rho, U_upper, U_lower) -> complex:
    rho = as_density(rho)
    Uu = check_unitary(U_upper, "U_upper")
    Ul = check_unitary(U_lower, "U_lower")
    check_same_dim(rho.mat, Uu, Ul)
    return complex(np.trace(rho.mat @ dagger(Ul) @ Uu))


def _probabilities(kernel: complex, settings: np.ndarray) -> np.ndarray:
    return np.clip(0.5 * (1.0 + np.real(np.exp(1j * settings) * kernel)), 0.0, 1.0)


def detector_probability(rho, U_upper, U_lower, chi: float) -> float:
    """Probability of a click in D; D' fires with the complement."""
    return float(_probabilities(interference_kernel(rho, U_upper, U_lower), np.array([chi]))[0])


@dataclass(frozen=True)
class FringeScan:
    """Detector record for a scan over phase-shifter settings.

    ``shots is None`` marks the exact-probability mode: ``counts_D`` is then
    absent and ``exact_probs`` holds p_D at each setting.
    """

    settings: np.ndarray
    shots: int | None
    counts_D: np.ndarray | None = None
    exact_probs: np.ndarray | None = field(default=None, repr=False)
    seed: int | None = None

    @property
    def frequencies(self) -> np.ndarray:
        if self.shots is None:
            return self.exact_probs
        return self.counts_D / self.shots

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["chi", "counts_D", "counts_Dprime", "shots"])
        for j, chi in enumerate(self.settings):
            if self.shots is None:
                p = float(self.exact_probs[j])
                writer.writerow([repr(float(chi)), repr(p), repr(1.0 - p), "inf"])
            else:
                n = int(self.counts_D[j])
                writer.writerow([repr(float(chi)), n, self.shots - n, self.shots])
        return buf.getvalue()

    def to_json(self) -> dict:
        out = {"settings": self.settings.tolist(), "shots": self.shots, "seed": self.seed}
        if self.shots is None:
            out["exact_probs"] = self.exact_probs.tolist()
        else:
            out["counts_D"] = self.counts_D.tolist()
            out["counts_Dprime"] = (self.shots - self.counts_D).tolist()
        return out

    @classmethod
    def from_csv(cls, text: str) -> "FringeScan":
        try:
            rows = list(csv.DictReader(io.StringIO(text)))
            chi = np.array([float(r["chi"]) for r in rows])
            shots = {r["shots"] for r in rows}
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed fringe CSV: {exc}") from exc
        if len(shots) != 1:
            raise ParseError("fringe CSV mixes different shot counts")
        shot = shots.pop()
        if shot == "inf":
            return cls(chi, None, exact_probs=np.array([float(r["counts_D"]) for r in rows]))
        return cls(chi, int(shot), counts_D=np.array([int(r["counts_D"]) for r in rows]))


def sample_scan(
    rho,
    U_upper,
    U_lower,
    settings: Sequence[float] | None = None,
    shots: int | None = 10_000,
    seed: int = 42,
) -> FringeScan:
    """Binomial detector counts at each setting, or exact probabilities if shots is None.

    Every setting draws from its own child of ``SeedSequence(seed)``, so the
    record does not depend on the order in which settings are processed.
    """
    chi = default_settings() if settings is None else np.asarray(settings, dtype=float)
    probs = _probabilities(interference_kernel(rho, U_upper, U_lower), chi)
    if shots is None:
        return FringeScan(chi, None, exact_probs=probs, seed=seed)
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    children = np.random.SeedSequence(seed).spawn(chi.size)
    counts = np.array(
        [np.random.default_rng(child).binomial(shots, p) for child, p in zip(children, probs)],
        dtype=np.int64,
    )
    return FringeScan(chi, int(shots), counts_D=counts, seed=seed)


@dataclass(frozen=True)
class FringeFit(PhaseVisibility):
    visibility_stderr: float = 0.0
    phase_stderr: float = 0.0
    phase_identifiable: bool = True
    residual_rms: float = 0.0


def fit_fringe(scan: FringeScan) -> FringeFit:
    """Least-squares fit of a + b cos(chi) + c sin(chi) to the detector frequencies."""
    chi = np.asarray(scan.settings, dtype=float)
    if np.unique(np.round(np.mod(chi, 2 * np.pi), 12)).size < 4:
        raise InsufficientSettings("fringe fit needs at least 4 distinct settings")
    if np.ptp(chi) < np.pi - 1e-12:
        raise InsufficientSettings("fringe settings must span at least pi")
    X = np.column_stack([np.ones_like(chi), np.cos(chi), np.sin(chi)])
    if np.linalg.matrix_rank(X) < 3:
        raise DegenerateFit("design matrix is rank deficient")
    y = scan.frequencies
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = chi.size - 3
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(X.T @ X)

    _, b, c = coef
    amp = math.hypot(b, c)
    vis_raw = 2.0 * amp
    noise = 2.0 * math.sqrt(cov[1, 1] + cov[2, 2])
    if amp > 0 and vis_raw > noise:
        g = np.array([2.0 * b / amp, 2.0 * c / amp])
        vis_err = float(math.sqrt(max(0.0, g @ cov[1:, 1:] @ g)))
        h = np.array([c, -b]) / (amp * amp)
        phase_err = float(math.sqrt(max(0.0, h @ cov[1:, 1:] @ h)))
    else:
        vis_err, phase_err = noise, math.pi
    identifiable = vis_raw > 3.0 * vis_err and vis_raw > 1e-14
    phase = wrap_phase(math.atan2(-c, b)) if vis_raw > 1e-14 else 0.0
    return FringeFit(
        visibility=min(1.0, vis_raw),
        phase=phase,
        visibility_stderr=vis_err,
        phase_stderr=phase_err,
        phase_identifiable=bool(identifiable),
        residual_rms=math.sqrt(float(resid @ resid) / chi.size),
    )


def measure_overlap(
    rho, H, T: float, settings=None, shots: int | None = 10_000, seed: int = 42, hbar: float = 1.0
) -> FringeFit:
    """Fringe fit with U(T) in the upper arm and nothing in the lower."""
    rho = as_density(rho)
    U = propagator(H, T, hbar)
    return fit_fringe(sample_scan(rho, U, np.eye(rho.dim), settings, shots, seed))


def measure_bargmann(
    rho, H, T: float, settings=None, shots: int | None = 10_000, seed: int = 42, hbar: float = 1.0
) -> float:
    return angle_from_visibility(measure_overlap(rho, H, T, settings, shots, seed, hbar).visibility)


def bargmann_stderr(fit: FringeFit) -> float:
    """Delta-method error of 2 arccos(V); capped by the angle range."""
    root = math.sqrt(max(0.0, 1.0 - fit.visibility**2))
    if root <= fit.visibility_stderr:
        return 2.0 * math.sqrt(2.0 * fit.visibility_stderr) if fit.visibility_stderr else 0.0
    return min(math.pi, 2.0 * fit.visibility_stderr / root)


@dataclass(frozen=True)
class SpeedEstimate:
    v_hat: float
    tau: float
    v_true: float | None
    stderr: float
    visibility: float


def measure_speed(
    rho,
    H,
    t: float,
    tau: float,
    settings=None,
    shots: int | None = 10_000,
    seed: int = 42,
    hbar: float = 1.0,
) -> SpeedEstimate:
    """v = (2 / tau) sqrt(1 - V^2) from arms U(t) and U(t + tau).

    The relation is a second-order expansion in tau; keep tau * v below
    about 0.05 for a model error under 1e-3.  With finite shots, however,
    1 - V^2 ~ (v tau)^2 / 4 must stand well above the visibility noise, so
    sampled runs need a larger tau than exact ones.
    """
    if tau <= 0:
        raise ValidationError("tau must be positive")
    rho = as_density(rho)
    fit = fit_fringe(sample_scan(rho, propagator(H, t, hbar), propagator(H, t + tau, hbar), settings, shots, seed))
    V = fit.visibility
    root = math.sqrt(max(0.0, 1.0 - V * V))
    v_hat = 2.0 * root / tau
    if fit.visibility_stderr == 0.0:
        err = 0.0
    elif root > fit.visibility_stderr:
        err = 2.0 * V * fit.visibility_stderr / (tau * root)
    else:
        err = 2.0 * math.sqrt(2.0 * fit.visibility_stderr) / tau
    rho_t = rho.evolve(propagator(H, t, hbar))
    return SpeedEstimate(v_hat, tau, quantum_speed(rho_t, H, hbar), err, V)


def measured_bounds(
    rho,
    H,
    T: float,
    tau: float,
    settings=None,
    shots: int | None = 10_000,
    seed: int = 42,
    hbar: float = 1.0,
    mean_H: float | None = None,
) -> dict:
    """Bounds assembled from interferometric estimates alone.

    The mean-energy bound needs <H> as prior knowledge (pass ``mean_H``);
    it is skipped when that is absent.
    """
    seeds = np.random.SeedSequence(seed).generate_state(2)
    fit = measure_overlap(rho, H, T, settings, shots, int(seeds[0]), hbar)
    speed = measure_speed(rho, H, 0.0, tau, settings, shots, int(seeds[1]), hbar)
    s0 = angle_from_visibility(fit.visibility)
    s0_err = bargmann_stderr(fit)
    out = {
        "visibility": fit.visibility,
        "visibility_stderr": fit.visibility_stderr,
        "phase": fit.phase,
        "phase_stderr": fit.phase_stderr,
        "phase_identifiable": fit.phase_identifiable,
        "bargmann_angle": s0,
        "bargmann_angle_stderr": s0_err,
        "speed": speed.v_hat,
        "speed_stderr": speed.stderr,
        "tau": tau,
        "shots": shots,
        "seed": seed,
    }
    if speed.v_hat > 0:
        mt = s0 / speed.v_hat
        rel = math.hypot(s0_err / s0 if s0 else 0.0, speed.stderr / speed.v_hat)
        out["mt_bound"] = mt
        out["mt_bound_stderr"] = mt * rel
    else:
        out["mt_bound"] = None
    if mean_H is not None and mean_H > 0:
        re = fit.visibility * math.cos(fit.phase)
        im = fit.visibility * math.sin(fit.phase)
        scale = math.pi * hbar / (2.0 * mean_H)
        out["ml_bound"] = max(0.0, scale * (1.0 - re + (2.0 / math.pi) * im))
        # d(1 - V cos + (2/pi) V sin) wrt (V, Phi)
        dV = -math.cos(fit.phase) + (2.0 / math.pi) * math.sin(fit.phase)
        dP = fit.visibility * (math.sin(fit.phase) + (2.0 / math.pi) * math.cos(fit.phase))
        out["ml_bound_stderr"] = scale * math.hypot(dV * fit.visibility_stderr, dP * fit.phase_stderr)
    return out


def scan_from_json(obj) -> FringeScan:
    try:
        chi = np.asarray(obj["settings"], dtype=float)
        shots = obj.get("shots")
        if shots is None:
            return FringeScan(chi, None, exact_probs=np.asarray(obj["exact_probs"], dtype=float))
        return FringeScan(chi, int(shots), counts_D=np.asarray(obj["counts_D"], dtype=np.int64), seed=obj.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed fringe scan JSON: {exc}") from exc

