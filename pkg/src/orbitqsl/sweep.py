"""Random-instance sweeps that tabulate every bound against the true time."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .config import CHAU_A, Tolerances, get_tolerances, override_tolerances
from .cptp import DilatedSystem, cptp_bound
from .numerics import propagator
from .speed_limits import combined_bound, energy_distribution, root_fidelity
from .states import DensityMatrix, random_density, random_hermitian, random_psd_hamiltonian, random_pure

# spawn-key roots, one per command, so streams never collide across commands
SEED_KEYS = {"sweep": 1, "cptp": 2, "saturation": 3, "interfere": 4, "bound": 5}

ROW_FIELDS = [
    "instance", "dim", "state_kind", "h_psd", "T", "hbar",
    "visibility", "phase", "bargmann_angle", "bures_angle", "fidelity",
    "delta_H", "mean_H", "E_DE",
    "mt_bound", "ml_bound", "combined_bound", "chau_bound", "improved_chau_bound",
    "bures_baseline_bound", "cptp_bound",
    "mt_slack", "ml_slack", "combined_slack", "chau_slack", "improved_chau_slack",
    "bures_baseline_slack", "cptp_slack",
    "spectral_identity_error", "chau_chain_gap",
]


@dataclass(frozen=True)
class SweepConfig:
    dims: tuple[int, ...] = (2, 3, 4)
    count: int = 1000
    t_max: float = 4 * math.pi
    hbar: float = 1.0
    seed: int = 42
    jobs: int = 1


def instance_rng(seed: int, index: int, command: str = "sweep") -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SEED_KEYS[command], index)))


def _state(kind: str, dim: int, rng: np.random.Generator):
    if kind == "pure":
        return random_pure(dim, rng)
    if kind == "maximally_mixed":
        return DensityMatrix(np.eye(dim, dtype=complex) / dim)
    return random_density(dim, rng)


def run_instance(cfg: SweepConfig, index: int) -> dict:
    rng = instance_rng(cfg.seed, index)
    dim = cfg.dims[index % len(cfg.dims)]
    kind = ("pure", "maximally_mixed", "mixed", "mixed", "mixed")[index % 5]
    rho = _state(kind, dim, rng)
    psd = bool(rng.random() < 0.5)
    H = random_psd_hamiltonian(dim, rng) if psd else random_hermitian(dim, rng)
    H = H * rng.uniform(0.2, 2.0)
    T = float(cfg.t_max * (1.0 - rng.random()))  # (0, t_max]
    hbar = cfg.hbar

    rep = combined_bound(rho, H, T, hbar)
    amp = complex(np.trace(rho.mat @ propagator(H, T, hbar)))
    dist = energy_distribution(rho, H)
    spectral = complex(np.sum(dist.probs * np.exp(-1j * dist.energies * T / hbar)))
    chain_gap = None
    if rep.h_psd:
        lower = 1.0 - (CHAU_A * T / hbar) * dist.mean_abs
        middle = abs(float(np.sum(dist.probs * np.cos(dist.energies * T / hbar))))
        chain_gap = min(rep.visibility - middle, middle - lower)

    # dilated instance: the same system dimension plus a qubit ancilla
    H_AB = random_hermitian(2 * dim, rng) * rng.uniform(0.2, 2.0)
    system = DilatedSystem(H_AB, ancilla_dim=2, nu=int(rng.integers(2)), hbar=hbar)
    cptp = cptp_bound(rho, system, T)

    row = {
        "instance": index,
        "dim": dim,
        "state_kind": kind,
        "h_psd": rep.h_psd,
        "T": T,
        "hbar": hbar,
        "visibility": rep.visibility,
        "phase": rep.phase,
        "bargmann_angle": rep.bargmann_angle,
        "bures_angle": rep.bures_angle,
        "fidelity": root_fidelity(rho, rho.evolve(propagator(H, T, hbar))),
        "delta_H": rep.delta_H,
        "mean_H": rep.mean_H,
        "E_DE": rep.E_DE,
        "cptp_bound": cptp,
        "spectral_identity_error": abs(amp - spectral),
        "chau_chain_gap": chain_gap,
    }
    for name in rep.BOUND_FIELDS:
        row[name] = getattr(rep, name)
    for name in list(rep.BOUND_FIELDS) + ["cptp_bound"]:
        value = row[name]
        row[name.replace("_bound", "_slack")] = None if value is None else T - value
    return row


def _run_chunk(args: tuple[SweepConfig, Tolerances, Sequence[int]]) -> list[dict]:
    cfg, tol, indices = args
    with override_tolerances(**asdict(tol)):
        return [run_instance(cfg, i) for i in indices]


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """Rows ordered by instance index regardless of how work is split."""
    indices = list(range(cfg.count))
    if cfg.jobs <= 1:
        return [run_instance(cfg, i) for i in indices]
    tol = get_tolerances()
    chunks = [indices[k :: cfg.jobs] for k in range(cfg.jobs)]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        rows = [row for part in pool.map(_run_chunk, [(cfg, tol, c) for c in chunks]) for row in part]
    return sorted(rows, key=lambda r: r["instance"])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for row in rows:
        writer.writerow([_cell(row.get(k)) for k in ROW_FIELDS])
    return buf.getvalue()


def summarize(rows: Sequence[dict]) -> dict:
    """Worst slack per bound (negative would mean a violated bound)."""
    out = {}
    for name in ROW_FIELDS:
        if name.endswith("_slack"):
            vals = [r[name] for r in rows if r.get(name) is not None]
            out[name] = {"defined": len(vals), "min": min(vals) if vals else None}
    return out
