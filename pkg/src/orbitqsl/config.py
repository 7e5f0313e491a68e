"""Numerical tolerances shared by every module.

The active set lives in a context variable so a caller (or the CLI) can
override individual entries for a block of code without threading a
parameter through every call::

    with override_tolerances(herm=1e-8):
        validate_density(rho)
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass

# Chau's constant in cos x >= 1 - A|x|; the tight value is ~0.72461.
CHAU_A = 0.725


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10  # max |M - M^dagger| entry
    unit: float = 1e-9  # max |U^dagger U - I| entry
    psd: float = 1e-10  # eigenvalues above -psd are clamped to zero
    recon: float = 1e-9
    trace: float = 1e-10
    degeneracy: float = 1e-9  # eigenvalues closer than this share a projector
    kraus: float = 1e-9
    zero: float = 1e-14  # denominators below this are treated as zero
    pure: float = 1e-9  # max eigenvalue > 1 - pure marks a pure state

    def replace(self, **changes: float) -> "Tolerances":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in changes.items()})


_ACTIVE: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "orbitqsl_tolerances", default=Tolerances()
)


def get_tolerances() -> Tolerances:
    return _ACTIVE.get()


@contextlib.contextmanager
def override_tolerances(**changes: float):
    token = _ACTIVE.set(_ACTIVE.get().replace(**changes))
    try:
        yield _ACTIVE.get()
    finally:
        _ACTIVE.reset(token)
