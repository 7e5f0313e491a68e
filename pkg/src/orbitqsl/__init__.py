"""Time bounds from the visibility of Tr(rho U) on unitary orbits of mixed states."""

__version__ = "0.1.0"

from .config import CHAU_A, Tolerances, get_tolerances, override_tolerances
from .cptp import (
    DilatedSystem,
    KrausChannel,
    apply_channel,
    canonical_bound,
    canonical_system,
    cptp_bound,
    dilate,
    effective_speed,
    kraus_channel,
    return_operator,
)
from .errors import OrbitQSLError, ParseError, ValidationError
from .interferometer import FringeFit, FringeScan, fit_fringe, measure_speed, measured_bounds, sample_scan
from .numerics import partial_trace, propagator, sqrt_psd
from .orbit_metric import (
    PhaseVisibility,
    bargmann_angle,
    orbit_distance,
    path_length,
    purified_angle,
    quantum_speed,
    visibility_phase,
)
from .speed_limits import (
    BoundReport,
    bures_angle,
    bures_baseline_bound,
    chau_bounds,
    combined_bound,
    improved_chau_bound,
    ml_bound,
    mt_bound,
    root_fidelity,
)
from .states import DensityMatrix, HamiltonianSchedule, density_from_bloch, pure_state, purify

__all__ = [name for name in dir() if not name.startswith("_")]
