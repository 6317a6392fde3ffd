"""brittlehom: numerical homogenization of periodic media with brittle inclusions."""

from .brittle_ms import (
    Breakdown,
    MinimizeOptions,
    MSProblem,
    MSSolution,
    brute_force_min,
    minimize,
    ms_energy,
    truncate,
)
from .cell_tensor import EffectiveTensor, crossover_norm, effective_tensor, f0
from .geometry import Geometry, GeometrySpec, Polyline, load_geometry, validate
from .homogenize import (
    HomogReport,
    RegimeSchedule,
    appendix_verify,
    estimate_fhom,
    g_of_t,
    homogeneity_probe,
    regime_sweep,
    small_load_ratio,
)
from .lattice import (
    BondKind,
    BoundaryCondition,
    CrackState,
    Lattice,
    build,
    classify_cells,
)
from .solver import ConductanceField, CorrectorField, bulk_energy, solve_corrector

__version__ = "0.1.0"

__all__ = [
    "BondKind",
    "BoundaryCondition",
    "Breakdown",
    "ConductanceField",
    "CorrectorField",
    "CrackState",
    "EffectiveTensor",
    "Geometry",
    "GeometrySpec",
    "HomogReport",
    "Lattice",
    "MSProblem",
    "MSSolution",
    "MinimizeOptions",
    "Polyline",
    "RegimeSchedule",
    "appendix_verify",
    "brute_force_min",
    "build",
    "bulk_energy",
    "classify_cells",
    "crossover_norm",
    "effective_tensor",
    "estimate_fhom",
    "f0",
    "g_of_t",
    "homogeneity_probe",
    "load_geometry",
    "minimize",
    "ms_energy",
    "regime_sweep",
    "small_load_ratio",
    "solve_corrector",
    "truncate",
    "validate",
]
