"""Subcritical limit density f0 and the effective tensor A0 of the periodic cell."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .geometry import Geometry
from .lattice import BoundaryCondition, Lattice, build
from .solver import DEFAULT_TOL, ConductanceField, bulk_energy, solve_corrector
from .workers import parallel_map

# f0 on a unit slope within this of 1 counts as no drop at all.
CROSSOVER_GAP_TOL = 1e-12


@dataclass(eq=False)
class EffectiveTensor:
    """Symmetric matrix A0 with f0(xi) = A0 xi . xi, at grid resolution m."""

    A0: np.ndarray
    m: int
    fingerprint: str
    area_E: float
    perim_E: float

    def quadratic(self, xi) -> float:
        xi = np.asarray(xi, dtype=float)
        return float(xi @ self.A0 @ xi)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.A0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "A0": self.A0.tolist(),
            "m": self.m,
            "area_E": self.area_E,
            "perim_E": self.perim_E,
            "fingerprint": self.fingerprint,
        }


def cell_lattice(geom: Geometry, m: int) -> Lattice:
    """Periodic unit cell with E voided (perforated cell Q minus E), F Breakable."""
    return build(geom, t=1, m=m, bc=BoundaryCondition.PERIODIC, void_inclusions=True)


def f0_on(lat: Lattice, xi, tol: float = DEFAULT_TOL) -> float:
    """f0 on a prebuilt perforated cell: F is cut for free, E carries no energy."""
    cond = ConductanceField.subcritical(lat)
    w = solve_corrector(lat, cond, xi, tol=tol)
    return bulk_energy(lat, cond, w) / lat.cells


def f0(geom: Geometry, xi, m: int, tol: float = DEFAULT_TOL) -> float:
    """
    Subcritical energy density f0(xi).

    The minimum over periodic correctors of the bulk energy on Q minus (E u F).

    Args:
        geom: Validated geometry.
        xi: Slope in R^2.
        m: Grid resolution (m * delta >= 2).
        tol: Solver tolerance.

    Returns:
        The minimized bulk energy density.
    """
    return f0_on(cell_lattice(geom, m), xi, tol=tol)


def effective_tensor(
    geom: Geometry, m: int, tol: float = DEFAULT_TOL
) -> EffectiveTensor:
    """
    Assemble A0 from f0 on e1, e2 and e1 + e2 by polarization.

    A0[i][j] = (f0(e_i + e_j) - f0(e_i) - f0(e_j)) / 2 for i != j; the
    result is symmetrized.
    """
    lat = cell_lattice(geom, m)
    loads = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0])]
    f11, f22, f_sum = parallel_map(lambda xi: f0_on(lat, xi, tol=tol), loads)
    off = (f_sum - f11 - f22) / 2.0
    A0 = np.array([[f11, off], [off, f22]])
    A0 = (A0 + A0.T) / 2.0
    return EffectiveTensor(
        A0=A0,
        m=m,
        fingerprint=geom.fingerprint,
        area_E=geom.area_E,
        perim_E=geom.perim_E,
    )


def crossover_norm(
    geom: Geometry, direction, m: int, tol: float = DEFAULT_TOL
) -> float:
    """
    Load magnitude above which f0(xi) + P(E, Q) < |xi|^2 along a direction.

    Since f0 is quadratic, for the unit direction d this is
    sqrt(P / (1 - f0(d))), or +inf when f0(d) = 1.
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return crossover_from_f0(f0(geom, d, m, tol=tol), geom.perim_E)


def crossover_from_f0(f0_unit: float, perim_E: float) -> float:
    """Crossover load from f0 at a unit slope; +inf when f0 does not drop below 1."""
    gap = 1.0 - f0_unit
    if gap <= CROSSOVER_GAP_TOL:
        return float("inf")
    return float(np.sqrt(perim_E / gap))
