"""Shipped fixture documents, oracle regeneration and the `verify` invariant checks."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .brittle_ms import (
    MinimizeOptions,
    MSProblem,
    brute_force_min,
    minimize,
    ms_energy,
    truncate,
)
from .cell_tensor import effective_tensor, f0
from .geometry import Geometry, GeometrySpec, validate
from .lattice import BoundaryCondition, CrackState, build
from .output import write_json
from .solver import CorrectorField

logger = logging.getLogger(__name__)

ORACLE_GAP_TOL = 1e-9
SCALING_LAMBDAS = (0.5, 2.0, 4.0)
TRUNCATION_TRIALS = 25


def geometry_document(data: dict[str, Any]) -> dict[str, Any]:
    """The geometry part of either a bare geometry document or a fixture document."""
    return data.get("geometry", data)


def read_geometry(path: str | Path) -> Geometry:
    """Read and validate the geometry of a geometry or fixture JSON file."""
    with open(path, encoding="utf-8") as f:
        return validate(GeometrySpec.from_dict(geometry_document(json.load(f))))


def weight_key(weight: float) -> str:
    return repr(float(weight))


@dataclass
class Fixture:
    """A geometry with an optional oracle problem and its expected totals."""

    name: str
    geometry: Geometry
    description: str = ""
    problem: dict[str, Any] | None = None
    expected: dict[str, float] = field(default_factory=dict)
    tensor: dict[str, Any] | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any], name: str = "") -> Fixture:
        return cls(
            name=data.get("name", name),
            geometry=validate(GeometrySpec.from_dict(geometry_document(data))),
            description=data.get("description", ""),
            problem=data.get("problem"),
            expected={str(k): float(v) for k, v in data.get("expected", {}).items()},
            tensor=data.get("tensor"),
        )

    @classmethod
    def load(cls, path: str | Path) -> Fixture:
        path = Path(path)
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f), name=path.stem)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "name": self.name,
            "description": self.description,
            "geometry": self.geometry.spec.to_dict(),
        }
        if self.problem is not None:
            data["problem"] = self.problem
            data["expected"] = dict(self.expected)
        if self.tensor is not None:
            data["tensor"] = self.tensor
        return data

    def save(self, path: str | Path) -> None:
        write_json(path, self.to_dict())

    @property
    def surface_weights(self) -> list[float]:
        return [float(w) for w in (self.problem or {}).get("surface_weights", [])]

    def ms_problem(self, surface_weight: float, scale: float = 1.0) -> MSProblem:
        """The fixture's crack problem at one surface weight."""
        if self.problem is None:
            raise ValueError(f"Fixture {self.name} has no problem section")
        lat = build(
            self.geometry,
            t=int(self.problem.get("t", 1)),
            m=int(self.problem["m"]),
            bc=self.problem.get("bc", BoundaryCondition.DIRICHLET_ZERO.value),
        )
        xi = np.asarray(self.problem["xi"], dtype=float) * scale
        return MSProblem(lat, xi, surface_weight)


def shipped_fixtures() -> list[Path]:
    """Paths of the fixture documents bundled with the package, sorted by name."""
    data_dir = resources.files("brittlehom") / "data"
    return sorted(Path(str(p)) for p in data_dir.iterdir() if p.name.endswith(".json"))


def regen_oracle(fixture: Fixture) -> Fixture:
    """Recompute the expected total of every surface weight with the exact oracle."""
    expected = {}
    for weight in fixture.surface_weights:
        sol = brute_force_min(fixture.ms_problem(weight))
        expected[weight_key(weight)] = sol.total
        logger.info(
            "%s: weight %g -> oracle total %.17g", fixture.name, weight, sol.total
        )
    fixture.expected = expected
    return fixture


def _check_tensor(fixture: Fixture) -> list[str]:
    errors = []
    geom = fixture.geometry
    m = int(fixture.tensor.get("m", 32))
    tensor = effective_tensor(geom, m)
    A0 = tensor.A0
    if abs(A0[0, 1] - A0[1, 0]) > 1e-8:
        errors.append(f"{fixture.name}: A0 not symmetric ({A0[0, 1]} vs {A0[1, 0]})")
    eig = tensor.eigenvalues()
    if eig.min() <= 0 or eig.max() > 1 + 1e-6:
        errors.append(f"{fixture.name}: A0 eigenvalues {eig.tolist()} outside (0, 1]")
    rng = np.random.default_rng(0)
    for _ in range(3):
        xi = rng.normal(size=2)
        value = f0(geom, xi, m)
        if abs(value - tensor.quadratic(xi)) > 1e-6 * max(1.0, abs(value)):
            errors.append(
                f"{fixture.name}: f0({xi.tolist()}) = {value} is not A0 xi . xi"
            )
    return errors


def _check_problem(fixture: Fixture, opts: MinimizeOptions) -> list[str]:
    errors = []
    name = fixture.name
    measures = []
    for k, weight in enumerate(fixture.surface_weights):
        p = fixture.ms_problem(weight)
        oracle = brute_force_min(p)
        heuristic = minimize(p, opts)
        measures.append(oracle.crack.measure)
        gap = heuristic.total - oracle.total
        if gap < -ORACLE_GAP_TOL:
            errors.append(f"{name}@{weight}: minimize beat the oracle by {-gap:.3e}")
        if gap > ORACLE_GAP_TOL:
            errors.append(f"{name}@{weight}: minimize misses the oracle by {gap:.3e}")
        key = weight_key(weight)
        expected = fixture.expected.get(key)
        if expected is None:
            errors.append(f"{name}@{weight}: no expected total (run --regen-oracle)")
        elif abs(oracle.total - expected) > ORACLE_GAP_TOL:
            errors.append(
                f"{name}@{weight}: oracle total {oracle.total!r} != expected "
                f"{expected!r}"
            )

        lat = p.lattice
        zero = CorrectorField.zero(lat, p.xi)
        affine = ms_energy(p, zero, CrackState.empty(lat)).total
        if weight * lat.h > affine * lat.cells and len(oracle.crack):
            errors.append(f"{name}@{weight}: crack opened above the breaking threshold")

        for lam in SCALING_LAMBDAS:
            scaled = brute_force_min(fixture.ms_problem(weight, scale=lam)).total
            bound = lam * lam * oracle.total
            slack = 1e-9 * max(1.0, bound)
            if lam >= 1 and scaled > bound + slack:
                errors.append(f"{name}@{weight}: E({lam} xi) = {scaled} > {bound}")
            if lam < 1 and scaled < bound - slack:
                errors.append(f"{name}@{weight}: E({lam} xi) = {scaled} < {bound}")

        if lat.bc is BoundaryCondition.DIRICHLET_ZERO:
            rng = np.random.default_rng([0x7A, k])
            w = oracle.corrector
            for _ in range(TRUNCATION_TRIALS):
                values = w.values + rng.normal(scale=0.1, size=lat.n_nodes)
                noisy = CorrectorField(lattice=lat, xi=w.xi, values=values)
                lo, hi = np.sort(rng.normal(size=2))
                before = ms_energy(p, noisy, oracle.crack).total
                after = ms_energy(p, truncate(noisy, lo, hi), oracle.crack).total
                if after > before + 1e-12 * max(1.0, before):
                    errors.append(f"{name}@{weight}: truncation raised the energy")
                    break

    order = np.argsort(fixture.surface_weights)
    sorted_measures = [measures[i] for i in order]
    if any(b > a + 1e-12 for a, b in zip(sorted_measures, sorted_measures[1:])):
        errors.append(
            f"{name}: crack measure grows with the surface weight: {sorted_measures}"
        )
    return errors


def verify_fixture(fixture: Fixture, opts: MinimizeOptions | None = None) -> list[str]:
    """
    Run the invariant checks on one fixture.

    Returns:
        Human-readable descriptions of every violated invariant (empty if none).
    """
    opts = opts or MinimizeOptions()
    errors = []
    if fixture.tensor is not None:
        errors.extend(_check_tensor(fixture))
    if fixture.problem is not None:
        errors.extend(_check_problem(fixture, opts))
    logger.info("%s: %d violation(s)", fixture.name, len(errors))
    return errors
