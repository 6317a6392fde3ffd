"""Discrete constrained Mumford-Shah energy: bulk plus weighted crack measure."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError, NoConvergence, TooManyBreakableBonds
from .lattice import BoundaryCondition, CrackState, Lattice
from .solver import (
    DEFAULT_TOL,
    ConductanceField,
    CorrectorField,
    bond_stretch,
    bulk_energy,
    solve_corrector,
)
from .workers import parallel_map

logger = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 20
ORACLE_TOL = 1e-12
DEFAULT_SEED = 0x5EED
# Totals closer than this are treated as equal when picking a winner.
TIE_TOL = 1e-12


@dataclass(eq=False)
class MSProblem:
    """
    One crack problem: minimize bulk + surface_weight * crack measure on a lattice.

    Cracks may only open on Breakable bonds. The boundary condition is the
    lattice's.
    """

    lattice: Lattice
    xi: np.ndarray
    surface_weight: float = 1.0

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        if self.xi.shape != (self.lattice.dim,):
            raise ValueError(
                f"xi must have {self.lattice.dim} components, got {self.xi.shape}"
            )
        if not math.isfinite(self.surface_weight) or self.surface_weight < 0:
            raise ValueError(
                f"surface_weight must be finite and >= 0, got {self.surface_weight}"
            )

    @property
    def bc(self) -> BoundaryCondition:
        return self.lattice.bc

    def scaled(self, factor: float) -> MSProblem:
        return MSProblem(self.lattice, self.xi * factor, self.surface_weight)


@dataclass
class MinimizeOptions:
    """Settings of the alternating minimizer."""

    starts: int = 4
    max_outer: int = 50
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.starts < 1:
            raise ConfigError(f"starts must be >= 1, got {self.starts}")
        if self.max_outer < 1:
            raise ConfigError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MinimizeOptions:
        return cls(
            starts=int(data.get("starts", 4)),
            max_outer=int(data.get("max_outer", 50)),
            tol=float(data.get("tol", DEFAULT_TOL)),
            seed=int(data.get("seed", DEFAULT_SEED)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "starts": self.starts,
            "max_outer": self.max_outer,
            "tol": self.tol,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Breakdown:
    """Energy densities (raw sums divided by the number of unit cells)."""

    bulk: float
    surface: float
    total: float

    def to_dict(self) -> dict[str, float]:
        return {"bulk": self.bulk, "surface": self.surface, "total": self.total}


@dataclass(eq=False)
class MSSolution:
    """A corrector together with the crack it was solved for."""

    corrector: CorrectorField
    crack: CrackState
    breakdown: Breakdown
    iterations: int = 1
    converged: bool = True
    start: str = "intact"
    trace: list[float] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.breakdown.total

    def to_dict(self) -> dict[str, Any]:
        return {
            "start": self.start,
            "iterations": self.iterations,
            "converged": self.converged,
            "crack": list(self.crack.broken),
            "crack_measure": self.crack.measure,
            **self.breakdown.to_dict(),
        }


def ms_energy(p: MSProblem, w: CorrectorField, crack: CrackState) -> Breakdown:
    """
    Evaluate the energy of a (corrector, crack) pair.

    The corrector is evaluated with the problem's slope xi. Broken and Void
    bonds carry no bulk energy.

    Raises:
        CrackOutsideInclusions: If the crack contains a non-Breakable bond.
    """
    lat = p.lattice
    crack = CrackState.from_bonds(lat, crack.broken)
    cond = ConductanceField.with_crack(lat, crack)
    field_ = CorrectorField(lattice=lat, xi=p.xi, values=w.values)
    raw_bulk = bulk_energy(lat, cond, field_)
    bulk = raw_bulk / lat.cells
    surface = p.surface_weight * crack.measure / lat.cells
    return Breakdown(bulk=bulk, surface=surface, total=bulk + surface)


def solve_for_crack(
    p: MSProblem,
    crack: CrackState,
    tol: float = DEFAULT_TOL,
    x0: CorrectorField | None = None,
    start: str = "fixed",
) -> MSSolution:
    """Optimal corrector for a fixed crack, with its energy."""
    cond = ConductanceField.with_crack(p.lattice, crack)
    w = solve_corrector(p.lattice, cond, p.xi, tol=tol, x0=x0)
    breakdown = ms_energy(p, w, crack)
    return MSSolution(corrector=w, crack=crack, breakdown=breakdown, start=start)


def _redecide(p: MSProblem, w: CorrectorField) -> np.ndarray:
    """Breakable bonds whose intact-state energy exceeds their breaking cost."""
    lat = p.lattice
    s = bond_stretch(lat, p.xi, w.values)
    bonds = lat.breakable
    cost = p.surface_weight * lat.h ** (lat.dim - 1)
    broken = lat.bond_weight[bonds] * s[bonds] ** 2 > cost
    return bonds[broken]


def _descend(
    p: MSProblem, crack: CrackState, label: str, opts: MinimizeOptions
) -> MSSolution:
    """Alternate corrector solves and bond re-decisions from one start."""
    lat = p.lattice
    best: MSSolution | None = None
    trace: list[float] = []
    w = None
    converged = False
    failed = False
    iterations = 0
    for iterations in range(1, opts.max_outer + 1):
        try:
            sol = solve_for_crack(p, crack, tol=opts.tol, x0=w, start=label)
        except NoConvergence as e:
            logger.warning(
                "Minimizer start %s, outer %d: corrector solve failed (%s)",
                label,
                iterations,
                e,
            )
            failed = True
            if best is None:
                zero = CorrectorField.zero(lat, p.xi)
                best = MSSolution(
                    corrector=zero,
                    crack=crack,
                    breakdown=ms_energy(p, zero, crack),
                    start=label,
                )
                trace.append(best.total)
            break
        w = sol.corrector
        trace.append(sol.total)
        if best is None or sol.total < best.total:
            best = sol
        new_crack = CrackState(broken=tuple(int(b) for b in _redecide(p, w)), h=lat.h)
        logger.debug(
            "start %s, outer %d: total %.12g, %d -> %d broken",
            label,
            iterations,
            sol.total,
            len(crack),
            len(new_crack),
        )
        if new_crack.broken == crack.broken:
            converged = True
            break
        crack = new_crack
    if not converged and not failed:
        logger.warning(
            "Minimizer start %s did not settle within %d outer iterations",
            label,
            opts.max_outer,
        )
    best.iterations = iterations
    best.converged = converged
    best.trace = trace
    return best


def start_roster(lat: Lattice, opts: MinimizeOptions) -> list[tuple[str, CrackState]]:
    """
    The fixed list of initial cracks.

    All intact, all broken, then seeded random subsets of the Breakable bonds.
    """
    bonds = lat.breakable
    roster = [("intact", CrackState.empty(lat))]
    if opts.starts >= 2:
        everything = CrackState(broken=tuple(int(b) for b in bonds), h=lat.h)
        roster.append(("broken", everything))
    for k in range(opts.starts - 2):
        rng = np.random.default_rng([opts.seed, k])
        chosen = bonds[rng.random(len(bonds)) < 0.5]
        subset = CrackState(broken=tuple(int(b) for b in chosen), h=lat.h)
        roster.append((f"random-{k}", subset))
    return roster


def pick_best(solutions: list[MSSolution]) -> MSSolution:
    """Lowest total; near-ties go to the lexicographically smallest crack."""
    best = solutions[0]
    for sol in solutions[1:]:
        if sol.total < best.total - TIE_TOL:
            best = sol
        elif (
            abs(sol.total - best.total) <= TIE_TOL
            and sol.crack.broken < best.crack.broken
        ):
            best = sol
    return best


def minimize_all(p: MSProblem, opts: MinimizeOptions | None = None) -> list[MSSolution]:
    """Run the alternating scheme from every start of the roster, in roster order."""
    opts = opts or MinimizeOptions()
    roster = start_roster(p.lattice, opts)
    return parallel_map(lambda item: _descend(p, item[1], item[0], opts), roster)


def minimize(p: MSProblem, opts: MinimizeOptions | None = None) -> MSSolution:
    """
    Heuristic global minimization of the crack problem.

    Each start alternates (i) the optimal corrector for the current crack
    and (ii) a batch re-decision of every Breakable bond: broken iff
    weight * stretch^2 > surface_weight * h^{n-1} under the current
    corrector (ties stay intact). The total is non-increasing along each
    start's trace.
    A corrector solve that fails to converge ends its start, which
    keeps its best iterate and reports converged = False.

    Args:
        p: The crack problem.
        opts: Minimizer settings.

    Returns:
        The best solution over the start roster.
    """
    solutions = minimize_all(p, opts)
    best = pick_best(solutions)
    logger.debug(
        "minimize: best start %s, total %.12g, %d broken",
        best.start,
        best.total,
        len(best.crack),
    )
    return best


def enumerate_cracks(p: MSProblem, tol: float = ORACLE_TOL) -> list[MSSolution]:
    """
    Solve every crack subset of the Breakable bonds.

    Subsets are listed by size, then lexicographically.

    Raises:
        TooManyBreakableBonds: Above BRUTE_FORCE_CAP Breakable bonds.
    """
    lat = p.lattice
    bonds = [int(b) for b in lat.breakable]
    if len(bonds) > BRUTE_FORCE_CAP:
        raise TooManyBreakableBonds(
            f"{len(bonds)} Breakable bonds exceed the exhaustive cap "
            f"of {BRUTE_FORCE_CAP}"
        )
    subsets = [
        combo
        for size in range(len(bonds) + 1)
        for combo in itertools.combinations(bonds, size)
    ]
    return parallel_map(
        lambda combo: solve_for_crack(
            p, CrackState(broken=combo, h=lat.h), tol=tol, start="exhaustive"
        ),
        subsets,
    )


def brute_force_min(p: MSProblem, tol: float = ORACLE_TOL) -> MSSolution:
    """
    Exact discrete minimum by enumerating all 2^k crack subsets.

    Raises:
        TooManyBreakableBonds: Above BRUTE_FORCE_CAP Breakable bonds.
    """
    best = pick_best(enumerate_cracks(p, tol=tol))
    logger.debug(
        "brute_force_min: total %.15g, crack %s", best.total, best.crack.broken
    )
    return best


def truncate(w: CorrectorField, lo: float, hi: float) -> CorrectorField:
    """
    Clamp the total field xi . x + w into [lo, hi] at every node.

    The result is re-expressed as a corrector for the same xi. Requires a
    DirichletZero lattice (a periodic total field is not single-valued).
    """
    if lo > hi:
        raise ValueError(f"truncate needs lo <= hi, got [{lo}, {hi}]")
    lat = w.lattice
    if lat.bc is not BoundaryCondition.DIRICHLET_ZERO:
        raise ValueError("truncate is only defined on DirichletZero lattices")
    u = np.clip(w.total(), lo, hi)
    return CorrectorField(lattice=lat, xi=w.xi, values=u - lat.positions @ w.xi)

