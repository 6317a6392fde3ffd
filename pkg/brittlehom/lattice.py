"""Finite-difference lattices over the unit cell or a t-cell, with classified bonds."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Iterable

import numpy as np

from .errors import CrackOutsideInclusions, ResolutionTooCoarse
from .geometry import Geometry

logger = logging.getLogger(__name__)


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"
    DIRICHLET_ZERO = "dirichlet_zero"


class BondKind(IntEnum):
    """Elastic bonds never break; Breakable bonds may; Void bonds carry no energy."""

    ELASTIC = 0
    BREAKABLE = 1
    VOID = 2


class ClassificationMode(str, Enum):
    # E by bond midpoint, F by open-segment crossing
    MIDPOINT = "midpoint"
    # E by any intersection of the closed bond with E
    EXACT = "exact"


@dataclass(frozen=True, eq=False)
class Lattice:
    """
    A square grid of t*m nodes per axis (spacing h = 1/m) over (0, t)^2.

    Node (i, j) sits at (i*h, j*h) and has index i + n_side*j. Bonds are
    stored horizontal-first, each as (bond_i -> bond_j) with displacement
    bond_dx, so wrapped periodic bonds still see xi . dx = xi_k * h.
    Under DirichletZero the boundary nodes are fixed (corrector 0) and bonds
    lying in a boundary face carry quadrature weight 1/2.
    """

    geom: Geometry
    t: int
    m: int
    bc: BoundaryCondition
    mode: ClassificationMode
    n_side: int
    positions: np.ndarray
    fixed: np.ndarray
    bond_i: np.ndarray
    bond_j: np.ndarray
    bond_kind: np.ndarray
    bond_weight: np.ndarray
    bond_dx: np.ndarray
    bond_mid: np.ndarray

    @property
    def dim(self) -> int:
        return 2

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_bonds(self) -> int:
        return len(self.bond_i)

    @property
    def free_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.fixed)

    @property
    def breakable(self) -> np.ndarray:
        """Indices of Breakable bonds, ascending."""
        return np.flatnonzero(self.bond_kind == BondKind.BREAKABLE)

    @property
    def cells(self) -> int:
        """Number of unit cells, t^n (the density normalization)."""
        return self.t**self.dim

    def kind_counts(self) -> dict[str, int]:
        counts = np.bincount(self.bond_kind, minlength=len(BondKind))
        return {kind.name.lower(): int(counts[kind]) for kind in BondKind}

    def summary(self) -> dict[str, Any]:
        """JSON-serializable lattice summary."""
        return {
            "t": self.t,
            "m": self.m,
            "h": self.h,
            "bc": self.bc.value,
            "mode": self.mode.value,
            "nodes": self.n_nodes,
            "free_nodes": int((~self.fixed).sum()),
            "bonds": self.n_bonds,
            "bond_kinds": self.kind_counts(),
        }


def _template_kinds(
    geom: Geometry, m: int, mode: ClassificationMode, void_inclusions: bool
) -> np.ndarray:
    """Classify the 2*m^2 bonds of one unit cell; returns kinds indexed [axis, j, i]."""
    h = 1.0 / m
    idx = np.arange(m) * h
    x, y = np.meshgrid(idx, idx, indexing="xy")
    start = np.stack([x.ravel(), y.ravel()], axis=1)
    kinds = np.full((2, m, m), BondKind.ELASTIC, dtype=np.int8)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        end = start + step
        crosses_f = geom.f_crosses_segments(start, end)
        if mode is ClassificationMode.MIDPOINT:
            mid = start + step / 2
            in_e = geom.e_contains_xy(mid[:, 0], mid[:, 1])
        else:
            in_e = geom.e_intersects_segments(start, end)
        kind = np.full(len(start), BondKind.ELASTIC, dtype=np.int8)
        kind[crosses_f | in_e] = BondKind.BREAKABLE
        if void_inclusions:
            kind[in_e] = BondKind.VOID
        kinds[axis] = kind.reshape(m, m)
    return kinds


def build(
    geom: Geometry,
    t: int,
    m: int,
    bc: BoundaryCondition | str = BoundaryCondition.PERIODIC,
    mode: ClassificationMode | str = ClassificationMode.MIDPOINT,
    void_inclusions: bool = False,
) -> Lattice:
    """
    Build a lattice over (0, t)^2 with m nodes per unit cell per axis.

    Bonds are classified once on a unit-cell template and tiled, so the
    classification is invariant under integer translations.

    Args:
        geom: Validated geometry.
        t: Number of unit cells per axis (>= 1).
        m: Nodes per unit cell per axis (>= 4).
        bc: Periodic or DirichletZero.
        mode: Bond classification mode.
        void_inclusions: Mark E bonds Void instead of Breakable (perforated cell).

    Returns:
        The classified lattice.

    Raises:
        ResolutionTooCoarse: If m * delta < 2.
        ValueError: If t < 1 or m < 4.
    """
    bc = BoundaryCondition(bc)
    mode = ClassificationMode(mode)
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if m < 4:
        raise ValueError(f"m must be >= 4, got {m}")
    if m * geom.delta < 2.0 - 1e-12:
        raise ResolutionTooCoarse(
            f"m * delta = {m * geom.delta:g} < 2: "
            "fewer than two grid layers in the margin"
        )

    h = 1.0 / m
    n = t * m
    template = _template_kinds(geom, m, mode, void_inclusions)

    if bc is BoundaryCondition.PERIODIC:
        n_side = n
        ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
        ii, jj = ii.ravel(), jj.ravel()
        src = ii + n_side * jj
        h_i, h_j, h_src = ii, jj, src
        h_dst = (ii + 1) % n + n_side * jj
        v_i, v_j, v_src = ii, jj, src
        v_dst = ii + n_side * ((jj + 1) % n)
        fixed = np.zeros(n_side * n_side, dtype=bool)
        h_weight = np.ones(len(h_src))
        v_weight = np.ones(len(v_src))
    else:
        n_side = n + 1
        hi_, hj_ = np.meshgrid(np.arange(n), np.arange(n + 1), indexing="xy")
        h_i, h_j = hi_.ravel(), hj_.ravel()
        h_src = h_i + n_side * h_j
        h_dst = h_src + 1
        vi_, vj_ = np.meshgrid(np.arange(n + 1), np.arange(n), indexing="xy")
        v_i, v_j = vi_.ravel(), vj_.ravel()
        v_src = v_i + n_side * v_j
        v_dst = v_src + n_side
        gi, gj = np.meshgrid(np.arange(n_side), np.arange(n_side), indexing="xy")
        fixed = ((gi == 0) | (gi == n) | (gj == 0) | (gj == n)).ravel()
        h_weight = np.where((h_j == 0) | (h_j == n), 0.5, 1.0)
        v_weight = np.where((v_i == 0) | (v_i == n), 0.5, 1.0)

    gi, gj = np.meshgrid(np.arange(n_side), np.arange(n_side), indexing="xy")
    positions = np.stack([gi.ravel() * h, gj.ravel() * h], axis=1)

    h_kind = template[0][h_j % m, h_i % m]
    v_kind = template[1][v_j % m, v_i % m]

    n_h, n_v = len(h_src), len(v_src)
    bond_dx = np.zeros((n_h + n_v, 2))
    bond_dx[:n_h, 0] = h
    bond_dx[n_h:, 1] = h
    bond_i = np.concatenate([h_src, v_src]).astype(np.int64)
    bond_mid = positions[bond_i] + bond_dx / 2

    lat = Lattice(
        geom=geom,
        t=t,
        m=m,
        bc=bc,
        mode=mode,
        n_side=n_side,
        positions=positions,
        fixed=fixed,
        bond_i=bond_i,
        bond_j=np.concatenate([h_dst, v_dst]).astype(np.int64),
        bond_kind=np.concatenate([h_kind, v_kind]).astype(np.int8),
        bond_weight=np.concatenate([h_weight, v_weight]),
        bond_dx=bond_dx,
        bond_mid=bond_mid,
    )
    logger.debug("Built lattice %s", lat.summary())
    return lat


@dataclass(frozen=True)
class CrackState:
    """A set of broken (Breakable) bonds and its H^{n-1} proxy |broken| * h^{n-1}."""

    broken: tuple[int, ...]
    h: float

    @property
    def measure(self) -> float:
        return len(self.broken) * self.h

    def __len__(self) -> int:
        return len(self.broken)

    def mask(self, n_bonds: int) -> np.ndarray:
        out = np.zeros(n_bonds, dtype=bool)
        out[list(self.broken)] = True
        return out

    @classmethod
    def empty(cls, lat: Lattice) -> CrackState:
        return cls(broken=(), h=lat.h)

    @classmethod
    def from_bonds(cls, lat: Lattice, bonds: Iterable[int]) -> CrackState:
        """
        Create a crack from bond indices, checking they are all Breakable.

        Raises:
            CrackOutsideInclusions: If some bond is not Breakable.
        """
        broken = tuple(sorted({int(b) for b in bonds}))
        if broken:
            idx = np.asarray(broken)
            if idx.min() < 0 or idx.max() >= lat.n_bonds:
                raise CrackOutsideInclusions(f"Bond index out of range in {broken}")
            bad = idx[lat.bond_kind[idx] != BondKind.BREAKABLE]
            if len(bad):
                raise CrackOutsideInclusions(
                    f"Bonds {bad.tolist()} are not Breakable "
                    "(cracks must lie in E or F)"
                )
        return cls(broken=broken, h=lat.h)

    @classmethod
    def from_mask(cls, lat: Lattice, mask: np.ndarray) -> CrackState:
        return cls.from_bonds(lat, np.flatnonzero(mask))


@dataclass
class CellClassification:
    """Good/bad labels of the t^n unit subcells for one crack."""

    beta: float
    threshold: float
    cell_measure: np.ndarray
    bad: np.ndarray

    @property
    def n_bad(self) -> int:
        return int(self.bad.sum())

    @property
    def n_good(self) -> int:
        return int(self.bad.size - self.bad.sum())

    def labels(self) -> list[list[str]]:
        return [["bad" if b else "good" for b in row] for row in self.bad]

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "threshold": self.threshold,
            "n_good": self.n_good,
            "n_bad": self.n_bad,
            "labels": self.labels(),
        }


def classify_cells(lat: Lattice, crack: CrackState, beta: float) -> CellClassification:
    """
    Label each unit subcell good or bad for the given crack.

    With epsilon = 1/t in rescaled units, subcell k is bad iff the measure of
    the broken bonds whose midpoint lies in it exceeds beta * (1/t)^{n-1}.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    t = lat.t
    measure = np.zeros((t, t))
    if len(crack):
        mids = lat.bond_mid[list(crack.broken)]
        cell = np.clip(np.floor(mids).astype(int), 0, t - 1)
        np.add.at(measure, (cell[:, 1], cell[:, 0]), crack.h)
    threshold = beta * (1.0 / t) ** (lat.dim - 1)
    return CellClassification(
        beta=beta, threshold=threshold, cell_measure=measure, bad=measure > threshold
    )
