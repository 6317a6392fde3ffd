"""Quadratic bulk energy and its minimization for a fixed crack/void configuration."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, diags
from scipy.sparse.csgraph import connected_components

from .errors import NoConvergence
from .lattice import BondKind, CrackState, Lattice

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConductanceField:
    """Per-bond conductance in {0, 1}: 0 on Void bonds and on broken bonds."""

    values: np.ndarray

    @classmethod
    def intact(cls, lat: Lattice) -> ConductanceField:
        return cls(values=(lat.bond_kind != BondKind.VOID).astype(float))

    @classmethod
    def with_crack(cls, lat: Lattice, crack: CrackState) -> ConductanceField:
        values = (lat.bond_kind != BondKind.VOID).astype(float)
        if len(crack):
            values[list(crack.broken)] = 0.0
        return cls(values=values)

    @classmethod
    def subcritical(cls, lat: Lattice) -> ConductanceField:
        """Every Breakable bond cut and every Void bond removed (free crack)."""
        return cls(values=(lat.bond_kind == BondKind.ELASTIC).astype(float))


@dataclass(eq=False)
class CorrectorField:
    """
    Corrector values w on every lattice node, for the affine slope xi.

    Fixed (DirichletZero boundary) nodes hold 0 for solver output. Floating
    components, and the whole lattice under Periodic bc, are gauged to zero
    mean per component.
    """

    lattice: Lattice
    xi: np.ndarray
    values: np.ndarray
    iterations: int = 0
    residuals: list[float] = field(default_factory=list)

    @classmethod
    def zero(cls, lat: Lattice, xi) -> CorrectorField:
        xi = np.asarray(xi, dtype=float)
        return cls(lattice=lat, xi=xi, values=np.zeros(lat.n_nodes))

    def total(self) -> np.ndarray:
        """Total field xi . x + w at every node."""
        return self.lattice.positions @ self.xi + self.values

    def scaled(self, factor: float) -> CorrectorField:
        return CorrectorField(
            lattice=self.lattice, xi=self.xi * factor, values=self.values * factor
        )


def bond_stretch(lat: Lattice, xi: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Per-bond stretch xi . dx + w_j - w_i."""
    affine = lat.bond_dx @ np.asarray(xi, dtype=float)
    return affine + values[lat.bond_j] - values[lat.bond_i]


def bulk_energy(lat: Lattice, cond: ConductanceField, w: CorrectorField) -> float:
    """
    Raw bulk energy sum_b weight_b * cond_b * h^{n-2} * (xi . dx_b + w_j - w_i)^2.

    In 2D h^{n-2} = 1. Summation is exactly rounded (math.fsum) in bond order.
    """
    s = bond_stretch(lat, w.xi, w.values)
    terms = lat.bond_weight * cond.values * s * s
    return math.fsum(terms.tolist())


def _incidence(lat: Lattice, active: np.ndarray) -> csr_matrix:
    rows = np.repeat(np.arange(len(active)), 2)
    cols = np.stack([lat.bond_i[active], lat.bond_j[active]], axis=1).ravel()
    data = np.tile([-1.0, 1.0], len(active))
    return csr_matrix((data, (rows, cols)), shape=(len(active), lat.n_nodes))


def _unknowns(
    lat: Lattice, active: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Split nodes into unknowns and pinned nodes.

    Returns (unknown node indices, component label per node, mask of floating
    components, lowest node index per component). Every component without a
    fixed node has its lowest-index node pinned to 0; isolated nodes are such
    components.
    """
    graph = csr_matrix(
        (np.ones(len(active)), (lat.bond_i[active], lat.bond_j[active])),
        shape=(lat.n_nodes, lat.n_nodes),
    )
    n_comp, labels = connected_components(graph, directed=False)
    anchored = np.zeros(n_comp, dtype=bool)
    anchored[labels[lat.fixed]] = True
    floating = ~anchored
    # lowest-index node of each component
    first = np.full(n_comp, lat.n_nodes, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(lat.n_nodes))
    pinned = np.zeros(lat.n_nodes, dtype=bool)
    pinned[first[floating]] = True
    unknown = np.flatnonzero(~lat.fixed & ~pinned)
    return unknown, labels, floating, first


def pcg(
    A: csr_matrix,
    b: np.ndarray,
    x0: np.ndarray,
    tol: float,
    max_iter: int,
    history: bool = False,
) -> tuple[np.ndarray, int, float, list[float]]:
    """
    Jacobi-preconditioned conjugate gradient for an SPD system A x = b.

    Stops when ||b - A x|| <= tol * ||b||.

    Returns:
        (x, iterations, final relative residual, residual history)
    """
    inv_diag = diags(1.0 / A.diagonal())
    b_norm = float(np.linalg.norm(b))
    x = np.array(x0, dtype=float)
    r = b - A @ x
    rel = float(np.linalg.norm(r)) / b_norm
    residuals = [rel] if history else []
    k = 0
    rho_old = 0.0
    p = np.zeros_like(x)
    while rel > tol and k < max_iter:
        z = inv_diag @ r
        rho = float(r @ z)
        p = z if k == 0 else z + (rho / rho_old) * p
        Ap = A @ p
        alpha = rho / float(p @ Ap)
        x = x + alpha * p
        r = r - alpha * Ap
        rho_old = rho
        k += 1
        rel = float(np.linalg.norm(r)) / b_norm
        if history:
            residuals.append(rel)
    return x, k, rel, residuals


def default_max_iter(n_unknowns: int) -> int:
    return int(20 * math.sqrt(n_unknowns)) + 1000


def solve_corrector(
    lat: Lattice,
    cond: ConductanceField,
    xi,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    x0: CorrectorField | None = None,
    history: bool = False,
) -> CorrectorField:
    """
    Minimize the bulk energy over correctors with the lattice's boundary condition.

    Components of the conductance graph that touch no fixed node are pinned
    at their lowest-index node and gauged to zero mean afterwards; the energy
    is invariant under that gauge.

    Args:
        lat: The lattice.
        cond: Bond conductances.
        xi: Affine slope in R^2.
        tol: Relative residual tolerance of the reduced normal equations.
        max_iter: CG iteration cap (default 20*sqrt(#unknowns) + 1000).
        x0: Optional warm start.
        history: Keep the relative residual of every CG iteration.

    Returns:
        The minimizing CorrectorField.

    Raises:
        NoConvergence: If max_iter is reached above tolerance.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    xi = np.asarray(xi, dtype=float)
    k = lat.bond_weight * cond.values
    active = np.flatnonzero(k > 0)
    unknown, labels, floating, first = _unknowns(lat, active)
    values = np.zeros(lat.n_nodes)

    if len(unknown):
        B = _incidence(lat, active)
        s0 = lat.bond_dx[active] @ xi
        K = diags(k[active])
        L = (B.T @ K @ B).tocsr()
        rhs = -(B.T @ (k[active] * s0))
        A = L[unknown][:, unknown].tocsr()
        b = rhs[unknown]
        if np.linalg.norm(b) > 0:
            cap = max_iter if max_iter is not None else default_max_iter(len(unknown))
            start = np.zeros(len(unknown))
            if x0 is not None:
                # re-express the warm start in the pinned gauge
                pinned = x0.values[np.minimum(first, lat.n_nodes - 1)]
                shift = np.where(floating, pinned, 0.0)
                start = x0.values[unknown] - shift[labels[unknown]]
            x, iters, rel, residuals = pcg(A, b, start, tol, cap, history=history)
            if rel > tol:
                raise NoConvergence(
                    f"CG stopped after {iters} iterations "
                    f"at relative residual {rel:.3e} "
                    f"(tol {tol:.1e}, {len(unknown)} unknowns)",
                    iterations=iters,
                    residual=rel,
                )
            values[unknown] = x
            logger.debug(
                "CG converged in %d iterations (rel. residual %.2e)", iters, rel
            )
        else:
            iters, residuals = 0, [0.0] if history else []
    else:
        iters, residuals = 0, []

    if floating.any():
        in_floating = floating[labels]
        sums = np.bincount(labels, weights=values, minlength=len(floating))
        counts = np.bincount(labels, minlength=len(floating))
        means = sums / counts
        values[in_floating] -= means[labels[in_floating]]

    return CorrectorField(
        lattice=lat, xi=xi, values=values, iterations=iters, residuals=residuals
    )
