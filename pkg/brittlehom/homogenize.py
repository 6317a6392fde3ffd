"""Cell-energy drivers: g(t), the f_hom estimate, scaling tables, sweeps, budgets."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

import numpy as np
from scipy.optimize import least_squares

from .brittle_ms import (
    BRUTE_FORCE_CAP,
    ORACLE_TOL,
    Breakdown,
    MinimizeOptions,
    MSProblem,
    MSSolution,
    brute_force_min,
    enumerate_cracks,
    minimize,
    minimize_all,
    pick_best,
    solve_for_crack,
)
from .cell_tensor import crossover_from_f0, f0
from .errors import ConfigError, DimensionUnsupported
from .geometry import Geometry
from .lattice import BoundaryCondition, CrackState, Lattice, build, classify_cells
from .solver import ConductanceField, bulk_energy, solve_corrector
from .workers import parallel_map

logger = logging.getLogger(__name__)

# Relative part of the sandwich slack, as a fraction of |xi|^2.
SANDWICH_REL_SLACK = 0.05


@dataclass
class GRecord:
    """One cell value: g_hat(t) with cracks, g_elastic(t) with cracks forbidden."""

    t: int
    m: int
    g_hat: float
    g_elastic: float
    breakdown: Breakdown
    crack_measure: float
    surface_weight: float = 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "m": self.m,
            "surface_weight": self.surface_weight,
            "g_hat": self.g_hat,
            "g_elastic": self.g_elastic,
            "breakdown": self.breakdown.to_dict(),
            "crack_measure": self.crack_measure,
        }

    def trace_row(self) -> list[Any]:
        b = self.breakdown
        return [self.t, self.g_hat, b.bulk, b.surface, self.crack_measure, ""]


@dataclass
class HomogReport:
    """f_hom estimate with its sandwich bounds and convergence indicators."""

    xi: np.ndarray
    m: int
    records: list[GRecord]
    fhom_estimate: float
    cauchy_gap: float
    f0_value: float
    upper: float
    elastic_limit: float
    mesh_indicator: float
    slack: float
    sandwich_ok: bool
    crossover_norm: float

    @property
    def beyond_crossover(self) -> bool:
        """Whether |xi| exceeds the load where f0(xi) + P(E, Q) drops below |xi|^2."""
        return bool(math.sqrt(self.elastic_limit) > self.crossover_norm)

    @property
    def f0_gap(self) -> float:
        """Signed gap fhom_estimate - f0(xi); reported, not asserted."""
        return self.fhom_estimate - self.f0_value

    def to_dict(self) -> dict[str, Any]:
        return {
            "xi": self.xi.tolist(),
            "m": self.m,
            "records": [r.to_dict() for r in self.records],
            "fhom_estimate": self.fhom_estimate,
            "bounds": {
                "f0_value": self.f0_value,
                "upper": self.upper,
                "elastic_limit": self.elastic_limit,
                "crossover_norm": self.crossover_norm,
            },
            "flags": {
                "sandwich_ok": self.sandwich_ok,
                "beyond_crossover": self.beyond_crossover,
                "cauchy_gap": self.cauchy_gap,
                "f0_gap": self.f0_gap,
                "mesh_indicator": self.mesh_indicator,
                "slack": self.slack,
            },
        }


class Regime(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class RegimeSchedule:
    """Toughness schedule alpha(eps) = c * eps^p."""

    p: float
    c: float = 1.0

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ConfigError(f"exponent p must be positive, got {self.p}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ConfigError(f"prefactor c must be positive, got {self.c}")

    @property
    def regime(self) -> Regime:
        if self.p > 1:
            return Regime.SUBCRITICAL
        if self.p < 1:
            return Regime.SUPERCRITICAL
        return Regime.CRITICAL

    def alpha(self, eps: float) -> float:
        return self.c * eps**self.p

    def cell_weight(self, t: int) -> float:
        """Surface weight on the t-cell for eps = 1/t, alpha(eps) / eps = c t^(1-p)."""
        return self.c * float(t) ** (1.0 - self.p)

    def to_dict(self) -> dict[str, Any]:
        return {"p": self.p, "c": self.c, "regime": self.regime.value}


@dataclass
class ProbeRow:
    lam: float
    energy: float
    scaled_base: float
    side: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "energy": self.energy,
            "lambda2_energy": self.scaled_base,
            "side": self.side,
        }


@dataclass
class ProbeReport:
    """Scaling table E(lambda xi) against lambda^2 E(xi)."""

    xi: np.ndarray
    t: int
    m: int
    base: float
    rows: list[ProbeRow]
    non2homog_detected: bool
    max_deficit: float
    exact: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "xi": self.xi.tolist(),
            "t": self.t,
            "m": self.m,
            "exact": self.exact,
            "base": self.base,
            "rows": [r.to_dict() for r in self.rows],
            "non2homog_detected": self.non2homog_detected,
            "max_deficit": self.max_deficit,
        }


@dataclass
class SweepPoint:
    eps: float
    t: int
    alpha: float
    surface_weight: float
    record: GRecord
    n_good: int
    n_bad: int

    @property
    def bulk(self) -> float:
        return self.record.breakdown.bulk

    @property
    def surface(self) -> float:
        return self.record.breakdown.surface

    @property
    def crack_measure(self) -> float:
        return self.record.crack_measure

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": self.eps,
            "t": self.t,
            "alpha": self.alpha,
            "surface_weight": self.surface_weight,
            "bulk": self.bulk,
            "surface": self.surface,
            "total": self.record.g_hat,
            "crack_measure": self.crack_measure,
            "n_good": self.n_good,
            "n_bad": self.n_bad,
        }

    def trace_row(self) -> list[Any]:
        return [
            self.eps,
            self.record.g_hat,
            self.bulk,
            self.surface,
            self.crack_measure,
            self.n_bad,
        ]


@dataclass
class SweepReport:
    schedule: RegimeSchedule
    xi: np.ndarray
    m: int
    beta: float
    points: list[SweepPoint]
    trend: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "schedule": self.schedule.to_dict(),
            "xi": self.xi.tolist(),
            "m": self.m,
            "beta": self.beta,
            "trend": self.trend,
            "points": [pt.to_dict() for pt in self.points],
        }


@dataclass
class AppendixRow:
    beta: float
    ms_total: float
    dirichlet: float
    ratio: float
    crack_measure: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "ms_total": self.ms_total,
            "dirichlet": self.dirichlet,
            "ratio": self.ratio,
            "crack_measure": self.crack_measure,
        }


@dataclass
class AppendixReport:
    """Budget-constrained minima against the intact Dirichlet energy."""

    xi: np.ndarray
    m: int
    rows: list[AppendixRow]
    c_fit: float
    c_bound: float
    fit_residual: float
    exhaustive: bool

    @staticmethod
    def omega(beta: float, c: float) -> float:
        return 2.0 * c * beta / (1.0 + c * beta)

    def to_dict(self) -> dict[str, Any]:
        return {
            "xi": self.xi.tolist(),
            "m": self.m,
            "exhaustive": self.exhaustive,
            "rows": [r.to_dict() for r in self.rows],
            "c_fit": self.c_fit,
            "c_bound": self.c_bound,
            "fit_residual": self.fit_residual,
        }


def _xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2,):
        raise ConfigError(f"xi must have 2 components, got shape {xi.shape}")
    return xi


def _elastic_value(lat: Lattice, xi: np.ndarray, tol: float) -> float:
    cond = ConductanceField.intact(lat)
    w = solve_corrector(lat, cond, xi, tol=tol)
    return bulk_energy(lat, cond, w) / lat.cells


def _cell_solution(
    geom: Geometry,
    xi: np.ndarray,
    t: int,
    m: int,
    surface_weight: float,
    opts: MinimizeOptions,
) -> tuple[GRecord, MSSolution]:
    lat = build(geom, t=t, m=m, bc=BoundaryCondition.DIRICHLET_ZERO)
    sol = minimize(MSProblem(lat, xi, surface_weight), opts)
    record = GRecord(
        t=t,
        m=m,
        g_hat=sol.total,
        g_elastic=_elastic_value(lat, xi, opts.tol),
        breakdown=sol.breakdown,
        crack_measure=sol.crack.measure,
        surface_weight=surface_weight,
    )
    return record, sol


def g_of_t(
    geom: Geometry,
    xi,
    t: int,
    m: int,
    opts: MinimizeOptions | None = None,
    surface_weight: float = 1.0,
) -> GRecord:
    """
    Density-normalized cell value on (0, t)^2 with zero corrector on the boundary.

    Args:
        geom: Validated geometry.
        xi: Affine slope.
        t: Cell size in periods (>= 1).
        m: Grid resolution.
        opts: Minimizer settings.
        surface_weight: Crack cost per unit length (1 in the critical scaling).

    Returns:
        The GRecord for t.
    """
    opts = opts or MinimizeOptions()
    record, _ = _cell_solution(geom, _xi(xi), t, m, surface_weight, opts)
    logger.info(
        "g(t=%d, m=%d) = %.12g (elastic %.12g, crack %.6g)",
        t,
        m,
        record.g_hat,
        record.g_elastic,
        record.crack_measure,
    )
    return record


def _mesh_indicator(geom: Geometry, xi: np.ndarray, t: int, m: int, opts) -> float:
    coarse = m // 2
    if m % 2 or coarse < 4 or coarse * geom.delta < 2.0 - 1e-12:
        logger.warning(
            "Mesh indicator unavailable: m=%d cannot be halved above the "
            "resolution floor",
            m,
        )
        return 0.0
    fine = g_of_t(geom, xi, t, m, opts).g_hat
    return abs(fine - g_of_t(geom, xi, t, coarse, opts).g_hat)


def estimate_fhom(
    geom: Geometry,
    xi,
    t_list: Sequence[int],
    m: int,
    opts: MinimizeOptions | None = None,
) -> HomogReport:
    """
    Estimate f_hom(xi) by the largest-cell value and check it against its bounds.

    The upper bound is min(|xi|^2, f0(xi) + P(E, Q)) and the lower bound
    f0(xi). The slack is max(5% |xi|^2, 2 * mesh indicator), where the
    mesh indicator compares g at m and m/2 on the smallest cell.

    Raises:
        ConfigError: If t_list is not strictly increasing with length >= 2.
    """
    opts = opts or MinimizeOptions()
    xi = _xi(xi)
    t_list = [int(t) for t in t_list]
    if len(t_list) < 2 or any(b <= a for a, b in zip(t_list, t_list[1:])):
        raise ConfigError(
            f"t_list must be strictly increasing with >= 2 entries, got {t_list}"
        )

    records = parallel_map(lambda t: g_of_t(geom, xi, t, m, opts), t_list)
    t_max = t_list[-1]
    half = [r for r in records if r.t <= t_max // 2]
    reference = half[-1] if half else records[0]
    fhom = records[-1].g_hat
    cauchy_gap = abs(fhom - reference.g_hat)

    norm2 = float(xi @ xi)
    f0_value = f0(geom, xi, m, tol=opts.tol)
    upper = min(norm2, f0_value + geom.perim_E)
    crossover = (
        crossover_from_f0(f0_value / norm2, geom.perim_E) if norm2 > 0 else math.nan
    )
    mesh = _mesh_indicator(geom, xi, t_list[0], m, opts)
    slack = max(SANDWICH_REL_SLACK * norm2, 2.0 * mesh)
    sandwich_ok = f0_value - slack <= fhom <= upper + slack
    if not sandwich_ok:
        logger.warning(
            "Sandwich check failed: f0=%.6g, estimate=%.6g, upper=%.6g, slack=%.3g",
            f0_value,
            fhom,
            upper,
            slack,
        )
    return HomogReport(
        xi=xi,
        m=m,
        records=records,
        fhom_estimate=fhom,
        cauchy_gap=cauchy_gap,
        f0_value=f0_value,
        upper=upper,
        elastic_limit=norm2,
        mesh_indicator=mesh,
        slack=slack,
        sandwich_ok=sandwich_ok,
        crossover_norm=crossover,
    )


def homogeneity_probe(
    geom: Geometry,
    xi,
    lambdas: Sequence[float],
    t: int,
    m: int,
    opts: MinimizeOptions | None = None,
    exact: bool = False,
) -> ProbeReport:
    """
    Compare E(lambda xi) with lambda^2 E(xi) on one cell.

    With exact=True the exhaustive oracle is used, where the scaling
    inequalities hold exactly. non2homog_detected is set when some
    lambda >= 1 has E(lambda xi) < lambda^2 E(xi) - max(1e-6, 1% lambda^2 E(xi)).
    """
    opts = opts or MinimizeOptions()
    xi = _xi(xi)
    if any(not (lam > 0 and math.isfinite(lam)) for lam in lambdas):
        raise ConfigError(f"lambdas must be positive, got {list(lambdas)}")
    lat = build(geom, t=t, m=m, bc=BoundaryCondition.DIRICHLET_ZERO)

    def energy(scale: float) -> float:
        p = MSProblem(lat, xi * scale, 1.0)
        return (brute_force_min(p) if exact else minimize(p, opts)).total

    scales = [1.0] + [float(lam) for lam in lambdas if lam != 1]
    values = dict(zip(scales, parallel_map(energy, scales)))
    base = values[1.0]

    rows = []
    detected = False
    max_deficit = 0.0
    for lam in lambdas:
        value = values[float(lam)]
        scaled_base = lam * lam * base
        if abs(value - scaled_base) <= 1e-12 * max(1.0, abs(scaled_base)):
            side = "equal"
        else:
            side = "below" if value < scaled_base else "above"
        if lam >= 1:
            deficit = scaled_base - value
            max_deficit = max(max_deficit, deficit)
            if deficit > max(1e-6, 0.01 * scaled_base):
                detected = True
        rows.append(
            ProbeRow(lam=float(lam), energy=value, scaled_base=scaled_base, side=side)
        )
        logger.info(
            "lambda=%g: E=%.12g, lambda^2 E(xi)=%.12g (%s)",
            lam,
            value,
            scaled_base,
            side,
        )
    return ProbeReport(
        xi=xi,
        t=t,
        m=m,
        base=base,
        rows=rows,
        non2homog_detected=detected,
        max_deficit=max_deficit,
        exact=exact,
    )


def _eps_to_t(eps: float) -> int:
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    t = int(round(1.0 / eps))
    if t < 1 or abs(1.0 / t - eps) > 1e-12:
        raise ConfigError(f"eps must be 1/t for an integer t, got {eps}")
    return t


def _trend(points: list[SweepPoint]) -> str:
    if points[-1].crack_measure == 0:
        return "elastic-limit"
    if len(points) > 1 and points[-1].surface < points[0].surface:
        return "damaged-limit"
    return "intermediate"


def regime_sweep(
    geom: Geometry,
    xi,
    schedule: RegimeSchedule,
    eps_list: Sequence[float],
    m: int,
    opts: MinimizeOptions | None = None,
    beta: float = 1.0,
) -> SweepReport:
    """
    Solve the t-cell problem for each eps = 1/t with the schedule's toughness.

    The cell surface weight is alpha(eps) * t, so the critical schedule with
    c = 1 reproduces g_of_t exactly. Each point also counts the good and bad
    unit subcells of the returned crack at threshold beta * eps.
    """
    opts = opts or MinimizeOptions()
    xi = _xi(xi)
    ts = [_eps_to_t(eps) for eps in eps_list]

    def point(t: int) -> SweepPoint:
        weight = schedule.cell_weight(t)
        record, sol = _cell_solution(geom, xi, t, m, weight, opts)
        cells = classify_cells(sol.corrector.lattice, sol.crack, beta)
        logger.info(
            "eps=1/%d: weight %.6g, total %.12g, crack %.6g, %d bad cells",
            t,
            weight,
            record.g_hat,
            record.crack_measure,
            cells.n_bad,
        )
        return SweepPoint(
            eps=1.0 / t,
            t=t,
            alpha=schedule.alpha(1.0 / t),
            surface_weight=weight,
            record=record,
            n_good=cells.n_good,
            n_bad=cells.n_bad,
        )

    points = parallel_map(point, ts)
    return SweepReport(
        schedule=schedule, xi=xi, m=m, beta=beta, points=points, trend=_trend(points)
    )


def _fit_c(betas: np.ndarray, ratios: np.ndarray, c0: float) -> tuple[float, float]:
    def residual(c):
        return ratios - (1.0 - 2.0 * c[0] * betas / (1.0 + c[0] * betas))

    if np.all(ratios == 1.0):
        return 0.0, 0.0
    result = least_squares(residual, x0=[max(c0, 1e-6)], bounds=([0.0], [np.inf]))
    c = float(result.x[0])
    return c, float(np.max(np.abs(residual([c]))))


def appendix_verify(
    geom: Geometry,
    xi,
    beta_list: Sequence[float],
    m: int,
    opts: MinimizeOptions | None = None,
    t: int = 1,
) -> AppendixReport:
    """
    Compare crack-budgeted minima with the intact energy for the same boundary data.

    For each beta the best candidate with crack measure <= beta is taken
    (the intact solution if none fits), and ratio = its total / intact
    Dirichlet energy. Candidates are every crack subset when the Breakable
    set is within the exhaustive cap, otherwise the multi-start roster.

    Raises:
        DimensionUnsupported: Unless the geometry is two-dimensional.
        ConfigError: If beta_list is not positive and strictly decreasing.
    """
    if geom.dim != 2:
        raise DimensionUnsupported("The truncation estimate is only checked in 2D")
    opts = opts or MinimizeOptions()
    xi = _xi(xi)
    betas = [float(b) for b in beta_list]
    decreasing = all(b < a for a, b in zip(betas, betas[1:]))
    if not betas or any(b <= 0 for b in betas) or not decreasing:
        raise ConfigError(
            f"beta_list must be positive and strictly decreasing, got {betas}"
        )

    lat = build(geom, t=t, m=m, bc=BoundaryCondition.DIRICHLET_ZERO)
    p = MSProblem(lat, xi, 1.0)
    exhaustive = len(lat.breakable) <= BRUTE_FORCE_CAP
    if exhaustive:
        candidates = enumerate_cracks(p, tol=ORACLE_TOL)
        intact = candidates[0]
    else:
        intact = solve_for_crack(p, CrackState.empty(lat), tol=opts.tol, start="intact")
        candidates = [intact] + minimize_all(p, opts)
    dirichlet = intact.total

    rows = []
    for beta in betas:
        feasible = [s for s in candidates if s.crack.measure <= beta + 1e-12]
        best = pick_best(feasible) if feasible else intact
        ratio = best.total / dirichlet if dirichlet > 0 else 1.0
        rows.append(
            AppendixRow(
                beta=beta,
                ms_total=best.total,
                dirichlet=dirichlet,
                ratio=ratio,
                crack_measure=best.crack.measure,
            )
        )

    b = np.array([r.beta for r in rows])
    ratios = np.array([r.ratio for r in rows])
    c_bound = float(np.max((1.0 - ratios) / (b * (1.0 + ratios))))
    c_fit, residual = _fit_c(b, ratios, c_bound)
    return AppendixReport(
        xi=xi,
        m=m,
        rows=rows,
        c_fit=c_fit,
        c_bound=max(c_bound, 0.0),
        fit_residual=residual,
        exhaustive=exhaustive,
    )


def small_load_ratio(
    geom: Geometry,
    direction,
    norms: Sequence[float],
    t: int,
    m: int,
    opts: MinimizeOptions | None = None,
) -> list[dict[str, float]]:
    """g(t)/|xi|^2 for xi = s * d over decreasing s; reported, never asserted."""
    d = _xi(direction)
    d = d / np.linalg.norm(d)
    norms = [float(s) for s in norms]
    records = parallel_map(lambda s: g_of_t(geom, s * d, t, m, opts), norms)
    return [
        {
            "norm": s,
            "g_hat": r.g_hat,
            "ratio": r.g_hat / (s * s) if s > 0 else float("nan"),
        }
        for s, r in zip(norms, records)
    ]
