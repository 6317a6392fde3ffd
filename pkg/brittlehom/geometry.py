"""Periodic microstructure: the cell Q, its margin delta, inclusions E and slits F."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString, MultiLineString, MultiPoint

from .errors import (
    BadPrimitive,
    DimensionUnsupported,
    GeometryError,
    MarginViolation,
    OverlapViolation,
)
from .shapes import Shape, shape_from_dict

# Minimum gap between primitives, in cell units. Touching primitives are rejected.
SEP_TOL = 1e-9


class Membership(str, Enum):
    IN_E = "in_E"
    NEAR_F = "near_F"
    OUTSIDE = "outside"


class SegmentHit(str, Enum):
    CROSSES_F = "crosses_F"
    ENTERS_E = "enters_E"
    NEITHER = "neither"


@dataclass(frozen=True)
class Polyline:
    """An (n-1)-dimensional slit component of F, as an ordered vertex list."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise BadPrimitive(
                f"Polyline needs at least 2 points, got {len(self.points)}"
            )
        for p, q in zip(self.points, self.points[1:]):
            if p == q:
                raise BadPrimitive(f"Polyline has a repeated vertex {p}")
        if not self.line.is_simple:
            raise BadPrimitive("Polyline intersects itself")

    @cached_property
    def line(self) -> LineString:
        return LineString(self.points)

    def length(self) -> float:
        return float(self.line.length)

    def validate(self, delta: float) -> list[str]:
        xmin, ymin, xmax, ymax = self.line.bounds
        lo, hi = delta, 1.0 - delta
        if xmin <= lo or ymin <= lo or xmax >= hi or ymax >= hi:
            return [f"Polyline {self.points} leaves Q_delta=({lo:g}, {hi:g})^2"]
        return []

    def to_dict(self) -> dict[str, Any]:
        return {"points": [list(p) for p in self.points]}


@dataclass
class GeometrySpec:
    """
    Unvalidated description of the periodic microstructure.

    Coordinates are in cell units: the cell is Q = (0, 1)^2, and every
    primitive must lie in the open cube Q_delta = (delta, 1 - delta)^2.
    """

    delta: float
    e_shapes: list[Shape] = field(default_factory=list)
    f_curves: list[Polyline] = field(default_factory=list)
    dim: int = 2

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeometrySpec:
        """
        Create a GeometrySpec from the geometry JSON document.

        Args:
            data: Dictionary with keys:
                - delta: margin in (0, 1/2)
                - E: list of primitives ({"kind": "disk" | "rect" | "polygon", ...})
                - F: list of polylines ({"points": [[x, y], ...]})
                - dim: optional, must be 2

        Returns:
            A new GeometrySpec instance
        """
        if "delta" not in data:
            raise GeometryError("Geometry document is missing 'delta'")
        f_curves = []
        for curve in data.get("F", []):
            if "points" not in curve:
                raise BadPrimitive("F polyline is missing 'points'")
            f_curves.append(Polyline(points=tuple(tuple(p) for p in curve["points"])))
        return cls(
            delta=float(data["delta"]),
            e_shapes=[shape_from_dict(s) for s in data.get("E", [])],
            f_curves=f_curves,
            dim=int(data.get("dim", 2)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> GeometrySpec:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict[str, Any]:
        return {
            "delta": self.delta,
            "E": [s.to_dict() for s in self.e_shapes],
            "F": [c.to_dict() for c in self.f_curves],
            "dim": self.dim,
        }


@dataclass(frozen=True, eq=False)
class Geometry:
    """A validated microstructure with cached analytic measures."""

    spec: GeometrySpec
    area_E: float
    perim_E: float
    length_F: float

    @property
    def delta(self) -> float:
        return self.spec.delta

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def e_shapes(self) -> list[Shape]:
        return self.spec.e_shapes

    @property
    def f_curves(self) -> list[Polyline]:
        return self.spec.f_curves

    @cached_property
    def f_union(self) -> MultiLineString | None:
        if not self.f_curves:
            return None
        return MultiLineString([c.points for c in self.f_curves])

    @cached_property
    def fingerprint(self) -> str:
        """Stable hash of the canonical geometry JSON."""
        normalized = json.dumps(self.spec.to_dict(), sort_keys=True)
        return hashlib.md5(normalized.encode()).hexdigest()

    # Vectorized predicates in cell coordinates (no periodic reduction).

    def e_contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for shape in self.e_shapes:
            inside |= shape.contains_xy(x, y)
        return inside

    def e_intersects_segments(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        hit = np.zeros(len(a), dtype=bool)
        for shape in self.e_shapes:
            hit |= shape.intersects_segments(a, b)
        return hit

    def f_crosses_segments(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Open-segment crossing test against F for segments (a_k, b_k)."""
        if self.f_union is None:
            return np.zeros(len(a), dtype=bool)
        lines = shapely.linestrings(np.stack([a, b], axis=1))
        hit = shapely.intersects(lines, self.f_union)
        # Segments touching F only at an endpoint do not cross it.
        touching = shapely.intersects_xy(self.f_union, a[:, 0], a[:, 1])
        touching |= shapely.intersects_xy(self.f_union, b[:, 0], b[:, 1])
        for k in np.flatnonzero(hit & touching):
            hit[k] = _open_segment_meets(self.f_union, a[k], b[k])
        return hit

    def rasterized_area(self, h: float) -> float:
        """Fraction of the cell covered by E, sampled at cell centers of an h-grid."""
        n = int(round(1.0 / h))
        centers = (np.arange(n) + 0.5) / n
        x, y = np.meshgrid(centers, centers, indexing="xy")
        return float(self.e_contains_xy(x, y).mean())


def _open_segment_meets(target, a: Sequence[float], b: Sequence[float]) -> bool:
    seg = LineString([tuple(a), tuple(b)])
    inter = seg.intersection(target)
    if inter.is_empty:
        return False
    return not inter.difference(MultiPoint([tuple(a), tuple(b)])).is_empty


def validate(spec: GeometrySpec) -> Geometry:
    """
    Validate a microstructure and cache its analytic measures.

    Args:
        spec: The unvalidated geometry description.

    Returns:
        A validated Geometry.

    Raises:
        DimensionUnsupported: If spec.dim != 2.
        BadPrimitive: If delta is outside (0, 1/2).
        MarginViolation: If a primitive leaves Q_delta.
        OverlapViolation: If two E primitives, or an E primitive and an F
            polyline, or two F polylines, are closer than SEP_TOL.
    """
    if spec.dim != 2:
        raise DimensionUnsupported(
            f"Only dim=2 geometries are supported, got {spec.dim}"
        )
    if not (0.0 < spec.delta < 0.5):
        raise BadPrimitive(f"delta must lie in (0, 1/2), got {spec.delta}")

    margin_errors = []
    for shape in spec.e_shapes:
        margin_errors.extend(shape.validate(spec.delta))
    for curve in spec.f_curves:
        margin_errors.extend(curve.validate(spec.delta))
    if margin_errors:
        raise MarginViolation("; ".join(margin_errors))

    overlap_errors = []
    shapes = spec.e_shapes
    for i in range(len(shapes)):
        for j in range(i + 1, len(shapes)):
            if shapes[i].distance_to(shapes[j]) <= SEP_TOL:
                overlap_errors.append(f"E primitives {i} and {j} intersect or touch")
        for k, curve in enumerate(spec.f_curves):
            if shapes[i].distance_to_geometry(curve.line) <= SEP_TOL:
                overlap_errors.append(f"E primitive {i} meets F polyline {k}")
    curves = spec.f_curves
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            if curves[i].line.distance(curves[j].line) <= SEP_TOL:
                overlap_errors.append(f"F polylines {i} and {j} intersect or touch")
    if overlap_errors:
        raise OverlapViolation("; ".join(overlap_errors))

    return Geometry(
        spec=spec,
        area_E=math.fsum(s.area() for s in shapes),
        perim_E=math.fsum(s.perimeter() for s in shapes),
        length_F=math.fsum(c.length() for c in curves),
    )


def load_geometry(path: str | Path) -> Geometry:
    """Read and validate a geometry JSON file."""
    return validate(GeometrySpec.from_json(path))


def perimeter_E(geom: Geometry) -> float:
    """Exact perimeter P(E, Q) of the union of the (disjoint) E primitives."""
    return geom.perim_E


def reduce_point(point: Sequence[float]) -> np.ndarray:
    """Map coordinates to [0, 1) by floor subtraction."""
    p = np.asarray(point, dtype=float)
    return p - np.floor(p)


def tiled_membership(
    geom: Geometry, point: Sequence[float], tol: float = 1e-9
) -> Membership:
    """
    Classify a point of R^2 against the tiled sets E + Z^2 and F + Z^2.

    Args:
        geom: Validated geometry.
        point: Coordinates in R^2.
        tol: Distance below which a point counts as near F.

    Returns:
        Membership.IN_E, Membership.NEAR_F or Membership.OUTSIDE.
    """
    x, y = reduce_point(point)
    if geom.e_contains_xy(np.array([x]), np.array([y]))[0]:
        return Membership.IN_E
    if geom.f_union is not None and geom.f_union.distance(shapely.Point(x, y)) < tol:
        return Membership.NEAR_F
    return Membership.OUTSIDE


def segment_crosses(
    geom: Geometry, a: Sequence[float], b: Sequence[float]
) -> SegmentHit:
    """
    Classify the segment (a, b) against the tiled microstructure.

    The segment is tested against every integer translate of the cell that
    its bounding box overlaps, so segments of any length are handled exactly.

    Returns:
        SegmentHit.CROSSES_F if the open segment meets F + Z^2,
        SegmentHit.ENTERS_E if the closed segment meets E + Z^2,
        SegmentHit.NEITHER otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.array_equal(a, b):
        raise ValueError("segment_crosses needs two distinct points")
    lo = np.floor(np.minimum(a, b)).astype(int)
    hi = np.floor(np.maximum(a, b)).astype(int)
    shifts = [
        np.array([zx, zy], dtype=float)
        for zx in range(lo[0], hi[0] + 1)
        for zy in range(lo[1], hi[1] + 1)
    ]
    if geom.f_union is not None:
        for z in shifts:
            if _open_segment_meets(geom.f_union, a - z, b - z):
                return SegmentHit.CROSSES_F
    for z in shifts:
        if geom.e_intersects_segments((a - z)[None, :], (b - z)[None, :])[0]:
            return SegmentHit.ENTERS_E
    return SegmentHit.NEITHER
