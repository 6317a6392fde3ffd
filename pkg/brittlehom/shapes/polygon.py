"""Simple polygon primitive."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from brittlehom.errors import BadPrimitive

from .base import Shape


@dataclass(frozen=True)
class Polygon(Shape):
    """Closed simple polygon given by its vertex list (not repeated at the end)."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 3:
            raise BadPrimitive(
                f"Polygon needs at least 3 vertices, got {len(self.points)}"
            )
        if any(len(p) != 2 for p in self.points):
            raise BadPrimitive("Polygon vertices must have 2 coordinates")
        poly = ShapelyPolygon(self.points)
        if not poly.is_valid:
            reason = shapely.is_valid_reason(poly)
            raise BadPrimitive(f"Polygon is not simple: {reason}")
        if poly.area <= 0:
            raise BadPrimitive("Polygon has zero area")

    @property
    def kind(self) -> str:
        return "polygon"

    @cached_property
    def core(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.points)

    def area(self) -> float:
        return float(self.core.area)

    def perimeter(self) -> float:
        return float(self.core.length)

    def bounds(self) -> tuple[float, float, float, float]:
        return tuple(float(v) for v in self.core.bounds)

    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return shapely.intersects_xy(self.core, x, y)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "polygon", "points": [list(p) for p in self.points]}
