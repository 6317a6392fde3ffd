"""Base class for inclusion primitives."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np
import shapely
from shapely.geometry.base import BaseGeometry


class Shape(ABC):
    """
    Abstract base class for a closed primitive of the inclusion set E.

    A primitive is described by a shapely "core" geometry plus a radial
    offset, so that the distance between two primitives is
    ``core_a.distance(core_b) - offset_a - offset_b`` exactly. Disks use a
    point core with their radius as offset; rects and polygons use their own
    polygon with offset zero.
    """

    @property
    @abstractmethod
    def kind(self) -> str:
        """Name of the primitive family as used in geometry JSON."""
        ...

    @property
    @abstractmethod
    def core(self) -> BaseGeometry:
        """Shapely core geometry (see class docstring)."""
        ...

    @property
    def offset(self) -> float:
        return 0.0

    @abstractmethod
    def area(self) -> float:
        """Exact area of the primitive."""
        ...

    @abstractmethod
    def perimeter(self) -> float:
        """Exact boundary length of the primitive."""
        ...

    @abstractmethod
    def bounds(self) -> tuple[float, float, float, float]:
        """Closed bounding box (xmin, ymin, xmax, ymax)."""
        ...

    @abstractmethod
    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorized closed-set membership of points (x, y)."""
        ...

    def intersects_segments(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """
        Vectorized test of closed segments [a, b] against the primitive.

        Args:
            a: (k, 2) array of segment starts.
            b: (k, 2) array of segment ends.

        Returns:
            Boolean array of length k.
        """
        lines = shapely.linestrings(np.stack([a, b], axis=1))
        return shapely.intersects(lines, self.core)

    @abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """Convert to the geometry JSON representation."""
        ...

    def validate(self, delta: float) -> list[str]:
        """
        Check that the primitive lies inside the open cube (delta, 1 - delta)^2.

        Returns:
            A list of margin violation messages. Empty list if valid.
        """
        xmin, ymin, xmax, ymax = self.bounds()
        lo, hi = delta, 1.0 - delta
        if xmin <= lo or ymin <= lo or xmax >= hi or ymax >= hi:
            return [
                f"{self!r} leaves Q_delta=({lo:g}, {hi:g})^2 "
                f"(bounds {xmin:g}, {ymin:g}, {xmax:g}, {ymax:g})"
            ]
        return []

    def distance_to(self, other: Shape) -> float:
        """Euclidean distance between the closed primitives (0 if they meet)."""
        return max(0.0, self.core.distance(other.core) - self.offset - other.offset)

    def distance_to_geometry(self, geometry: BaseGeometry) -> float:
        """Exact distance to an arbitrary shapely geometry (e.g. an F polyline)."""
        return max(0.0, self.core.distance(geometry) - self.offset)
