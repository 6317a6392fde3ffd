"""Disk primitive."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from shapely.geometry import Point

from brittlehom.errors import BadPrimitive

from .base import Shape


@dataclass(frozen=True)
class Disk(Shape):
    """Closed disk with the given center and radius."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if len(self.center) != 2:
            raise BadPrimitive(f"Disk center needs 2 coordinates, got {self.center}")
        if not math.isfinite(self.radius) or self.radius <= 0:
            raise BadPrimitive(f"Disk radius must be positive, got {self.radius}")

    @property
    def kind(self) -> str:
        return "disk"

    @cached_property
    def core(self) -> Point:
        return Point(*self.center)

    @property
    def offset(self) -> float:
        return self.radius

    def area(self) -> float:
        return math.pi * self.radius**2

    def perimeter(self) -> float:
        return 2.0 * math.pi * self.radius

    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        cx, cy = self.center
        return (np.asarray(x) - cx) ** 2 + (np.asarray(y) - cy) ** 2 <= self.radius**2

    def intersects_segments(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        d = b - a
        length2 = np.einsum("ij,ij->i", d, d)
        s = np.einsum("ij,ij->i", c - a, d) / np.where(length2 > 0, length2, 1.0)
        s = np.clip(s, 0.0, 1.0)
        nearest = a + s[:, None] * d
        dist2 = np.einsum("ij,ij->i", nearest - c, nearest - c)
        return dist2 <= self.radius**2

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "disk", "center": list(self.center), "radius": self.radius}
