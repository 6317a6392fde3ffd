"""Axis-aligned rectangle primitive."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from shapely.geometry import Polygon, box

from brittlehom.errors import BadPrimitive

from .base import Shape


@dataclass(frozen=True)
class Rect(Shape):
    """Closed axis-aligned rectangle [lo, hi]."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        if len(self.lo) != 2 or len(self.hi) != 2:
            raise BadPrimitive(
                f"Rect corners must have 2 coordinates, got {self.lo}, {self.hi}"
            )
        if not (self.lo[0] < self.hi[0] and self.lo[1] < self.hi[1]):
            raise BadPrimitive(
                f"Rect must have lo < hi in every axis, got {self.lo}, {self.hi}"
            )

    @property
    def kind(self) -> str:
        return "rect"

    @cached_property
    def core(self) -> Polygon:
        return box(self.lo[0], self.lo[1], self.hi[0], self.hi[1])

    def area(self) -> float:
        return (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])

    def perimeter(self) -> float:
        return 2.0 * ((self.hi[0] - self.lo[0]) + (self.hi[1] - self.lo[1]))

    def bounds(self) -> tuple[float, float, float, float]:
        return (self.lo[0], self.lo[1], self.hi[0], self.hi[1])

    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        inside_x = (x >= self.lo[0]) & (x <= self.hi[0])
        return inside_x & (y >= self.lo[1]) & (y <= self.hi[1])

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "rect", "lo": list(self.lo), "hi": list(self.hi)}
