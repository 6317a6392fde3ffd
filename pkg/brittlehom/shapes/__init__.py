"""Closed primitives that make up the inclusion set E."""

from typing import Any

from brittlehom.errors import BadPrimitive

from .base import Shape
from .disk import Disk
from .polygon import Polygon
from .rect import Rect


def shape_from_dict(data: dict[str, Any]) -> Shape:
    """Create a primitive from its geometry JSON representation."""
    kind = data.get("kind")
    try:
        if kind == "disk":
            return Disk(center=tuple(data["center"]), radius=float(data["radius"]))
        if kind == "rect":
            return Rect(lo=tuple(data["lo"]), hi=tuple(data["hi"]))
        if kind == "polygon":
            return Polygon(points=tuple(tuple(p) for p in data["points"]))
    except KeyError as e:
        raise BadPrimitive(f"Missing field {e} for {kind} primitive") from e
    raise BadPrimitive(f"Unknown primitive kind: {kind}")


__all__ = [
    "Disk",
    "Polygon",
    "Rect",
    "Shape",
    "shape_from_dict",
]
