"""Shared geometries and fixture documents."""

import shutil

import pytest

from brittlehom.fixtures import Fixture, shipped_fixtures
from brittlehom.geometry import GeometrySpec, validate


def _shipped(name):
    return next(p for p in shipped_fixtures() if p.stem == name)


@pytest.fixture
def disk25():
    """One disk of radius 1/4 centred in the cell, delta = 0.2."""
    return Fixture.load(_shipped("disk25")).geometry


@pytest.fixture
def slit8():
    """One horizontal slit crossing three vertical bonds at m = 8."""
    return Fixture.load(_shipped("slit8")).geometry


@pytest.fixture
def empty():
    """No inclusions and no slits."""
    return Fixture.load(_shipped("empty")).geometry


@pytest.fixture
def mid_slit():
    """A horizontal slit on the line y = 1/2."""
    return validate(
        GeometrySpec.from_dict(
            {"delta": 0.2, "E": [], "F": [{"points": [[0.3, 0.5], [0.7, 0.5]]}]}
        )
    )


@pytest.fixture
def slit8_fixture():
    """The shipped slit8 fixture document."""
    return Fixture.load(_shipped("slit8"))


@pytest.fixture
def slit8_path(tmp_path):
    """A writable copy of the slit8 fixture file."""
    target = tmp_path / "slit8.json"
    shutil.copy(_shipped("slit8"), target)
    return target


@pytest.fixture
def shipped_path():
    """Path lookup for shipped fixture documents by name."""
    return _shipped
