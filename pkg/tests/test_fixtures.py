"""Tests for the shipped fixture documents and the oracle checks."""

import json

import pytest

from brittlehom.brittle_ms import brute_force_min
from brittlehom.fixtures import (
    Fixture,
    geometry_document,
    regen_oracle,
    shipped_fixtures,
    verify_fixture,
    weight_key,
)


class TestShippedFixtures:
    """Tests for the fixture documents bundled with the package."""

    def test_names(self):
        """The three reference geometries are shipped, sorted by name."""
        assert [p.stem for p in shipped_fixtures()] == ["disk25", "empty", "slit8"]

    def test_all_load(self):
        """Every shipped document validates."""
        for path in shipped_fixtures():
            fixture = Fixture.load(path)
            assert fixture.name == path.stem

    def test_slit8_problem(self, slit8_fixture):
        """The slit fixture carries three surface weights and a 1-cell problem."""
        assert slit8_fixture.surface_weights == [0.01, 1.0, 10.0]
        p = slit8_fixture.ms_problem(1.0)
        assert p.lattice.t == 1
        assert p.lattice.bc.value == "dirichlet_zero"
        assert len(p.lattice.breakable) == 3

    def test_scaled_problem(self, slit8_fixture):
        """scale multiplies the fixture's xi."""
        p = slit8_fixture.ms_problem(1.0, scale=2.0)
        assert list(p.xi) == [0.0, 2.0]

    def test_no_problem_section(self, shipped_path):
        """Geometry-only fixtures have no crack problem."""
        fixture = Fixture.load(shipped_path("disk25"))
        with pytest.raises(ValueError, match="no problem"):
            fixture.ms_problem(1.0)


class TestDocuments:
    """Tests for the document helpers."""

    def test_geometry_document(self):
        """Bare geometry documents and fixture documents are both accepted."""
        bare = {"delta": 0.2}
        assert geometry_document(bare) is bare
        assert geometry_document({"geometry": bare, "name": "x"}) is bare

    def test_weight_key(self):
        """Keys are the repr of the float weight."""
        assert weight_key(1) == "1.0"
        assert weight_key(0.01) == "0.01"

    def test_save_round_trip(self, tmp_path, slit8_fixture):
        """A saved fixture reloads with the same problem and expected totals."""
        path = tmp_path / "copy.json"
        slit8_fixture.save(path)
        again = Fixture.load(path)
        assert again.problem == slit8_fixture.problem
        assert again.expected == slit8_fixture.expected
        assert again.geometry.fingerprint == slit8_fixture.geometry.fingerprint


class TestOracle:
    """Tests for regen_oracle and verify_fixture."""

    def test_expected_totals(self, slit8_fixture):
        """Tough bonds leave the slit intact with total |xi|^2."""
        assert slit8_fixture.expected["1.0"] == 1.0
        assert slit8_fixture.expected["10.0"] == 1.0

    def test_expected_weak_slit(self, slit8_fixture):
        """A weak slit opens completely and the shipped total matches the oracle."""
        assert set(slit8_fixture.expected) == {"0.01", "1.0", "10.0"}
        sol = brute_force_min(slit8_fixture.ms_problem(0.01))
        assert len(sol.crack) == 3
        assert sol.total == pytest.approx(slit8_fixture.expected["0.01"], abs=1e-9)
        assert sol.total == pytest.approx(0.852963473891552, abs=1e-9)

    def test_missing_expectation_reported(self, slit8_fixture):
        """A surface weight without an expected total is a violation."""
        del slit8_fixture.expected["0.01"]
        errors = verify_fixture(slit8_fixture)
        assert len(errors) == 1
        assert "no expected total" in errors[0]

    def test_regen_oracle(self, slit8_path):
        """Regeneration fills in every surface weight."""
        fixture = regen_oracle(Fixture.load(slit8_path))
        assert set(fixture.expected) == {"0.01", "1.0", "10.0"}
        assert fixture.expected["1.0"] == pytest.approx(1.0, abs=1e-9)
        assert fixture.expected["0.01"] < 1.0
        fixture.save(slit8_path)
        with open(slit8_path, encoding="utf-8") as f:
            assert json.load(f)["expected"]["0.01"] == fixture.expected["0.01"]

    @pytest.mark.parametrize("name", ["slit8", "empty"])
    def test_verify_passes(self, shipped_path, name):
        """The shipped fixtures satisfy every checked invariant."""
        assert verify_fixture(Fixture.load(shipped_path(name))) == []

    @pytest.mark.slow
    def test_verify_disk(self, shipped_path):
        """The disk tensor is symmetric, bounded and matches f0."""
        assert verify_fixture(Fixture.load(shipped_path("disk25"))) == []

    def test_verify_reports_wrong_expectation(self, slit8_fixture):
        """A wrong expected total is reported, not raised."""
        slit8_fixture.expected["1.0"] = 2.0
        errors = verify_fixture(slit8_fixture)
        assert len(errors) == 1
        assert "expected" in errors[0]
