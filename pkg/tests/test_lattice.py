"""Tests for lattice construction, crack states and cell classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brittlehom.errors import CrackOutsideInclusions, ResolutionTooCoarse
from brittlehom.fixtures import read_geometry, shipped_fixtures
from brittlehom.lattice import (
    BondKind,
    BoundaryCondition,
    ClassificationMode,
    CrackState,
    build,
    classify_cells,
)


def _slit_bonds(lat):
    """Vertical bonds crossing y = 0.4375 (mod 1) with x mod 1 in (0.3, 0.7)."""
    mid = lat.bond_mid
    vertical = lat.bond_dx[:, 1] > 0
    x, y = np.mod(mid[:, 0], 1.0), np.mod(mid[:, 1], 1.0)
    return np.flatnonzero(vertical & np.isclose(y, 0.4375) & (x > 0.3) & (x < 0.7))


class TestBuild:
    """Tests for build."""

    def test_empty_periodic_counts(self, empty):
        """An 8x8 periodic cell has 64 nodes and 128 elastic bonds."""
        lat = build(empty, t=1, m=8, bc=BoundaryCondition.PERIODIC)
        assert lat.n_nodes == 64
        assert len(lat.free_nodes) == 64
        assert lat.n_bonds == 128
        assert lat.kind_counts() == {"elastic": 128, "breakable": 0, "void": 0}

    def test_dirichlet_counts(self, empty):
        """DirichletZero lattices carry a fixed boundary ring."""
        lat = build(empty, t=2, m=8, bc="dirichlet_zero")
        assert lat.n_nodes == 17 * 17
        assert int(lat.fixed.sum()) == 4 * 16
        assert lat.n_bonds == 2 * 16 * 17

    def test_disk_midpoints_breakable(self, disk25):
        """Bonds with midpoint in the disk are Breakable, all others Elastic."""
        lat = build(disk25, t=1, m=32)
        mid = lat.bond_mid
        inside = (mid[:, 0] - 0.5) ** 2 + (mid[:, 1] - 0.5) ** 2 <= 0.25**2
        np.testing.assert_array_equal(lat.bond_kind == BondKind.BREAKABLE, inside)

    def test_center_bond_breakable(self, disk25):
        """The horizontal bond leaving the cell center is Breakable."""
        lat = build(disk25, t=1, m=32)
        center = 16 + 32 * 16
        assert lat.bond_i[center] == center
        assert lat.bond_kind[center] == BondKind.BREAKABLE

    def test_slit_bonds_two_cells(self, slit8):
        """Exactly the vertical bonds crossing the tiled slit are Breakable."""
        lat = build(slit8, t=2, m=8, bc=BoundaryCondition.DIRICHLET_ZERO)
        expected = _slit_bonds(lat)
        assert len(expected) == 12
        np.testing.assert_array_equal(lat.breakable, expected)

    def test_slit_on_grid_line(self, mid_slit):
        """Bonds touching a slit at a node do not cross it; bonds along it do."""
        lat = build(mid_slit, t=1, m=16, bc=BoundaryCondition.DIRICHLET_ZERO)
        bonds = lat.breakable
        assert np.all(lat.bond_dx[bonds, 0] > 0)
        np.testing.assert_allclose(lat.bond_mid[bonds, 1], 0.5)

    def test_exact_mode_covers_midpoint_mode(self, disk25):
        """Exact classification marks a superset of the midpoint rule."""
        mid = build(disk25, t=1, m=16, mode=ClassificationMode.MIDPOINT)
        exact = build(disk25, t=1, m=16, mode="exact")
        assert set(mid.breakable) <= set(exact.breakable)
        assert len(exact.breakable) > len(mid.breakable)

    def test_void_inclusions(self, disk25):
        """The perforated build turns E bonds into Void bonds."""
        plain = build(disk25, t=1, m=16)
        perforated = build(disk25, t=1, m=16, void_inclusions=True)
        np.testing.assert_array_equal(
            perforated.bond_kind == BondKind.VOID,
            plain.bond_kind == BondKind.BREAKABLE,
        )
        assert len(perforated.breakable) == 0

    def test_periodic_degree(self, disk25):
        """Every periodic node has exactly four incident bonds."""
        lat = build(disk25, t=2, m=16)
        degree = np.bincount(
            np.concatenate([lat.bond_i, lat.bond_j]), minlength=lat.n_nodes
        )
        assert np.all(degree == 4)

    def test_translation_invariance(self, disk25):
        """Bond kinds repeat with the cell period."""
        lat = build(disk25, t=3, m=16)
        keys = np.round(np.mod(lat.bond_mid, 1.0) * 32).astype(int)
        seen = {}
        for key, axis, kind in zip(
            map(tuple, keys), np.argmax(lat.bond_dx, axis=1), lat.bond_kind
        ):
            assert seen.setdefault((key, axis), kind) == kind

    def test_dirichlet_face_weights(self, empty):
        """Bonds lying in a boundary face carry weight 1/2."""
        lat = build(empty, t=1, m=8, bc=BoundaryCondition.DIRICHLET_ZERO)
        on_face = np.isclose(lat.bond_mid, 0.0) | np.isclose(lat.bond_mid, 1.0)
        expected = np.where(on_face.any(axis=1), 0.5, 1.0)
        np.testing.assert_array_equal(lat.bond_weight, expected)

    def test_too_coarse(self, disk25):
        """m * delta < 2 is rejected."""
        with pytest.raises(ResolutionTooCoarse, match="m \\* delta"):
            build(disk25, t=1, m=8)

    def test_bad_t(self, empty):
        """t must be at least one."""
        with pytest.raises(ValueError, match="t must be"):
            build(empty, t=0, m=8)

    def test_bad_m(self, empty):
        """m must be at least four."""
        with pytest.raises(ValueError, match="m must be"):
            build(empty, t=1, m=3)

    def test_summary(self, slit8):
        """The summary reports counts per bond kind."""
        summary = build(slit8, t=1, m=8, bc="dirichlet_zero").summary()
        assert summary["bc"] == "dirichlet_zero"
        assert summary["h"] == 0.125
        assert summary["bond_kinds"]["breakable"] == 3
        assert summary["free_nodes"] == 49


class TestCrackState:
    """Tests for CrackState."""

    def test_measure(self, slit8):
        """The measure is |broken| * h."""
        lat = build(slit8, t=1, m=8, bc="dirichlet_zero")
        crack = CrackState.from_bonds(lat, lat.breakable[:2])
        assert crack.measure == 2 * lat.h
        assert len(crack) == 2

    def test_from_bonds_sorts_and_dedupes(self, slit8):
        """Bond indices are stored sorted and unique."""
        lat = build(slit8, t=1, m=8, bc="dirichlet_zero")
        b = [int(x) for x in lat.breakable]
        crack = CrackState.from_bonds(lat, [b[2], b[0], b[2]])
        assert crack.broken == (b[0], b[2])

    def test_elastic_bond_rejected(self, slit8):
        """Cracks may only use Breakable bonds."""
        lat = build(slit8, t=1, m=8, bc="dirichlet_zero")
        with pytest.raises(CrackOutsideInclusions, match="not Breakable"):
            CrackState.from_bonds(lat, [0])

    def test_out_of_range(self, slit8):
        """Unknown bond indices are rejected."""
        lat = build(slit8, t=1, m=8, bc="dirichlet_zero")
        with pytest.raises(CrackOutsideInclusions, match="out of range"):
            CrackState.from_bonds(lat, [lat.n_bonds])

    def test_mask_round_trip(self, slit8):
        """from_mask inverts mask."""
        lat = build(slit8, t=1, m=8, bc="dirichlet_zero")
        crack = CrackState.from_bonds(lat, lat.breakable)
        assert CrackState.from_mask(lat, crack.mask(lat.n_bonds)) == crack


class TestClassifyCells:
    """Tests for classify_cells."""

    @pytest.fixture
    def lattice(self, slit8):
        """Four slit cells with zero boundary values."""
        return build(slit8, t=2, m=8, bc=BoundaryCondition.DIRICHLET_ZERO)

    def test_empty_crack(self, lattice):
        """No crack, no bad cells."""
        cells = classify_cells(lattice, CrackState.empty(lattice), beta=0.1)
        assert cells.n_bad == 0
        assert cells.n_good == 4

    def test_single_bad_cell(self, lattice):
        """A cell holding twice the threshold is the only bad one."""
        first = [b for b in lattice.breakable if lattice.bond_mid[b].max() < 1.0]
        assert len(first) == 3
        crack = CrackState.from_bonds(lattice, first)
        # measure 3/8 = 2 * beta / t
        cells = classify_cells(lattice, crack, beta=0.375)
        assert cells.bad[0, 0]
        assert cells.n_bad == 1
        assert cells.labels()[0][0] == "bad"
        assert cells.to_dict()["n_good"] == 3

    def test_bad_beta(self, lattice):
        """beta must be positive."""
        with pytest.raises(ValueError):
            classify_cells(lattice, CrackState.empty(lattice), beta=0.0)

    @settings(max_examples=60, deadline=None)
    @given(
        picks=st.lists(st.booleans(), min_size=12, max_size=12),
        beta=st.floats(min_value=0.01, max_value=2.0),
    )
    def test_bad_count_bounded_by_measure(self, picks, beta):
        """N_bad * beta * t^{-(n-1)} never exceeds the crack measure."""
        geom = read_geometry(next(p for p in shipped_fixtures() if p.stem == "slit8"))
        lat = build(geom, t=2, m=8, bc=BoundaryCondition.DIRICHLET_ZERO)
        crack = CrackState.from_mask(
            lat, np.isin(np.arange(lat.n_bonds), lat.breakable[np.array(picks)])
        )
        cells = classify_cells(lat, crack, beta)
        assert cells.n_bad * beta / lat.t <= crack.measure + 1e-12
