"""Tests for f0, the effective tensor and the crossover load."""

import math

import numpy as np
import pytest

from brittlehom.cell_tensor import (
    cell_lattice,
    crossover_norm,
    effective_tensor,
    f0,
)
from brittlehom.lattice import BondKind

# f0(e1) on the disk cell with midpoint classification, per grid resolution.
DISK25_F0_E1 = {16: 0.67582, 32: 0.67836, 64: 0.66998, 128: 0.67172}


class TestF0:
    """Tests for the subcritical density f0."""

    def test_zero_slope(self, disk25):
        """f0(0) = 0."""
        assert f0(disk25, [0.0, 0.0], m=16) == 0.0

    def test_empty_geometry(self, empty):
        """Without microstructure f0 is |xi|^2."""
        assert f0(empty, [3.0, 4.0], m=8) == pytest.approx(25.0)

    def test_perforated_cell(self, disk25):
        """The cell lattice voids E and is periodic with t = 1."""
        lat = cell_lattice(disk25, 16)
        assert lat.t == 1
        assert lat.bc.value == "periodic"
        assert lat.kind_counts()["void"] > 0
        assert not np.any(lat.bond_kind == BondKind.BREAKABLE)

    @pytest.mark.parametrize("m", [16, 32])
    def test_below_volume_bound(self, disk25, m):
        """f0(e1) lies below (1 - |E|) |e1|^2."""
        assert f0(disk25, [1.0, 0.0], m=m) < 1 - math.pi / 16

    @pytest.mark.slow
    def test_volume_bound_with_mesh_term(self, disk25):
        """f0(e1) <= (1 - pi/16) + C h with C h measured from m = 32 and 64."""
        f32 = f0(disk25, [1.0, 0.0], m=32)
        f64 = f0(disk25, [1.0, 0.0], m=64)
        ch = 2 * abs(f32 - f64)
        assert max(f32, f64) <= 1 - math.pi / 16 + ch

    @pytest.mark.slow
    def test_resolution_table(self, disk25):
        """f0(e1) keeps its recorded values and neighbouring grids agree to 0.01."""
        values = {m: f0(disk25, [1.0, 0.0], m=m) for m in DISK25_F0_E1}
        for m, value in values.items():
            assert value == pytest.approx(DISK25_F0_E1[m], abs=1e-5)
        ms = sorted(values)
        gaps = [abs(values[a] - values[b]) for a, b in zip(ms, ms[1:])]
        assert all(gap < 0.01 for gap in gaps)

    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    def test_two_homogeneous(self, disk25, lam):
        """f0(lambda xi) = lambda^2 f0(xi)."""
        xi = np.array([0.7, -0.4])
        assert f0(disk25, lam * xi, m=16) == pytest.approx(
            lam**2 * f0(disk25, xi, m=16), rel=1e-8
        )

    def test_parallelogram(self, slit8):
        """f0(xi + eta) + f0(xi - eta) = 2 f0(xi) + 2 f0(eta)."""
        rng = np.random.default_rng(11)
        for _ in range(3):
            xi, eta = rng.normal(size=2), rng.normal(size=2)
            lhs = f0(slit8, xi + eta, m=8) + f0(slit8, xi - eta, m=8)
            rhs = 2 * f0(slit8, xi, m=8) + 2 * f0(slit8, eta, m=8)
            assert lhs == pytest.approx(rhs, rel=1e-6)


class TestEffectiveTensor:
    """Tests for effective_tensor."""

    def test_empty_is_identity(self, empty):
        """No microstructure gives A0 = Id."""
        tensor = effective_tensor(empty, m=8)
        np.testing.assert_allclose(tensor.A0, np.eye(2), atol=1e-8)

    def test_disk_is_isotropic(self, disk25):
        """A centred disk gives diag(a, a) with a < 1 - pi/16."""
        tensor = effective_tensor(disk25, m=16)
        A0 = tensor.A0
        assert A0[0, 0] == pytest.approx(A0[1, 1], abs=1e-6)
        assert abs(A0[0, 1]) < 1e-6
        assert A0[0, 1] == A0[1, 0]
        assert A0[0, 0] < 1 - math.pi / 16

    def test_eigenvalues(self, disk25):
        """A0 is positive definite and dominated by the identity."""
        eig = effective_tensor(disk25, m=16).eigenvalues()
        assert eig.min() > 0
        assert eig.max() <= 1 + 1e-6

    @pytest.mark.slow
    def test_fine_grid_eigenvalue(self, disk25):
        """The largest eigenvalue at m = 128 keeps its recorded value."""
        tensor = effective_tensor(disk25, m=128)
        assert tensor.eigenvalues().max() == pytest.approx(DISK25_F0_E1[128], abs=1e-5)

    def test_horizontal_slit(self, slit8):
        """A horizontal slit leaves flow along it unobstructed."""
        A0 = effective_tensor(slit8, m=8).A0
        assert A0[0, 0] == pytest.approx(1.0, abs=1e-9)
        assert A0[1, 1] < 1.0

    def test_quadratic_matches_f0(self, disk25):
        """A0 xi . xi reproduces f0(xi)."""
        tensor = effective_tensor(disk25, m=16)
        xi = np.array([0.3, -1.2])
        assert tensor.quadratic(xi) == pytest.approx(f0(disk25, xi, m=16), rel=1e-6)

    def test_to_dict(self, disk25):
        """The JSON form carries A0, m and the measures of E."""
        data = effective_tensor(disk25, m=16).to_dict()
        assert data["m"] == 16
        assert data["area_E"] == pytest.approx(math.pi / 16)
        assert data["perim_E"] == pytest.approx(math.pi / 2)
        assert len(data["A0"]) == 2
        assert data["fingerprint"] == disk25.fingerprint


class TestCrossoverNorm:
    """Tests for crossover_norm."""

    def test_empty_never_crosses(self, empty):
        """With f0 = |xi|^2 the perimeter bound never wins."""
        assert crossover_norm(empty, [1.0, 0.0], m=8) == math.inf

    def test_disk_crossover(self, disk25):
        """At the crossover load f0(xi) + P(E, Q) = |xi|^2."""
        d = np.array([1.0, 0.0])
        M = crossover_norm(disk25, d, m=16)
        assert 0 < M < math.inf
        assert f0(disk25, M * d, m=16) + disk25.perim_E == pytest.approx(
            M * M, rel=1e-8
        )
