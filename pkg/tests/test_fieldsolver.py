import math

import numpy as np
import pytest

from maglens.constants import GAUSS, NM
from maglens.fieldsolver import (EvaluationTooCloseError, BiasField, FieldSample,
                                 PlaneSpec, face_distance, field_at, field_grid,
                                 field_of_patches, jacobian_at, jacobian_batch,
                                 magnet_field, planar_distance_to_footprint)
from maglens.geometry import LensGeometry, PolarPatch, decompose, scale
from maglens.quadrature import QuadratureSpec


class TestFieldSample:
    def test_magnitude_is_cached_norm(self):
        s = FieldSample(position=np.zeros(3), b=np.array([3e-3, 4e-3, 0.0]))
        assert s.magnitude == pytest.approx(5e-3, rel=1e-14)


class TestFieldAt:
    def test_vanishing_magnetization_leaves_bias(self, bias, spec):
        g = LensGeometry(mu0_M=1e-30)
        s = field_at(g, bias, np.array([3e-9, -4e-9, 20e-9]), spec)
        assert s.b == pytest.approx([0.0, 0.0, bias.b_bias_z], abs=1e-25)

    def test_on_axis_transverse_components_vanish(self, geom, bias, spec):
        for z in (10e-9, 23.8e-9, 40e-9):
            s = field_at(geom, bias, np.array([0.0, 0.0, z]), spec)
            assert abs(s.b[0]) < 1e-9 * abs(s.b[2])
            assert abs(s.b[1]) < 1e-9 * abs(s.b[2])

    def test_focus_magnitude_matches_reported_value(self, geom, bias, spec):
        s = field_at(geom, bias, np.array([0.0, 0.0, 23.8e-9]), spec)
        assert s.magnitude == pytest.approx(99.5 * GAUSS, abs=2 * GAUSS)

    def test_far_field_approaches_bias(self, geom, bias, spec):
        s = field_at(geom, bias, np.array([0.0, 0.0, 1000e-9]), spec)
        assert s.magnitude == pytest.approx(650 * GAUSS, abs=1 * GAUSS)

    def test_too_close_raises(self, geom, bias, spec):
        with pytest.raises(EvaluationTooCloseError):
            field_at(geom, bias, np.array([0.0, 0.0, 0.5e-9]), spec)
        with pytest.raises(EvaluationTooCloseError):
            field_at(geom, bias, np.array([50e-9, 1e-10, 0.3e-9]), spec)

    def test_order_doubling_is_converged(self, geom, bias):
        coarse = QuadratureSpec(radial_order=48, angular_order=48)
        fine = QuadratureSpec(radial_order=96, angular_order=96)
        r = np.array([0.0, 0.0, 23.8e-9])
        b1 = field_at(geom, bias, r, coarse).b
        b2 = field_at(geom, bias, r, fine).b
        assert np.max(np.abs(b1 - b2)) < 1e-6 * np.linalg.norm(b2)


class TestSuperposition:
    def test_full_disk_equals_cut_plus_quarters(self, geom, spec):
        # full disk = (disk with cuts) + (the two removed quarter disks)
        pts = np.array([[5e-9, -3e-9, 20e-9], [0.0, 0.0, 30e-9], [10e-9, 12e-9, 15e-9]])
        full_patches = []
        quarter_patches = []
        for z_plane, sign in ((0.0, +1), (-geom.thickness, -1)):
            full_patches.append(PolarPatch(0.0, geom.outer_radius, 0.0, 2 * math.pi,
                                           z_plane, sign))
            for lo, hi in geom.cut_quadrants:
                quarter_patches.append(PolarPatch(0.0, geom.inner_radius,
                                                  lo % (2 * math.pi),
                                                  lo % (2 * math.pi) + math.pi / 2,
                                                  z_plane, sign))
        b_full = field_of_patches(full_patches, geom.mu0_M, pts, spec)
        b_cut = magnet_field(geom, pts, spec)
        b_quarters = field_of_patches(quarter_patches, geom.mu0_M, pts, spec)
        assert np.allclose(b_full, b_cut + b_quarters,
                           rtol=0, atol=1e-8 * np.max(np.abs(b_full)))


class TestScalingProperty:
    @pytest.mark.parametrize("s", [0.5, 10.0])
    def test_field_is_scale_invariant(self, geom, spec, s):
        rng = np.random.default_rng(5)
        pts = np.column_stack([rng.uniform(-25e-9, 25e-9, 10),
                               rng.uniform(-25e-9, 25e-9, 10),
                               rng.uniform(12e-9, 45e-9, 10)])
        b_ref = magnet_field(geom, pts, spec)
        b_scaled = magnet_field(scale(geom, s), s * pts, spec)
        assert np.max(np.abs(b_scaled - b_ref)) < 1e-6 * np.max(np.abs(b_ref))


class TestJacobian:
    def test_trace_and_symmetry(self, geom, bias, spec):
        j = jacobian_at(geom, bias, np.array([4e-9, -7e-9, 22e-9]), spec)
        scale_ = np.max(np.abs(j.entries))
        assert abs(j.trace) < 1e-6 * scale_
        assert j.asymmetry < 1e-6 * scale_

    def test_matches_finite_differences(self, geom, bias, spec):
        rng = np.random.default_rng(9)
        pts = np.column_stack([rng.uniform(-15e-9, 15e-9, 5),
                               rng.uniform(-15e-9, 15e-9, 5),
                               rng.uniform(15e-9, 35e-9, 5)])
        h = 0.01e-9
        jac = jacobian_batch(geom, bias, pts, spec)
        for p, j in zip(pts, jac):
            fd = np.empty((3, 3))
            for axis in range(3):
                e = np.zeros(3)
                e[axis] = h
                bp = magnet_field(geom, (p + e)[None, :], spec)[0]
                bm = magnet_field(geom, (p - e)[None, :], spec)[0]
                fd[:, axis] = (bp - bm) / (2 * h)
            mask = np.abs(fd) > 1 * GAUSS / NM
            assert np.allclose(j[mask], fd[mask], rtol=1e-3)

    def test_focus_tensor_magnitude(self, geom, bias, spec, focus):
        j = jacobian_at(geom, bias, focus.position, spec)
        eigs = j.eigenvalues()
        assert eigs[0] == pytest.approx(2.5e6, abs=0.2e6)
        assert eigs[2] == pytest.approx(-2.5e6, abs=0.2e6)

    def test_harmonic_components(self, geom, bias, spec):
        # each Cartesian component of B is harmonic in free space
        rng = np.random.default_rng(13)
        h = 0.05e-9
        for _ in range(5):
            p = np.array([rng.uniform(-15e-9, 15e-9), rng.uniform(-15e-9, 15e-9),
                          rng.uniform(15e-9, 35e-9)])
            offsets = np.vstack([p, p + h * np.eye(3), p - h * np.eye(3)])
            b = magnet_field(geom, offsets, spec)
            lap = (b[1:4].sum(axis=0) + b[4:7].sum(axis=0) - 6 * b[0]) / h**2
            j_scale = np.max(np.abs(jacobian_batch(geom, bias, p[None], spec)))
            assert np.max(np.abs(lap)) < 1e-3 * j_scale / h


class TestFieldGrid:
    def test_two_by_two_matches_field_at_bitwise(self, geom, bias, spec):
        c = 1 / math.sqrt(2)
        plane = PlaneSpec(origin=(0.0, 0.0, 23.8e-9), u_axis=(c, c, 0.0),
                          v_axis=(0.0, 0.0, 1.0), u_range=(-5e-9, 5e-9),
                          v_range=(-5e-9, 5e-9))
        grid = field_grid(geom, bias, plane, 2, 2, spec)
        for j in range(2):
            for i in range(2):
                s = field_at(geom, bias, grid.positions[j, i], spec)
                assert np.array_equal(grid.b[j, i], s.b)

    def test_row_major_layout(self, geom, bias, spec):
        plane = PlaneSpec(origin=(0.0, 0.0, 25e-9), u_axis=(1.0, 0.0, 0.0),
                          v_axis=(0.0, 0.0, 1.0), u_range=(-4e-9, 4e-9),
                          v_range=(-2e-9, 2e-9))
        grid = field_grid(geom, bias, plane, 3, 2, spec)
        assert grid.positions.shape == (2, 3, 3)
        assert grid.positions[0, 0] == pytest.approx([-4e-9, 0.0, 23e-9])
        assert grid.positions[1, 2] == pytest.approx([4e-9, 0.0, 27e-9])

    def test_mirror_symmetry_on_m45_plane(self, geom, bias, spec):
        # the -45 degree vertical plane is a mirror plane: |B| is even in u
        c = 1 / math.sqrt(2)
        plane = PlaneSpec(origin=(0.0, 0.0, 23.8e-9), u_axis=(c, -c, 0.0),
                          v_axis=(0.0, 0.0, 1.0), u_range=(-8e-9, 8e-9),
                          v_range=(-8e-9, 8e-9))
        grid = field_grid(geom, bias, plane, 9, 5, spec)
        assert np.allclose(grid.magnitude, grid.magnitude[:, ::-1],
                           rtol=1e-9, atol=1e-12)

    def test_bad_plane_axes_rejected(self):
        with pytest.raises(ValueError):
            PlaneSpec(origin=(0, 0, 0), u_axis=(1, 0, 0), v_axis=(1, 0, 0),
                      u_range=(-1, 1), v_range=(-1, 1))
        with pytest.raises(ValueError):
            PlaneSpec(origin=(0, 0, 0), u_axis=(2, 0, 0), v_axis=(0, 1, 0),
                      u_range=(-1, 1), v_range=(-1, 1))


class TestDistanceGuard:
    def test_planar_distance_inside_is_zero(self, geom):
        d = planar_distance_to_footprint(geom, np.array([-30e-9]), np.array([30e-9]))
        assert d[0] == 0.0

    def test_planar_distance_in_cut(self, geom):
        # point at 45 degrees, r = 20 nm: nearest material is the inner arc
        x = 20e-9 * math.cos(math.radians(45))
        y = 20e-9 * math.sin(math.radians(45))
        d = planar_distance_to_footprint(geom, np.array([x]), np.array([y]))
        # the radial cut edges are closer than the inner arc here
        seg = 20e-9 * math.sin(math.radians(45))
        assert d[0] == pytest.approx(min(20e-9, seg), rel=1e-12)

    def test_face_distance_above_magnet(self, geom):
        d = face_distance(geom, np.array([[-30e-9, 30e-9, 7e-9]]))
        assert d[0] == pytest.approx(7e-9, rel=1e-12)

    def test_point_beside_magnet_is_allowed(self, geom, bias, spec):
        s = field_at(geom, bias, np.array([80e-9, 0.0, -5e-9]), spec)
        assert np.isfinite(s.magnitude)
