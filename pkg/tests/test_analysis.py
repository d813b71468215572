import math

import numpy as np
import pytest

from maglens.analysis import (AnalysisError, ContourSet, GRAD_TOLERANCE,
                              bias_sweep, default_levels, extract_contours,
                              find_focus, focus_tensor, resonant_shell_extent,
                              symmetry_plane, vector_grid)
from maglens.constants import GAUSS, NM
from maglens.fieldsolver import BiasField, FieldGrid, field_grid, magnet_field
from maglens.geometry import LensGeometry
from maglens.quadrature import QuadratureSpec


@pytest.fixture(scope="module")
def fast_spec():
    # order 24 self-converges at the evaluation heights used here
    return QuadratureSpec(radial_order=24, angular_order=24)


@pytest.fixture(scope="module")
def saddle_report(geom, fast_spec):
    return find_focus(geom, BiasField(-0.040), spec=fast_spec)


def enclosed(poly, pt=(0.0, 0.0)):
    """Even-odd point-in-polygon test for a closed polyline."""
    x, y = pt
    inside = False
    for (x0, y0), (x1, y1) in zip(poly[:-1], poly[1:]):
        if (y0 > y) != (y1 > y):
            if x < x0 + (y - y0) / (y1 - y0) * (x1 - x0):
                inside = not inside
    return inside


class TestFindFocus:
    def test_focus_sits_on_axis_near_24nm(self, focus):
        assert abs(focus.position[0]) < 1e-3 * NM
        assert abs(focus.position[1]) < 1e-3 * NM
        assert focus.position[2] == pytest.approx(23.80 * NM, abs=0.1 * NM)

    def test_focus_field_value_and_class(self, focus):
        assert focus.classification == "minimum"
        assert focus.b_min == pytest.approx(99.53 * GAUSS, abs=0.1 * GAUSS)
        assert not focus.degenerate

    def test_focus_is_stationary(self, geom, bias, spec, focus):
        b = (magnet_field(geom, focus.position[None, :], spec)[0]
             + np.array([0.0, 0.0, bias.b_bias_z]))
        g = focus.gradient_tensor.entries.T @ b / np.linalg.norm(b)
        assert np.linalg.norm(g) < GRAD_TOLERANCE

    def test_hessian_eigenvalues_all_positive(self, focus):
        assert np.all(focus.hessian_eigenvalues > 0.0)

    def test_weak_bias_gives_saddle_not_minimum(self, saddle_report):
        # the on-axis |B| dips near zero here, but those kinks are not
        # stationary points; the smooth extremum is a saddle
        assert saddle_report.classification == "saddle"
        assert saddle_report.b_min == pytest.approx(150.5 * GAUSS, abs=1.0 * GAUSS)

    def test_zero_bias_never_a_minimum(self, geom, fast_spec):
        rep = find_focus(geom, BiasField(0.0), spec=fast_spec)
        assert rep.classification != "minimum"

    def test_search_interval_invariance(self, geom, bias, fast_spec):
        a = find_focus(geom, bias, z_search=(5e-9, 60e-9), spec=fast_spec)
        b = find_focus(geom, bias, z_search=(10e-9, 40e-9), spec=fast_spec)
        assert a.position == pytest.approx(b.position, abs=1e-4 * NM)
        assert a.b_min == pytest.approx(b.b_min, abs=1e-4 * GAUSS)


class TestBiasSweep:
    def test_minimum_window_single_run(self, geom, fast_spec):
        sw = bias_sweep(geom, (-0.068, -0.060), 0.004, fast_spec)
        assert [b for b, _ in sw.entries] == pytest.approx([-0.068, -0.064, -0.060])
        assert all(rep.classification == "minimum" for _, rep in sw.entries)
        assert sw.runs == [("minimum", -0.068, pytest.approx(-0.060))]

    def test_b_min_varies_continuously(self, geom, fast_spec):
        sw = bias_sweep(geom, (-0.068, -0.060), 0.004, fast_spec)
        mins = [rep.b_min for _, rep in sw.entries]
        for lo, hi in zip(mins[:-1], mins[1:]):
            assert abs(hi - lo) < 1.5 * 0.004

    def test_class_transition_splits_runs(self, geom, fast_spec):
        sw = bias_sweep(geom, (-0.058, -0.050), 0.004, fast_spec)
        classes = [rep.classification for _, rep in sw.entries]
        assert classes == ["minimum", "saddle", "saddle"]
        assert [r[0] for r in sw.runs] == ["minimum", "saddle"]

    def test_nonpositive_step_rejected(self, geom, fast_spec):
        with pytest.raises(ValueError, match="step"):
            bias_sweep(geom, (-0.07, -0.06), 0.0, fast_spec)


class TestFocusTensor:
    def test_eigenvalues_paired_with_null_middle(self, focus_tensor_result):
        vals = focus_tensor_result.eigenvalues
        assert vals[0] == pytest.approx(2.44 * GAUSS / 1e-10, rel=0.02)
        assert vals[2] == pytest.approx(-vals[0], rel=1e-3)
        assert abs(vals[1]) < 1e-3 * vals[0]

    def test_null_eigenvector_is_vertical(self, focus_tensor_result):
        v = focus_tensor_result.eigenvectors[:, 1]
        assert abs(v[2]) > 0.999

    def test_diagonal_in_rotated_frame(self, focus_tensor_result):
        assert focus_tensor_result.diagonal_frame == "rotated-45"
        m = focus_tensor_result.rotated.entries
        off = np.max(np.abs(m - np.diag(np.diag(m))))
        assert off < 1e-3 * np.max(np.abs(m))

    def test_lab_tensor_is_traceless(self, focus_tensor_result):
        lab = focus_tensor_result.lab
        assert abs(lab.trace) < 1e-6 * np.max(np.abs(lab.entries))


class TestContours:
    def _synthetic_grid(self, f, half=5e-9, n=81):
        plane = symmetry_plane("p45", (0.0, 0.0, 30e-9), half)
        us = np.linspace(-half, half, n)
        vs = np.linspace(-half, half, n)
        U, V = np.meshgrid(us, vs)
        mag = f(U, V)
        zeros = np.zeros(mag.shape + (3,))
        return FieldGrid(plane=plane, us=us, vs=vs, positions=zeros,
                         b=zeros, magnitude=mag)

    def test_constant_field_has_no_contours(self):
        grid = self._synthetic_grid(lambda u, v: np.full_like(u, 5e-3))
        cs = extract_contours(grid, [4e-3, 6e-3])
        assert cs.polylines[4e-3] == []
        assert cs.polylines[6e-3] == []

    def test_paraboloid_gives_circle_of_known_radius(self):
        a, k = 5e-3, 1e-3 / (1e-9) ** 2
        grid = self._synthetic_grid(lambda u, v: a + k * (u**2 + v**2))
        level = a + 4e-3
        cs = extract_contours(grid, [level])
        polys = cs.polylines[level]
        assert len(polys) == 1
        p = polys[0]
        assert np.allclose(p[0], p[-1])
        r = np.hypot(p[:, 0], p[:, 1])
        cell = grid.us[1] - grid.us[0]
        r0 = math.sqrt((level - a) / k)
        assert np.max(np.abs(r - r0)) < cell * math.sqrt(2.0) / 2.0

    def test_level_outside_range_is_empty(self):
        a, k = 5e-3, 1e-3 / (1e-9) ** 2
        grid = self._synthetic_grid(lambda u, v: a + k * (u**2 + v**2))
        cs = extract_contours(grid, [1e-3])
        assert cs.polylines[1e-3] == []

    def test_default_levels_cover_range(self):
        levels = default_levels(lo=80 * GAUSS, hi=130 * GAUSS)
        assert 100.5 * GAUSS in levels
        assert all(80 * GAUSS <= l <= 130 * GAUSS for l in levels)
        steps = np.diff(levels)
        assert steps == pytest.approx(6 * GAUSS)

    def test_default_levels_need_a_range(self):
        with pytest.raises(ValueError):
            default_levels()

    def test_vertical_plane_contours_not_congruent(self, geom, bias, focus, fast_spec):
        # the innermost iso-surface is anisotropic: its section in the two
        # vertical symmetry planes differs in width by well over 30%
        level = 100.5 * GAUSS
        widths = {}
        for name in ("p45", "m45"):
            plane = symmetry_plane(name, focus.position, 3e-9)
            grid = field_grid(geom, bias, plane, 61, 61, fast_spec)
            polys = extract_contours(grid, [level]).polylines[level]
            central = [p for p in polys
                       if np.allclose(p[0], p[-1]) and enclosed(p)]
            assert len(central) == 1
            widths[name] = np.ptp(central[0][:, 0])
        ratio = widths["m45"] / widths["p45"]
        assert ratio > 1.3


@pytest.fixture(scope="module")
def extents(geom, bias, focus, focus_tensor_result, fast_spec):
    axes = [focus_tensor_result.eigenvectors[:, k] for k in range(3)]
    out = {}
    for lw in (0.25 * GAUSS, 0.5 * GAUSS, 1.0 * GAUSS):
        out[lw] = resonant_shell_extent(
            geom, bias, focus.b_min + 0.5 * lw, lw, fast_spec,
            focus=focus, axes=axes)
    return out


class TestResonantShell:
    def test_extents_at_one_gauss_linewidth(self, extents):
        got = np.sort(extents[1.0 * GAUSS])
        assert got == pytest.approx([0.99 * NM, 1.63 * NM, 3.60 * NM],
                                    abs=0.05 * NM)

    def test_extents_shrink_with_linewidth(self, extents):
        assert np.all(extents[0.25 * GAUSS] < extents[0.5 * GAUSS])
        assert np.all(extents[0.5 * GAUSS] < extents[1.0 * GAUSS])

    def test_halving_linewidth_ratio(self, extents):
        ratio = extents[1.0 * GAUSS] / extents[0.5 * GAUSS]
        assert np.all(ratio > 1.3)
        assert np.all(ratio < 2.1)

    def test_requires_a_minimum(self, geom, fast_spec, saddle_report):
        with pytest.raises(AnalysisError):
            resonant_shell_extent(geom, BiasField(-0.040), 150e-4, 1e-4,
                                  fast_spec, focus=saddle_report)

    def test_rejects_center_below_minimum(self, geom, bias, focus, fast_spec):
        with pytest.raises(ValueError):
            resonant_shell_extent(geom, bias, focus.b_min - 1e-4, 1e-4,
                                  fast_spec, focus=focus)


class TestPlanesAndVectors:
    def test_symmetry_plane_axes(self):
        c = 1.0 / math.sqrt(2.0)
        p = symmetry_plane("p45", (0, 0, 0), 1e-9)
        assert p.u_axis == pytest.approx((c, c, 0.0))
        assert p.v_axis == pytest.approx((0.0, 0.0, 1.0))
        m = symmetry_plane("m45", (0, 0, 0), 1e-9)
        assert m.u_axis == pytest.approx((c, -c, 0.0))
        h = symmetry_plane("horizontal", (0, 0, 0), 1e-9)
        assert h.v_axis == pytest.approx((-c, c, 0.0))

    def test_unknown_plane_rejected(self):
        with pytest.raises(ValueError, match="plane"):
            symmetry_plane("diagonal", (0, 0, 0), 1e-9)

    def test_field_winds_once_in_horizontal_plane(self, geom, bias, focus, fast_spec):
        plane = symmetry_plane("horizontal", focus.position, 1.5e-9)
        angles = np.linspace(0.0, 2.0 * np.pi, 65)
        u = np.asarray(plane.u_axis)
        v = np.asarray(plane.v_axis)
        pts = (focus.position[None, :]
               + 1e-9 * (np.cos(angles)[:, None] * u[None, :]
                         + np.sin(angles)[:, None] * v[None, :]))
        b = magnet_field(geom, pts, fast_spec) + np.array([0, 0, bias.b_bias_z])
        phase = np.unwrap(np.arctan2(b @ v, b @ u))
        winding = (phase[-1] - phase[0]) / (2.0 * np.pi)
        assert abs(abs(winding) - 1.0) < 0.05

    def test_vector_grid_centered_on_focus(self, geom, bias, focus, fast_spec):
        grid = vector_grid(geom, bias, "p45", 4e-9, 5, fast_spec, focus=focus)
        assert grid.b.shape == (5, 5, 3)
        assert grid.positions[2, 2] == pytest.approx(focus.position, abs=1e-15)
        bu, bv = grid.in_plane_components()
        assert bu.shape == (5, 5)
        assert np.all(np.isfinite(grid.magnitude))
