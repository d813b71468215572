"""Magnetic field of the lens via the surface-charge model.

The uniformly magnetized body is replaced by pseudo-surface-charge
sigma = +/- M on its top and bottom faces. The field is the analytically
differentiated Coulomb-like kernel integrated over the faces, plus the
uniform bias field along z. The Jacobian uses the kernel's second
derivatives; nothing is ever obtained by numerically differentiating the
potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import MU0
from .geometry import LensGeometry, PolarPatch, _wrap_angle, contains, decompose
from .quadrature import QuadratureError, QuadratureSpec, patch_nodes

# Evaluation points closer than this to a charged face are rejected.
MIN_EVAL_DISTANCE = 1e-9

_CHUNK = 32


class EvaluationTooCloseError(ValueError):
    """Evaluation point is within MIN_EVAL_DISTANCE of a charged face."""


@dataclass(frozen=True)
class BiasField:
    """Uniform external field along z, Tesla. Default -650 G."""

    b_bias_z: float = -0.065

    def __post_init__(self):
        if not math.isfinite(self.b_bias_z):
            raise ValueError("bias field must be finite")


@dataclass
class FieldSample:
    position: np.ndarray
    b: np.ndarray
    magnitude: float = field(init=False)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.magnitude = float(np.linalg.norm(self.b))


@dataclass
class GradientTensor:
    """3x3 Jacobian entries[i, j] = dB_i/dx_j, Tesla/meter."""

    entries: np.ndarray
    frame: str = "lab"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)

    @property
    def trace(self):
        return float(np.trace(self.entries))

    @property
    def asymmetry(self):
        return float(np.max(np.abs(self.entries - self.entries.T)))

    def eigenvalues(self):
        """Eigenvalues of the symmetrized tensor, sorted descending."""
        sym = 0.5 * (self.entries + self.entries.T)
        vals = np.linalg.eigvalsh(sym)
        return vals[::-1]


@dataclass(frozen=True)
class PlaneSpec:
    """Plane through `origin` spanned by orthonormal axes u and v."""

    origin: tuple
    u_axis: tuple
    v_axis: tuple
    u_range: tuple
    v_range: tuple

    def __post_init__(self):
        u = np.asarray(self.u_axis, dtype=float)
        v = np.asarray(self.v_axis, dtype=float)
        if abs(np.linalg.norm(u) - 1) > 1e-12 or abs(np.linalg.norm(v) - 1) > 1e-12:
            raise ValueError("plane axes must be unit vectors")
        if abs(np.dot(u, v)) > 1e-12:
            raise ValueError("plane axes must be orthogonal")

    def points(self, n_u, n_v):
        """Row-major (n_v, n_u, 3) grid of 3-d points, plus u and v ticks."""
        us = np.linspace(self.u_range[0], self.u_range[1], n_u)
        vs = np.linspace(self.v_range[0], self.v_range[1], n_v)
        o = np.asarray(self.origin, dtype=float)
        u = np.asarray(self.u_axis, dtype=float)
        v = np.asarray(self.v_axis, dtype=float)
        pts = (o[None, None, :]
               + vs[:, None, None] * v[None, None, :]
               + us[None, :, None] * u[None, None, :])
        return us, vs, pts


@dataclass
class FieldGrid:
    plane: PlaneSpec
    us: np.ndarray
    vs: np.ndarray
    positions: np.ndarray  # (n_v, n_u, 3)
    b: np.ndarray          # (n_v, n_u, 3)
    magnitude: np.ndarray  # (n_v, n_u)

    def in_plane_components(self):
        """Project b onto the plane axes: returns (Bu, Bv) arrays."""
        u = np.asarray(self.plane.u_axis, dtype=float)
        v = np.asarray(self.plane.v_axis, dtype=float)
        return self.b @ u, self.b @ v


# ---------------------------------------------------------------------------
# distance guard

def _point_segment_dist(px, py, ax, ay, bx, by):
    abx, aby = bx - ax, by - ay
    t = np.clip(((px - ax) * abx + (py - ay) * aby) / (abx * abx + aby * aby), 0.0, 1.0)
    return np.hypot(px - (ax + t * abx), py - (ay + t * aby))


def planar_distance_to_footprint(geom: LensGeometry, x, y):
    """Distance in the plane from (x, y) to the magnet footprint (0 inside)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    r = np.hypot(x, y)
    d = np.where(contains(geom, x, y), 0.0, np.inf)
    # outer circle
    d = np.minimum(d, np.abs(r - geom.outer_radius))
    theta = _wrap_angle(np.arctan2(y, x))
    for lo, hi in geom.cut_quadrants:
        lo = _wrap_angle(lo)
        hi = lo + 0.5 * math.pi
        # inner arc
        in_span = _wrap_angle(theta - lo) < 0.5 * math.pi
        arc = np.where(in_span, np.abs(r - geom.inner_radius), np.inf)
        d = np.minimum(d, arc)
        # radial cut edges
        for ang in (lo, hi):
            ex, ey = math.cos(ang), math.sin(ang)
            d = np.minimum(d, _point_segment_dist(
                x, y, 0.0, 0.0, geom.inner_radius * ex, geom.inner_radius * ey))
    return d


def face_distance(geom: LensGeometry, points):
    """Minimum distance from each point to the two charged face regions."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dp = planar_distance_to_footprint(geom, pts[:, 0], pts[:, 1])
    d_top = np.hypot(pts[:, 2], dp)
    d_bot = np.hypot(pts[:, 2] + geom.thickness, dp)
    return np.minimum(d_top, d_bot)


def _check_distance(geom, points):
    d = face_distance(geom, points)
    if np.any(d < MIN_EVAL_DISTANCE):
        worst = float(np.min(d))
        raise EvaluationTooCloseError(
            f"evaluation point {worst * 1e9:.3f} nm from a charged face; "
            f"minimum allowed is {MIN_EVAL_DISTANCE * 1e9:.1f} nm")


# ---------------------------------------------------------------------------
# assembled quadrature nodes

@lru_cache(maxsize=None)
def _assembled_nodes(patches: tuple, spec: QuadratureSpec, level: int):
    """Concatenated node positions and signed weights for a patch set."""
    xs, ys, zs, ws = [], [], [], []
    f = 2 ** level
    for p in patches:
        x, y, w = patch_nodes(p, f * spec.radial_order, f * spec.angular_order)
        xs.append(x)
        ys.append(y)
        zs.append(np.full_like(x, p.z_plane))
        ws.append(p.charge_sign * w)
    nodes = np.column_stack([np.concatenate(xs), np.concatenate(ys), np.concatenate(zs)])
    w = np.concatenate(ws)
    nodes.flags.writeable = False
    w.flags.writeable = False
    return nodes, w


def _charge_sum(points, nodes, w):
    """Sum_k w_k (p - n_k)/|p - n_k|^3 for each point; shape (P, 3)."""
    out = np.empty((points.shape[0], 3))
    for i0 in range(0, points.shape[0], _CHUNK):
        p = points[i0:i0 + _CHUNK]
        d = p[:, None, :] - nodes[None, :, :]
        inv_r3 = (d[:, :, 0] ** 2 + d[:, :, 1] ** 2 + d[:, :, 2] ** 2) ** -1.5
        wk = w[None, :] * inv_r3
        for c in range(3):
            out[i0:i0 + _CHUNK, c] = np.sum(wk * d[:, :, c], axis=1)
    return out


def _jacobian_sum(points, nodes, w):
    """Sum_k w_k [I/|d|^3 - 3 d d^T/|d|^5] for each point; shape (P, 3, 3)."""
    out = np.empty((points.shape[0], 3, 3))
    for i0 in range(0, points.shape[0], _CHUNK):
        p = points[i0:i0 + _CHUNK]
        d = p[:, None, :] - nodes[None, :, :]
        r2 = d[:, :, 0] ** 2 + d[:, :, 1] ** 2 + d[:, :, 2] ** 2
        inv_r3 = r2 ** -1.5
        inv_r5 = inv_r3 / r2
        diag = np.sum(w[None, :] * inv_r3, axis=1)
        for i in range(3):
            for j in range(i, 3):
                s = -3.0 * np.sum(w[None, :] * inv_r5 * d[:, :, i] * d[:, :, j], axis=1)
                if i == j:
                    s = s + diag
                out[i0:i0 + _CHUNK, i, j] = s
                out[i0:i0 + _CHUNK, j, i] = s
    return out


def _converged(kernel, points, patches, spec, scale_ref):
    """Run `kernel` at successive order levels until self-converged."""
    coarse = kernel(points, *_assembled_nodes(patches, spec, 0))
    est = np.inf
    for level in range(spec.refinement_limit + 1):
        fine = kernel(points, *_assembled_nodes(patches, spec, level + 1))
        diff = np.abs(fine - coarse).reshape(points.shape[0], -1).max(axis=1)
        ref = np.abs(fine).reshape(points.shape[0], -1).max(axis=1)
        est = float(np.max(diff / np.maximum(ref, scale_ref)))
        if est <= spec.rel_tolerance:
            return fine
        coarse = fine
    raise QuadratureError(
        f"field quadrature did not converge: estimate {est:.3e} > "
        f"tolerance {spec.rel_tolerance:.3e}", value=coarse, estimate=est)


def field_of_patches(patches, mu0_M, points, spec: QuadratureSpec):
    """Magnet-only field (P, 3) of an explicit charged-patch set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pref = mu0_M / (4.0 * math.pi)
    # floor for the relative error puts tiny field components on an
    # absolute scale of mu0_M per meter^0 (fields here are O(mu0_M/10))
    return pref * _converged(_charge_sum, points, tuple(patches), spec, 1e-3)


def magnet_field(geom: LensGeometry, points, spec: QuadratureSpec):
    """Magnet-only field at many points, (P, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_distance(geom, points)
    return field_of_patches(decompose(geom), geom.mu0_M, points, spec)


def field_at(geom: LensGeometry, bias: BiasField, r, spec: QuadratureSpec) -> FieldSample:
    """Total field B(r): charge-model magnet field plus the bias field."""
    r = np.asarray(r, dtype=float)
    b = magnet_field(geom, r[None, :], spec)[0]
    b = b + np.array([0.0, 0.0, bias.b_bias_z])
    return FieldSample(position=r, b=b)


def jacobian_at(geom: LensGeometry, bias: BiasField, r, spec: QuadratureSpec) -> GradientTensor:
    """Jacobian dB_i/dx_j at r; the uniform bias contributes nothing."""
    r = np.asarray(r, dtype=float)
    points = r[None, :]
    _check_distance(geom, points)
    pref = geom.mu0_M / (4.0 * math.pi)
    j = pref * _converged(_jacobian_sum, points, tuple(decompose(geom)), spec, 1e5)
    return GradientTensor(entries=j[0], frame="lab")


def jacobian_batch(geom: LensGeometry, bias: BiasField, points, spec: QuadratureSpec):
    """Jacobians at many points, (P, 3, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_distance(geom, points)
    pref = geom.mu0_M / (4.0 * math.pi)
    return pref * _converged(_jacobian_sum, points, tuple(decompose(geom)), spec, 1e5)


def field_grid(geom: LensGeometry, bias: BiasField, plane: PlaneSpec,
               n_u: int, n_v: int, spec: QuadratureSpec) -> FieldGrid:
    """Row-major grid of field samples over a plane window."""
    us, vs, pts = plane.points(n_u, n_v)
    flat = pts.reshape(-1, 3)
    b = magnet_field(geom, flat, spec)
    b = b + np.array([0.0, 0.0, bias.b_bias_z])[None, :]
    b = b.reshape(n_v, n_u, 3)
    return FieldGrid(plane=plane, us=us, vs=vs, positions=pts, b=b,
                     magnitude=np.linalg.norm(b, axis=-1))
