"""Cut-disk magnet geometry.

The magnet is a thin disk of outer radius R_out with two diagonally opposed
quarter-disk cuts of radius R_in removed, uniformly magnetized along +z.
The body occupies z in [-thickness, 0]; "height above the surface" is
measured from the top face at z = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi
QUARTER = 0.5 * math.pi

class GeometryError(ValueError):
    """A geometry parameter violates an invariant."""


def _wrap_angle(theta):
    """Map angles to [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


@dataclass(frozen=True)
class LensGeometry:
    """Cut-disk magnet: radii and thickness in meters, mu0*M in Tesla."""

    outer_radius: float = 60e-9
    inner_radius: float = 40e-9
    thickness: float = 10e-9
    mu0_M: float = 2.0
    cut_quadrants: tuple = ((0.0, QUARTER), (math.pi, math.pi + QUARTER))

    def __post_init__(self):
        if not (0.0 < self.inner_radius < self.outer_radius):
            raise GeometryError(
                "invariant violated: 0 < inner_radius < outer_radius "
                f"(got inner={self.inner_radius}, outer={self.outer_radius})"
            )
        if self.thickness <= 0.0:
            raise GeometryError(f"invariant violated: thickness > 0 (got {self.thickness})")
        if self.mu0_M <= 0.0:
            raise GeometryError(f"invariant violated: mu0_M > 0 (got {self.mu0_M})")
        cuts = self.cut_quadrants
        if len(cuts) != 2:
            raise GeometryError("invariant violated: exactly two cut quadrants required")
        for lo, hi in cuts:
            if abs((hi - lo) - QUARTER) > 1e-9:
                raise GeometryError(
                    f"invariant violated: cut interval [{lo}, {hi}] must span exactly pi/2"
                )
        offset = _wrap_angle(cuts[1][0] - cuts[0][0])
        if abs(offset - math.pi) > 1e-9:
            raise GeometryError(
                "invariant violated: cut quadrants must be diagonally opposed (offset pi)"
            )

    @property
    def kept_quadrants(self):
        """The two angular intervals where the disk is kept down to r = 0."""
        (a0, a1), (b0, b1) = self.cut_quadrants
        return ((_wrap_angle(a1), _wrap_angle(a1) + QUARTER),
                (_wrap_angle(b1), _wrap_angle(b1) + QUARTER))

    @property
    def footprint_area(self):
        """Planar area of the magnet: full disk minus two quarter cuts."""
        return math.pi * self.outer_radius**2 - 2.0 * (math.pi / 4.0) * self.inner_radius**2


@dataclass(frozen=True)
class PolarPatch:
    """Annular sector of a charged face, used as a quadrature subdomain."""

    r_min: float
    r_max: float
    theta_min: float
    theta_max: float
    z_plane: float
    charge_sign: int

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise GeometryError(f"patch requires r_min < r_max (got {self.r_min}, {self.r_max})")
        if not self.theta_min < self.theta_max:
            raise GeometryError("patch requires theta_min < theta_max")
        if self.charge_sign not in (+1, -1):
            raise GeometryError("charge_sign must be +1 or -1")

    @property
    def area(self):
        return 0.5 * (self.r_max**2 - self.r_min**2) * (self.theta_max - self.theta_min)

    def contains(self, r, theta):
        """Vectorized membership of polar points (angle wrap handled)."""
        r = np.asarray(r)
        t = _wrap_angle(np.asarray(theta) - self.theta_min)
        span = self.theta_max - self.theta_min
        return (r >= self.r_min) & (r < self.r_max) & (t < span)


def decompose(geom: LensGeometry):
    """Tile both charged faces of the magnet with polar patches.

    Per face: each kept quadrant splits into an inner sector [0, R_in] and an
    annular sector [R_in, R_out]; each cut quadrant contributes only the
    annular sector. Top face carries charge_sign +1, bottom -1.
    """
    patches = []
    for z_plane, sign in ((0.0, +1), (-geom.thickness, -1)):
        for lo, hi in geom.kept_quadrants:
            patches.append(PolarPatch(0.0, geom.inner_radius, lo, hi, z_plane, sign))
            patches.append(PolarPatch(geom.inner_radius, geom.outer_radius, lo, hi, z_plane, sign))
        for lo, hi in geom.cut_quadrants:
            lo = _wrap_angle(lo)
            patches.append(PolarPatch(geom.inner_radius, geom.outer_radius, lo, lo + QUARTER,
                                      z_plane, sign))
    return patches


def scale(geom: LensGeometry, s: float) -> LensGeometry:
    """Uniformly scale all lengths by s; magnetization is unchanged."""
    if s <= 0.0:
        raise GeometryError(f"scale factor must be > 0 (got {s})")
    return replace(geom,
                   outer_radius=s * geom.outer_radius,
                   inner_radius=s * geom.inner_radius,
                   thickness=s * geom.thickness)


def contains(geom: LensGeometry, x, y):
    """True where the planar point(s) lie in the magnet footprint."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    theta = _wrap_angle(np.arctan2(y, x))
    in_cut = np.zeros_like(r, dtype=bool)
    for lo, hi in geom.cut_quadrants:
        lo = _wrap_angle(lo)
        t = _wrap_angle(theta - lo)
        in_cut |= t < QUARTER
    inside = (r <= geom.outer_radius) & ~(in_cut & (r < geom.inner_radius))
    return inside if inside.shape else bool(inside)
