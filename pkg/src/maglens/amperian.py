"""Biot-Savart oracle from the equivalent surface currents.

A uniformly magnetized body is equivalent to sheet currents K = M z-hat x n
flowing on its lateral walls. For the cut disk, those walls are one outer
full loop, two inner quarter arcs circulating the opposite way, and four
radial bars along the cut edges. Integrating Biot-Savart over the sheets
gives an independent route to the same external field as the charge model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import MU0
from .fieldsolver import FieldSample
from .geometry import LensGeometry, _wrap_angle
from .quadrature import QuadratureError, QuadratureSpec, nodes_weights

QUARTER = 0.5 * math.pi

_CHUNK = 32


@dataclass(frozen=True)
class CurrentSheet:
    """One lateral wall carrying uniform sheet current, z in [z_min, z_max].

    kind "arc": the curve is r=radius, theta in [theta_start, theta_end];
    positive current flows with increasing theta (counter-clockwise).
    kind "segment": a radial line at angle `angle`, r in [r_start, r_end];
    positive current flows outward (increasing r).
    The signed current density (A/m) encodes the direction.
    """

    kind: str
    current_density: float
    z_min: float
    z_max: float
    radius: float = 0.0
    theta_start: float = 0.0
    theta_end: float = 0.0
    angle: float = 0.0
    r_start: float = 0.0
    r_end: float = 0.0

    def __post_init__(self):
        if self.kind not in ("arc", "segment"):
            raise ValueError(f"unknown sheet kind {self.kind!r}")
        if self.z_min >= self.z_max:
            raise ValueError("sheet requires z_min < z_max")

    @property
    def total_current(self):
        """Signed current carried by the sheet, Amperes."""
        return self.current_density * (self.z_max - self.z_min)


def sheets_for(geom: LensGeometry):
    """The seven lateral walls of the cut disk with their signed currents.

    M = mu0_M / mu0 is the sheet current density magnitude on every wall.
    """
    m = geom.mu0_M / MU0
    z0, z1 = -geom.thickness, 0.0
    sheets = [CurrentSheet(kind="arc", current_density=+m, z_min=z0, z_max=z1,
                           radius=geom.outer_radius, theta_start=0.0,
                           theta_end=2.0 * math.pi)]
    for lo, _hi in geom.cut_quadrants:
        lo = _wrap_angle(lo)
        # inner arc bounding the cut: material sits outside, current clockwise
        sheets.append(CurrentSheet(kind="arc", current_density=-m, z_min=z0, z_max=z1,
                                   radius=geom.inner_radius, theta_start=lo,
                                   theta_end=lo + QUARTER))
        # radial bars on the cut edges: inward on the lower-angle edge,
        # outward on the upper-angle edge
        sheets.append(CurrentSheet(kind="segment", current_density=-m, z_min=z0, z_max=z1,
                                   angle=lo, r_start=0.0, r_end=geom.inner_radius))
        sheets.append(CurrentSheet(kind="segment", current_density=+m, z_min=z0, z_max=z1,
                                   angle=lo + QUARTER, r_start=0.0, r_end=geom.inner_radius))
    return sheets


@lru_cache(maxsize=None)
def _sheet_nodes(sheet: CurrentSheet, spec: QuadratureSpec, level: int):
    """Node positions, tangent*current vectors, and weights for one sheet."""
    f = 2 ** level
    n_z = f * max(8, spec.radial_order // 4)
    xz, wz = nodes_weights(n_z)
    z = 0.5 * (sheet.z_max + sheet.z_min) + 0.5 * (sheet.z_max - sheet.z_min) * xz
    jz = 0.5 * (sheet.z_max - sheet.z_min)
    if sheet.kind == "arc":
        span = sheet.theta_end - sheet.theta_start
        n_p = f * max(spec.angular_order, int(math.ceil(spec.angular_order * span / QUARTER)))
        xp, wp = nodes_weights(n_p)
        t = 0.5 * (sheet.theta_end + sheet.theta_start) + 0.5 * span * xp
        jp = 0.5 * span * sheet.radius  # arclength Jacobian
        px = sheet.radius * np.cos(t)
        py = sheet.radius * np.sin(t)
        tx, ty = -np.sin(t), np.cos(t)
    else:
        n_p = f * spec.radial_order
        xp, wp = nodes_weights(n_p)
        t = 0.5 * (sheet.r_end + sheet.r_start) + 0.5 * (sheet.r_end - sheet.r_start) * xp
        jp = 0.5 * (sheet.r_end - sheet.r_start)
        ex, ey = math.cos(sheet.angle), math.sin(sheet.angle)
        px, py = t * ex, t * ey
        tx = np.full_like(t, ex)
        ty = np.full_like(t, ey)
    pos = np.column_stack([np.repeat(px, n_z), np.repeat(py, n_z), np.tile(z, n_p)])
    tan = np.column_stack([np.repeat(tx, n_z), np.repeat(ty, n_z), np.zeros(n_p * n_z)])
    w = np.repeat(wp, n_z) * np.tile(wz, n_p) * (jp * jz) * sheet.current_density
    pos.flags.writeable = False
    tan.flags.writeable = False
    w.flags.writeable = False
    return pos, tan, w


@lru_cache(maxsize=None)
def _assembled_sheets(sheets: tuple, spec: QuadratureSpec, level: int):
    parts = [_sheet_nodes(s, spec, level) for s in sheets]
    pos = np.vstack([p[0] for p in parts])
    tan = np.vstack([p[1] for p in parts])
    w = np.concatenate([p[2] for p in parts])
    pos.flags.writeable = False
    tan.flags.writeable = False
    w.flags.writeable = False
    return pos, tan, w


def _biot_savart_sum(points, pos, tan, w):
    """Sum_k w_k t_k x (p - r_k)/|p - r_k|^3 for each point; (P, 3)."""
    out = np.empty((points.shape[0], 3))
    for i0 in range(0, points.shape[0], _CHUNK):
        p = points[i0:i0 + _CHUNK]
        d = p[:, None, :] - pos[None, :, :]
        inv_r3 = (d[:, :, 0] ** 2 + d[:, :, 1] ** 2 + d[:, :, 2] ** 2) ** -1.5
        wk = w[None, :] * inv_r3
        cx = tan[None, :, 1] * d[:, :, 2] - tan[None, :, 2] * d[:, :, 1]
        cy = tan[None, :, 2] * d[:, :, 0] - tan[None, :, 0] * d[:, :, 2]
        cz = tan[None, :, 0] * d[:, :, 1] - tan[None, :, 1] * d[:, :, 0]
        out[i0:i0 + _CHUNK, 0] = np.sum(wk * cx, axis=1)
        out[i0:i0 + _CHUNK, 1] = np.sum(wk * cy, axis=1)
        out[i0:i0 + _CHUNK, 2] = np.sum(wk * cz, axis=1)
    return out


def _min_sheet_distance(sheets, points):
    d = np.full(points.shape[0], np.inf)
    for s in sheets:
        pos, _, _ = _sheet_nodes(s, QuadratureSpec(radial_order=16, angular_order=16), 0)
        dd = np.linalg.norm(points[:, None, :] - pos[None, :, :], axis=-1).min(axis=1)
        d = np.minimum(d, dd)
    return d


def biot_savart_batch(sheets, points, spec: QuadratureSpec):
    """Biot-Savart field (no bias) of the sheet set at many points, (P, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    sheets = tuple(sheets)
    if np.any(_min_sheet_distance(sheets, points) < 1e-9):
        raise ValueError("evaluation point closer than 1 nm to a current sheet")
    pref = MU0 / (4.0 * math.pi)
    coarse = _biot_savart_sum(points, *_assembled_sheets(sheets, spec, 0))
    est = np.inf
    for level in range(spec.refinement_limit + 1):
        fine = _biot_savart_sum(points, *_assembled_sheets(sheets, spec, level + 1))
        diff = np.abs(fine - coarse).max(axis=1)
        ref = np.abs(fine).max(axis=1)
        est = float(np.max(diff / np.maximum(ref, 1e3)))
        if est <= spec.rel_tolerance:
            return pref * fine
        coarse = fine
    raise QuadratureError(
        f"Biot-Savart quadrature did not converge: estimate {est:.3e}",
        value=pref * coarse, estimate=est)


def biot_savart_field(sheets, r, spec: QuadratureSpec) -> FieldSample:
    """Field of the sheet currents at a single point (bias not included)."""
    r = np.asarray(r, dtype=float)
    b = biot_savart_batch(sheets, r[None, :], spec)[0]
    return FieldSample(position=r, b=b)
