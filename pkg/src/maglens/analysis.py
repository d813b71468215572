"""Locating and characterizing the |B| minimum above the lens.

The focus is the smooth stationary point of |B| on the symmetry axis.
Stationarity is the operative filter: with weak bias the total axial field
crosses zero above the structure and |B| has non-smooth near-zero dips
there; those kinks are not stationary points of the differentiable field
magnitude and are rejected by the gradient test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import GAUSS, NM
from .fieldsolver import (BiasField, FieldGrid, FieldSample, GradientTensor, PlaneSpec,
                          field_at, field_grid, jacobian_at, jacobian_batch, magnet_field)
from .geometry import LensGeometry
from .quadrature import QuadratureSpec

# Numerical definitions of "zero" for classification and stationarity.
EIGEN_ZERO_FRAC = 1e-4                 # x largest |eigenvalue|
GRAD_TOLERANCE = 1e-3 * GAUSS / NM     # 1e-3 G/nm, in T/m
HESSIAN_STEP = 0.05 * NM
SCAN_STEP = 0.25 * NM


class AnalysisError(RuntimeError):
    """An analysis operation could not produce a result."""


@dataclass
class FocusReport:
    position: np.ndarray
    b_min: float
    classification: str          # "minimum" | "saddle" | "none-found"
    hessian_eigenvalues: np.ndarray
    gradient_tensor: GradientTensor
    bias_used: float
    degenerate: bool = False


@dataclass
class SweepResult:
    entries: list                # [(bias_tesla, FocusReport)]
    runs: list                   # [(classification, bias_start, bias_end)]


@dataclass
class ContourSet:
    plane: PlaneSpec
    levels: list                 # Tesla
    polylines: dict              # level -> [ (k, 2) arrays in plane coords ]


@dataclass
class FocusTensorResult:
    lab: GradientTensor
    rotated: GradientTensor      # rotated +45 degrees about z
    eigenvalues: np.ndarray      # sorted descending, T/m
    eigenvectors: np.ndarray     # columns match eigenvalues, lab frame
    diagonal_frame: str          # "lab" | "rotated-45" | "other"


def _grad_mag(geom, bias, points, spec):
    """Gradient of |B| at many points: (J^T b)/|b|; returns (P, 3), (P,), (P, 3, 3)."""
    points = np.atleast_2d(points)
    b = magnet_field(geom, points, spec) + np.array([0.0, 0.0, bias.b_bias_z])
    mag = np.linalg.norm(b, axis=1)
    jac = jacobian_batch(geom, bias, points, spec)
    g = np.einsum("pji,pj->pi", jac, b) / mag[:, None]
    return g, mag, jac


def _hessian_mag(geom, bias, r, spec, h=HESSIAN_STEP):
    """Central-difference Hessian of |B| from the analytic gradient."""
    offsets = np.vstack([r + h * np.eye(3), r - h * np.eye(3)])
    g, _, _ = _grad_mag(geom, bias, offsets, spec)
    hess = (g[:3] - g[3:]) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def _classify(eigs):
    thr = EIGEN_ZERO_FRAC * np.max(np.abs(eigs))
    degenerate = bool(np.any(np.abs(eigs) <= thr))
    if np.all(eigs > thr):
        return "minimum", degenerate
    return "saddle", degenerate


def find_focus(geom: LensGeometry, bias: BiasField, z_search=(5e-9, 60e-9),
               spec: QuadratureSpec = QuadratureSpec()) -> FocusReport:
    """Locate and classify the stationary point of |B| above the lens.

    Stage 1 scans |B| on the symmetry axis and polishes each interior
    extremum to 1e-4 nm; candidates whose full 3-d gradient is not small
    (non-smooth dips) are discarded. Stage 2 runs Newton iterations on |B|
    in 3-d. Stage 3 classifies from the finite-difference Hessian of |B|.
    """
    z_lo, z_hi = z_search
    n = max(8, int(round((z_hi - z_lo) / SCAN_STEP)) + 1)
    zs = np.linspace(z_lo, z_hi, n)
    pts = np.column_stack([np.zeros(n), np.zeros(n), zs])
    mags = np.linalg.norm(magnet_field(geom, pts, spec)
                          + np.array([0.0, 0.0, bias.b_bias_z]), axis=1)

    def axis_mag(z):
        s = field_at(geom, bias, np.array([0.0, 0.0, z]), spec)
        return s.magnitude

    candidates = []
    for i in range(1, n - 1):
        is_min = mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]
        is_max = mags[i] >= mags[i - 1] and mags[i] >= mags[i + 1]
        if not (is_min or is_max):
            continue
        sgn = 1.0 if is_min else -1.0
        res = minimize_scalar(lambda z: sgn * axis_mag(z),
                              bracket=None, bounds=(zs[i - 1], zs[i + 1]),
                              method="bounded", options={"xatol": 1e-4 * NM})
        z_star = float(res.x)
        g, _, _ = _grad_mag(geom, bias, np.array([[0.0, 0.0, z_star]]), spec)
        if np.max(np.abs(g[0])) < 100.0 * GRAD_TOLERANCE:
            candidates.append(z_star)

    reports = []
    for z_star in candidates:
        r = np.array([0.0, 0.0, z_star])
        for _ in range(30):
            g, mag, jac = _grad_mag(geom, bias, r[None, :], spec)
            if np.linalg.norm(g[0]) < GRAD_TOLERANCE:
                break
            hess = _hessian_mag(geom, bias, r, spec)
            step = np.linalg.solve(hess, -g[0])
            norm = np.linalg.norm(step)
            if norm > 0.5 * NM:
                step *= 0.5 * NM / norm
            r = r + step
        g, mag, jac = _grad_mag(geom, bias, r[None, :], spec)
        if np.linalg.norm(g[0]) >= GRAD_TOLERANCE:
            continue
        hess = _hessian_mag(geom, bias, r, spec)
        eigs = np.linalg.eigvalsh(hess)
        classification, degenerate = _classify(eigs)
        reports.append(FocusReport(
            position=r, b_min=float(mag[0]), classification=classification,
            hessian_eigenvalues=eigs, gradient_tensor=GradientTensor(jac[0]),
            bias_used=bias.b_bias_z, degenerate=degenerate))

    minima = [rep for rep in reports if rep.classification == "minimum"]
    if minima:
        return min(minima, key=lambda rep: rep.b_min)
    if reports:
        return reports[0]
    i = int(np.argmin(mags))
    return FocusReport(
        position=pts[i], b_min=float(mags[i]), classification="none-found",
        hessian_eigenvalues=np.full(3, np.nan),
        gradient_tensor=jacobian_at(geom, bias, pts[i], spec),
        bias_used=bias.b_bias_z, degenerate=False)


def bias_sweep(geom: LensGeometry, bias_range, step: float,
               spec: QuadratureSpec = QuadratureSpec(),
               z_search=(5e-9, 60e-9)) -> SweepResult:
    """find_focus at each bias in the inclusive range; groups runs by class."""
    if step <= 0.0:
        raise ValueError("sweep step must be > 0")
    lo, hi = min(bias_range), max(bias_range)
    n = int(round((hi - lo) / step)) + 1
    biases = lo + step * np.arange(n)
    entries = [(float(b), find_focus(geom, BiasField(float(b)), z_search, spec))
               for b in biases]
    runs = []
    for b, rep in entries:
        if runs and runs[-1][0] == rep.classification:
            runs[-1][2] = b
        else:
            runs.append([rep.classification, b, b])
    return SweepResult(entries=entries, runs=[tuple(r) for r in runs])


def focus_tensor(geom: LensGeometry, bias: BiasField, focus_position,
                 spec: QuadratureSpec = QuadratureSpec()) -> FocusTensorResult:
    """Field-gradient tensor at the focus in the lab and 45-degree frames."""
    lab = jacobian_at(geom, bias, np.asarray(focus_position, dtype=float), spec)
    c = math.cos(math.pi / 4.0)
    rot = np.array([[c, -c, 0.0], [c, c, 0.0], [0.0, 0.0, 1.0]])
    rotated = GradientTensor(rot.T @ lab.entries @ rot, frame="rotated-45")
    sym = 0.5 * (lab.entries + lab.entries.T)
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]

    def offdiag(m):
        return np.max(np.abs(m - np.diag(np.diag(m))))

    scale = np.max(np.abs(vals))
    if offdiag(lab.entries) < 1e-3 * scale:
        frame = "lab"
    elif offdiag(rotated.entries) < 1e-3 * scale:
        frame = "rotated-45"
    else:
        frame = "other"
    return FocusTensorResult(lab=lab, rotated=rotated, eigenvalues=vals,
                             eigenvectors=vecs, diagonal_frame=frame)


# ---------------------------------------------------------------------------
# marching squares

def _marching_squares(us, vs, z, level):
    """Iso-level polylines of z (n_v, n_u) sampled at (us, vs).

    Linear interpolation on cell edges; the two ambiguous saddle cases are
    disambiguated by the cell-average value. Segments are chained into
    polylines keyed by the unique grid edge each vertex lies on.
    """
    n_v, n_u = z.shape
    above = z >= level
    segments = []  # [((edge_key_a, pt_a), (edge_key_b, pt_b))]

    def interp(p0, p1, z0, z1):
        t = (level - z0) / (z1 - z0)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    codes = (above[:-1, :-1].astype(np.int8)
             | (above[:-1, 1:].astype(np.int8) << 1)
             | (above[1:, 1:].astype(np.int8) << 2)
             | (above[1:, :-1].astype(np.int8) << 3))
    pairs = {
        1: [("b", "l")], 2: [("b", "r")], 3: [("l", "r")], 4: [("r", "t")],
        6: [("b", "t")], 7: [("l", "t")], 8: [("t", "l")], 9: [("b", "t")],
        11: [("r", "t")], 12: [("l", "r")], 13: [("b", "r")], 14: [("b", "l")],
    }
    for j, i in zip(*np.nonzero((codes != 0) & (codes != 15))):
        idx = int(codes[j, i])
        corners = {
            "b": ((us[i], vs[j]), (us[i + 1], vs[j]), z[j, i], z[j, i + 1],
                  ("h", i, j)),
            "r": ((us[i + 1], vs[j]), (us[i + 1], vs[j + 1]), z[j, i + 1],
                  z[j + 1, i + 1], ("v", i + 1, j)),
            "t": ((us[i], vs[j + 1]), (us[i + 1], vs[j + 1]), z[j + 1, i],
                  z[j + 1, i + 1], ("h", i, j + 1)),
            "l": ((us[i], vs[j]), (us[i], vs[j + 1]), z[j, i], z[j + 1, i],
                  ("v", i, j)),
        }

        def edge_point(name):
            p0, p1, z0, z1, key = corners[name]
            return key, interp(p0, p1, z0, z1)

        if idx in (5, 10):
            mean = 0.25 * (z[j, i] + z[j, i + 1] + z[j + 1, i] + z[j + 1, i + 1])
            center_above = mean >= level
            if idx == 5:  # corners b-l and t-r above
                conn = [("b", "r"), ("t", "l")] if center_above else \
                       [("b", "l"), ("r", "t")]
            else:         # idx == 10
                conn = [("b", "l"), ("r", "t")] if center_above else \
                       [("b", "r"), ("t", "l")]
        else:
            conn = pairs[idx]
        for a, b in conn:
            segments.append((edge_point(a), edge_point(b)))

    # chain segments into polylines via shared edge keys
    links = {}
    for (ka, pa), (kb, pb) in segments:
        links.setdefault(ka, []).append((kb, pa, pb))
        links.setdefault(kb, []).append((ka, pb, pa))

    used = set()
    polylines = []
    for (ka, pa), (kb, pb) in segments:
        seg_id = (ka, kb)
        if seg_id in used or (kb, ka) in used:
            continue
        # walk both directions from this segment
        chain_keys = [ka, kb]
        chain_pts = [pa, pb]
        used.add(seg_id)
        for _ in range(2):
            extended = True
            while extended:
                extended = False
                tail = chain_keys[-1]
                for nxt, _p_self, p_next in links.get(tail, []):
                    sid = (tail, nxt)
                    if sid in used or (nxt, tail) in used or nxt in chain_keys[1:-1]:
                        continue
                    if nxt == chain_keys[0]:  # closes the loop
                        used.add(sid)
                        chain_keys.append(nxt)
                        chain_pts.append(chain_pts[0])
                        extended = False
                        break
                    used.add(sid)
                    chain_keys.append(nxt)
                    chain_pts.append(p_next)
                    extended = True
                    break
                if chain_keys[-1] == chain_keys[0]:
                    break
            if chain_keys[-1] == chain_keys[0]:
                break
            chain_keys.reverse()
            chain_pts.reverse()
        polylines.append(np.array(chain_pts))
    return polylines


def default_levels(center=100.5 * GAUSS, step=6.0 * GAUSS, lo=None, hi=None,
                   grid: FieldGrid | None = None):
    """Center level plus +/- k*step covering [lo, hi] (or the grid range)."""
    if grid is not None:
        lo = float(np.min(grid.magnitude))
        hi = float(np.max(grid.magnitude))
    if lo is None or hi is None:
        raise ValueError("either a grid or an explicit range is required")
    k_lo = int(math.ceil((lo - center) / step))
    k_hi = int(math.floor((hi - center) / step))
    return [center + k * step for k in range(k_lo, k_hi + 1)]


def extract_contours(grid: FieldGrid, levels) -> ContourSet:
    """Marching-squares iso-|B| polylines for each level."""
    if not np.all(np.isfinite(grid.magnitude)):
        raise ValueError("grid magnitudes must be finite")
    polylines = {}
    for level in levels:
        polylines[float(level)] = _marching_squares(grid.us, grid.vs,
                                                    grid.magnitude, float(level))
    return ContourSet(plane=grid.plane, levels=[float(l) for l in levels],
                      polylines=polylines)


# ---------------------------------------------------------------------------
# resonant shell and vector grids

def symmetry_plane(name: str, center, half_width: float,
                   half_height: float | None = None) -> PlaneSpec:
    """The +45 / -45 degree vertical symmetry plane, or the horizontal plane.

    u runs along the in-plane direction, v along z (vertical planes) or y'
    (horizontal plane); the window is centered on `center`.
    """
    c = 1.0 / math.sqrt(2.0)
    axes = {
        "p45": ((c, c, 0.0), (0.0, 0.0, 1.0)),
        "m45": ((c, -c, 0.0), (0.0, 0.0, 1.0)),
        "horizontal": ((c, c, 0.0), (-c, c, 0.0)),
    }
    if name not in axes:
        raise ValueError(f"unknown plane {name!r}; expected p45, m45 or horizontal")
    if half_height is None:
        half_height = half_width
    u, v = axes[name]
    return PlaneSpec(origin=tuple(np.asarray(center, dtype=float)), u_axis=u, v_axis=v,
                     u_range=(-half_width, half_width), v_range=(-half_height, half_height))


def resonant_shell_extent(geom: LensGeometry, bias: BiasField, center_level: float,
                          linewidth: float, spec: QuadratureSpec = QuadratureSpec(),
                          focus: FocusReport | None = None,
                          axes=None, scan_half: float = 8e-9,
                          resolution: float = 0.01e-9):
    """Length of the on-resonance segment along each principal axis.

    Scans |B| along each axis through the focus at `resolution` and sums the
    points with ||B| - center_level| < linewidth / 2.
    """
    if focus is None:
        focus = find_focus(geom, bias, spec=spec)
    if focus.classification != "minimum":
        raise AnalysisError("resonant shell requires a |B| minimum")
    if center_level < focus.b_min:
        raise ValueError("center_level must be >= the field minimum")
    if axes is None:
        ft = focus_tensor(geom, bias, focus.position, spec)
        axes = [ft.eigenvectors[:, k] for k in range(3)]
    extents = []
    n = int(round(scan_half / resolution))
    s = resolution * np.arange(-n, n + 1)
    for ax in axes:
        pts = focus.position[None, :] + s[:, None] * np.asarray(ax)[None, :]
        b = magnet_field(geom, pts, spec) + np.array([0.0, 0.0, bias.b_bias_z])
        mag = np.linalg.norm(b, axis=1)
        inside = np.abs(mag - center_level) < 0.5 * linewidth
        extents.append(float(np.count_nonzero(inside) * resolution))
    return np.array(extents)


def vector_grid(geom: LensGeometry, bias: BiasField, plane_name: str,
                window: float, n: int, spec: QuadratureSpec = QuadratureSpec(),
                focus: FocusReport | None = None) -> FieldGrid:
    """Field-vector grid over a window centered on the focus."""
    if focus is None:
        focus = find_focus(geom, bias, spec=spec)
    plane = symmetry_plane(plane_name, focus.position, 0.5 * window)
    return field_grid(geom, bias, plane, n, n, spec)
