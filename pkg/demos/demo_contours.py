"""Extract iso-|B| contours around the focus in the two vertical planes.

The minimum is strongly anisotropic: the level sets of |B| around it are
elongated along z and differ between the +45 and -45 degree vertical
symmetry planes. This script samples |B| on both planes, runs marching
squares at levels 100.5 G +/- k*6 G, and writes plot-ready CSV files.
"""

import io

import numpy as np

from maglens.analysis import default_levels, extract_contours, find_focus, symmetry_plane
from maglens.cli import write_contours_csv
from maglens.constants import GAUSS, NM
from maglens.fieldsolver import BiasField, field_grid
from maglens.geometry import LensGeometry
from maglens.quadrature import QuadratureSpec

geom = LensGeometry()
bias = BiasField(-650 * GAUSS)
spec = QuadratureSpec(radial_order=24, angular_order=24)

focus = find_focus(geom, bias, spec=spec)

for name in ("p45", "m45"):
    plane = symmetry_plane(name, focus.position, 10 * NM)   # 20 nm window
    grid = field_grid(geom, bias, plane, 201, 201, spec)
    levels = default_levels(grid=grid)
    contours = extract_contours(grid, levels)

    n_lines = sum(len(v) for v in contours.polylines.values())
    print(f"{name}: {len(levels)} levels, {n_lines} polylines, "
          f"|B| in [{grid.magnitude.min() / GAUSS:.1f}, "
          f"{grid.magnitude.max() / GAUSS:.1f}] G")
    inner = contours.polylines[100.5 * GAUSS]
    central = [p for p in inner if np.allclose(p[0], p[-1])]
    if central:
        widths = min(np.ptp(p[:, 0]) for p in central)
        print(f"  narrowest closed 100.5 G contour: {widths / NM:.2f} nm wide")

    out = f"contours_{name}.csv"
    with open(out, "w") as fh:
        write_contours_csv(contours, fh)
    print(f"  wrote {out}")
