"""Cross-validate the solver against an independent physical model.

The same magnet can be represented two ways: pseudo surface charges on its
top and bottom faces, or Amperian sheet currents on its lateral walls (an
outer loop, two counter-rotating inner arcs, and four straight bars along
the cut edges). The two models share no code path past the geometry, so
their agreement is a strong end-to-end check. Free-space Maxwell
constraints on the gradient tensor (zero trace, symmetry) are checked too.
"""

import numpy as np
from scipy.stats import qmc

from maglens.amperian import biot_savart_batch, sheets_for
from maglens.constants import GAUSS, NM
from maglens.fieldsolver import BiasField, jacobian_batch, magnet_field
from maglens.geometry import LensGeometry
from maglens.quadrature import QuadratureSpec

geom = LensGeometry()
bias = BiasField(-650 * GAUSS)
spec = QuadratureSpec(radial_order=24, angular_order=24)

sheets = sheets_for(geom)
print(f"Amperian model: {len(sheets)} current sheets, net currents "
      + ", ".join(f"{s.total_current * 1e3:+.2f} mA" for s in sheets))

lo = np.array([-30.0, -30.0, 10.0]) * NM
hi = np.array([30.0, 30.0, 50.0]) * NM
pts = qmc.Halton(d=3, scramble=False, seed=0).random(50) * (hi - lo) + lo

b_charge = magnet_field(geom, pts, spec)
b_amp = biot_savart_batch(sheets, pts, spec)
mask = np.abs(b_charge) > 1 * GAUSS
rel = np.abs(b_amp - b_charge)[mask] / np.abs(b_charge)[mask]
print(f"charge vs Amperian at 50 points: worst relative deviation {rel.max():.2e}")

jac = jacobian_batch(geom, bias, pts, spec)
scale = np.max(np.abs(jac), axis=(1, 2))
tr = np.max(np.abs(np.trace(jac, axis1=1, axis2=2)) / scale)
asym = np.max(np.max(np.abs(jac - np.transpose(jac, (0, 2, 1))), axis=(1, 2)) / scale)
print(f"gradient tensor: worst trace {tr:.1e}, worst asymmetry {asym:.1e} "
      f"(fraction of max entry)")
