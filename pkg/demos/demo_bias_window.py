"""Map the bias-field window in which the lens traps a |B| minimum.

Sweeping the axial bias from -900 G to -400 G, the stationary point above
the lens changes character: too little or too much bias gives a saddle of
|B|; only inside a window of roughly -750 G to -575 G does a genuine local
minimum exist. The sweep below reproduces that window.
"""

from maglens.analysis import bias_sweep
from maglens.constants import GAUSS, NM
from maglens.geometry import LensGeometry
from maglens.quadrature import QuadratureSpec

geom = LensGeometry()
spec = QuadratureSpec(radial_order=24, angular_order=24)

sweep = bias_sweep(geom, (-900 * GAUSS, -400 * GAUSS), 25 * GAUSS, spec)

print(f"{'bias (G)':>10} {'class':>10} {'z (nm)':>8} {'|B|min (G)':>11}")
for b, rep in sweep.entries:
    print(f"{b / GAUSS:>10.0f} {rep.classification:>10} "
          f"{rep.position[2] / NM:>8.2f} {rep.b_min / GAUSS:>11.2f}")

print("\nclassification runs:")
for cls, lo, hi in sweep.runs:
    print(f"  {cls:>8}: {lo / GAUSS:.0f} G to {hi / GAUSS:.0f} G")
