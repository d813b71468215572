"""maglens: magnetostatic solver for the planar cut-disk nanomagnet lens.

The lens is a thin magnetized disk with two diagonally opposed quarter
cuts; under a reverse bias field it produces an isolated non-zero minimum
of |B| above its surface. This package computes that field two independent
ways (surface-charge model and Biot-Savart over the equivalent surface
currents), locates and classifies the minimum, and derives the
magnetic-resonance selectivity figures.
"""

from .geometry import LensGeometry, PolarPatch, contains, decompose, scale
from .quadrature import QuadratureSpec, integrate_patch, nodes_weights
from .fieldsolver import (BiasField, FieldGrid, FieldSample, GradientTensor,
                          PlaneSpec, field_at, field_grid, jacobian_at)
from .amperian import CurrentSheet, biot_savart_field, sheets_for
from .analysis import (ContourSet, FocusReport, bias_sweep, extract_contours,
                       find_focus, focus_tensor, resonant_shell_extent,
                       symmetry_plane, vector_grid)
from .resonance import (ELECTRON, PROTON, SpinMoment, SpinSpecies,
                        force_on_spin, larmor_frequency, selectivity_report)

__version__ = "0.1.0"
