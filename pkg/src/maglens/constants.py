"""Physical constants and unit conversion factors.

SI units are used everywhere inside the package; Gauss / nm / Angstrom
appear only at the CLI boundary and in tests that quote interface values.
"""

import math

MU0 = 4.0e-7 * math.pi  # T*m/A

GAUSS = 1.0e-4  # Tesla per Gauss
NM = 1.0e-9  # meters per nanometer
ANGSTROM = 1.0e-10  # meters per Angstrom

GAUSS_PER_ANGSTROM = GAUSS / ANGSTROM  # 1 G/A = 1e6 T/m

# Gyromagnetic ratios gamma/2pi, Hz/T (CODATA)
PROTON_GAMMA_OVER_2PI = 42.5775e6
ELECTRON_GAMMA_OVER_2PI = 28.0249e9

# Proton magnetic moment, J/T (CODATA)
PROTON_MOMENT = 1.4106e-26
