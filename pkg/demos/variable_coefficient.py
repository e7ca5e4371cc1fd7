"""Heat kernel of a tanh-ramp coefficient and its core properties.

A smaller lattice than the main run keeps this under a minute:

    python demos/variable_coefficient.py
"""

import numpy as np

from levyheat import measure, symbol, verify
from levyheat.frozen import SpaceTimeGrid
from levyheat.parametrix import ParametrixEngine

L = 32.0
grid = SpaceTimeGrid(L, 1024, np.linspace(0.0625, 1.0, 61))
profile = measure.stable(1.0)
coeff = symbol.tanh_ramp(amp=0.25).periodized(L)

engine = ParametrixEngine(profile, coeff, grid)
kernel = engine.kernel(0.0)
print("series levels:", kernel.table.n_levels, " tail bound:", f"{kernel.table.truncation_bound:.1e}")
print("sup |phi| / sup p:", f"{np.abs(kernel.phi).max() / kernel.values.max():.3e}")

for check in (verify.check_mass(kernel),
              verify.check_chapman_kolmogorov(kernel, 0.25, 0.25),
              verify.check_nonnegativity(kernel),
              verify.check_integral_equation(kernel, [0.25, 1.0]),
              verify.check_pde(profile, coeff, kernel, 0.01)):
    print(f"{check.name:32s} residual {check.residual:.2e}  tol {check.tol:.0e}  "
          f"{'pass' if check.passed else 'FAIL'}")

c = verify.bound_constants(kernel, profile, T0=0.5)
print(f"p <= {c['c_upper']:.3f} rho_t   and   p >= {c['c_lower']:.3f} x lower form on t <= 0.5")
