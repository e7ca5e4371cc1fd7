"""Constant coefficient on the line: the constructed kernel is the Cauchy density.

    python demos/cauchy_collapse.py
"""

import numpy as np

from levyheat import measure, symbol
from levyheat.frozen import SpaceTimeGrid
from levyheat.oracle import cauchy_closed_form
from levyheat.parametrix import heat_kernel

grid = SpaceTimeGrid(64.0, 4096, np.linspace(0.05, 2.0, 40), geometry="line")
p = heat_kernel(measure.stable(1.0), symbol.constant(1.0), grid)[0]

window = np.abs(grid.x) <= 16
print("   t     max relative error on |x| <= 16")
for i, t in enumerate(grid.times[::8]):
    k = grid.time_index(t)
    exact = cauchy_closed_form(t, grid.x[window])
    err = np.max(np.abs(p.values[k, window] / exact - 1))
    print(f"{t:6.3f}   {err:.2e}")
