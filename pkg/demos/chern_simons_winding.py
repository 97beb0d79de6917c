"""Degree-d gauge maps on T^3: winding integral, preimage count and the CS shift.

    python demos/chern_simons_winding.py [N]
"""
import sys

import numpy as np

from gaugeforms.chern_simons import DegreeMapSpec, cs_action, degree_oracle, make_degree_map, winding_number
from gaugeforms.forms import TorusGrid
from gaugeforms.gauge import gauge_act, random_connection
from gaugeforms.lie import SU2

N = int(sys.argv[1]) if len(sys.argv) > 1 else 32
grid = TorusGrid.cube(3, N)
A = random_connection(grid, SU2, np.random.default_rng(0), fmax=2, amplitude=0.5)
cs0 = cs_action(A)
print(f"N = {N}, CS(A) = {cs0:+.6f}")
print(" d   S(phi)      oracle   CS(phi.A) - CS(A)")
for d in (-2, -1, 0, 1, 2, 3):
    phi = make_degree_map(DegreeMapSpec(d, radius=0.45), grid)
    S = winding_number(phi)
    shift = cs_action(gauge_act(phi, A)) - cs0
    print(f"{d:+d}  {S:+.6f}  {degree_oracle(phi):+d}       {shift:+.6f}")
