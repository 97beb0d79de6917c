"""Refinement studies: transgression on T^4 and the monopole quadrature.

Prints residuals against N and the least-squares order, the same numbers the
`sweep` subcommand reports.

    python demos/refinement.py
"""
import numpy as np

from gaugeforms.forms import TorusGrid
from gaugeforms.gauge import random_connection
from gaugeforms.lie import SU2
from gaugeforms.report import fit_order
from gaugeforms.scenarios import monopole_chern_number
from gaugeforms.spaceforms import transgression_residual
from gaugeforms.weil import get_polynomial

f = get_polynomial("c2_su2")
Ns, res = [12, 16, 24], []
for N in Ns:
    rng = np.random.default_rng(4)  # same fields at every N
    g = TorusGrid.cube(4, N)
    A0, A1 = random_connection(g, SU2, rng, fmax=1), random_connection(g, SU2, rng, fmax=1)
    r = transgression_residual(f, A0, A1)
    res.append(r.pointwise)
    print(f"T^4 N={N:2d}: pointwise {r.pointwise:.3e}   |int c(F1) - int c(F0)| = {r.integral_gap:.1e}")
print(f"fitted order: {fit_order(Ns, res):.2f}")

for n in (-2, 1, 3):
    print(f"monopole n={n:+d}: c_1 = {monopole_chern_number(n):.15f}")
