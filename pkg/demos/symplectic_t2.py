"""Symplectic pairing and moment map on T^2 for SU(2).

Builds a random connection, two tangent vectors and a gauge parameter, then
prints C_A(a, b), the moment map and the two sides of d<m, X> = C(d_A X, .).

    python demos/symplectic_t2.py
"""
import numpy as np

from gaugeforms.forms import TorusGrid
from gaugeforms.gauge import (adjoint_form, band_limited_gauge, gauge_act, infinitesimal_action,
                              random_connection, random_gauge_parameter)
from gaugeforms.lie import SU2
from gaugeforms.scenarios import hand_symplectic_t2, symplectic_descriptor
from gaugeforms.spaceforms import evaluate_C, moment_pairing, richardson_derivative

rng = np.random.default_rng(1)
grid = TorusGrid.cube(2, 32)
desc = symplectic_descriptor(1, grid)
A, a, b = (random_connection(grid, SU2, rng) for _ in range(3))
X = random_gauge_parameter(grid, SU2, rng)

C = evaluate_C(desc, A, [a, b])
print(f"C_A(a, b)            = {C:+.15f}")
print(f"hand quadrature      = {hand_symplectic_t2(a.data, b.data):+.15f}")

m = moment_pairing(A, X)
d1, d2, _ = richardson_derivative(lambda B: moment_pairing(B, X), A, a, 1e-4)
rhs = evaluate_C(desc, A, [infinitesimal_action(X, A), a])
print(f"<m_A, X>             = {m:+.15f}")
print(f"D_a <m, X>           = {d1:+.15f}  (half step {d2:+.15f})")
print(f"C(d_A X, a)          = {rhs:+.15f}")

# equivariance is exact under spectral differentiation and band-limited maps
sgrid = grid.with_method("spectral")
A, X = random_connection(sgrid, SU2, rng), random_gauge_parameter(sgrid, SU2, rng)
phi = band_limited_gauge(sgrid, rng)
print(f"<m_(phi.A), Ad X> - <m_A, X> = {moment_pairing(gauge_act(phi, A), adjoint_form(phi, X)) - moment_pairing(A, X):+.2e}")
