"""Chern-Simons functional on T^3, winding numbers of gauge maps and the gauge-shift law.

Orientation of SU(2): the chart ``g0 (y0 + i y.sigma) -> (y1, y2, y3)`` is
positive.  With this choice and the gauge action ``phi A phi^-1 - d(phi) phi^-1``
the winding number is ``+1/24pi^2 int tr((phi^-1 d phi)^3)`` and

    CS(phi . A) = CS(A) - S(phi).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .forms import LieValuedForm, TorusGrid, exterior_derivative, integrate, multilinear_wedge
from .gauge import GaugeTransform, covariant_derivative, curvature, gauge_act, infinitesimal_action
from .lie import PAULI, SU2, Algebra, dagger
from .spaceforms import CharFormDescriptor, evaluate_C
from .weil import WeilPolynomial, get_polynomial, trace_product_map

EIGHT_PI2 = 8 * np.pi**2
TWENTYFOUR_PI2 = 24 * np.pi**2


def _require_t3(A_or_grid):
    grid = getattr(A_or_grid, "grid", A_or_grid)
    if grid.dim != 3:
        raise ValueError("Chern-Simons quantities need a 3-torus")


def cs_action(A: LieValuedForm) -> float:
    """``-1/8pi^2 int tr(A ^ dA + 2/3 A ^ A ^ A)``.

    For u(1) with ``A = i alpha`` this is ``+1/8pi^2 int alpha ^ d alpha``.
    """
    _require_t3(A)
    if A.algebra is None or A.degree != 1:
        raise ValueError("cs_action takes a Lie-valued 1-form")
    if A.algebra.name == "uk":
        raise ValueError("cs_action is implemented for su2 and u1")
    quad = integrate(multilinear_wedge(trace_product_map(2), A, exterior_derivative(A)))
    cubic = integrate(multilinear_wedge(trace_product_map(3), A, A, A))
    return -(quad + 2.0 / 3.0 * cubic) / EIGHT_PI2


def cs_transgression(A: LieValuedForm, f: WeilPolynomial | None = None, t_nodes: int = 2) -> float:
    """``int k int_0^1 f(A, F_{tA}, ...) dt``: the potential of ``c_f`` relative to ``A = 0``.

    With ``f = det/4pi^2`` on su(2) this equals :func:`cs_action`.
    """
    from .spaceforms import transgression_form

    f = f or get_polynomial("det_su2")
    zero = LieValuedForm.zeros(A.grid, 1, A.algebra)
    return integrate(transgression_form(f, zero, A, t_nodes))


def winding_number(phi: GaugeTransform) -> float:
    """``1/24pi^2 int tr((phi^-1 d phi)^3)``."""
    _require_t3(phi)
    L = phi.left_current()
    return integrate(multilinear_wedge(trace_product_map(3), L, L, L)) / TWENTYFOUR_PI2


@dataclass(frozen=True)
class DegreeMapSpec:
    degree: int
    radius: float = 0.35
    center: tuple = (0.5, 0.5, 0.5)

    def __post_init__(self):
        if not 0 < self.radius < 0.5:
            raise ValueError("bump radius must lie in (0, 1/2)")
        if len(self.center) != 3:
            raise ValueError("center must have three coordinates")
        object.__setattr__(self, "center", tuple(float(c) % 1.0 for c in self.center))


def smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t**2)


def wrapped_directions(delta, degree):
    """Unit vectors ``delta/|delta|`` pushed through the rational map ``z -> z^d``
    of the direction sphere (``z`` = stereographic coordinate, conjugated for d < 0).

    Written with polynomials in ``delta`` over a positive denominator so it is
    smooth away from the origin.
    """
    r = np.linalg.norm(delta, axis=-1)
    d = abs(degree)
    w = delta[..., 0] + 1j * delta[..., 1]
    if degree < 0:
        w = np.conj(w)
    up, down = (r + delta[..., 2]) ** d, (r - delta[..., 2]) ** d
    denom = up + down
    denom = np.where(denom > 0, denom, 1.0)
    w_new = 2 * w**d / denom
    return np.stack([w_new.real, w_new.imag, (up - down) / denom], axis=-1)


def make_degree_map(spec: DegreeMapSpec, grid: TorusGrid) -> GaugeTransform:
    """Radial bump ``cos(theta) - i sin(theta) n_d.sigma`` around ``spec.center``.

    ``theta`` falls from pi at the center to 0 at the bump radius (quintic
    smoothstep), so the map is the identity outside the ball.  ``n_d`` wraps
    the sphere of directions ``d`` times (:func:`wrapped_directions`), which
    keeps gradients moderate compared with taking pointwise powers.
    """
    _require_t3(grid)
    if spec.degree == 0:
        return GaugeTransform.identity(grid, SU2)
    x = grid.coords()
    delta = np.stack([(xi - c + 0.5) % 1.0 - 0.5 for xi, c in zip(x, spec.center)], axis=-1)
    r = np.linalg.norm(delta, axis=-1)
    theta = np.pi * (1.0 - smoothstep5(r / spec.radius))
    nhat = wrapped_directions(delta, spec.degree)
    ndotsigma = np.tensordot(nhat, PAULI, axes=([-1], [0]))
    vals = np.cos(theta)[..., None, None] * np.eye(2) - 1j * np.sin(theta)[..., None, None] * ndotsigma
    return GaugeTransform(grid, vals, SU2)


# ---------------------------------------------------------------------------
# independent preimage-counting oracle


class InconclusiveDegree(RuntimeError):
    pass


def chart_coordinates(values, regular_value):
    """``(y0, y)`` with ``g0^{-1} g = y0 + i y.sigma``."""
    M = dagger(np.asarray(regular_value)) @ values
    y0 = 0.5 * np.trace(M, axis1=-2, axis2=-1).real
    y = 0.5 * np.einsum("aij,...ji->...a", PAULI, M).imag
    return y0, y


DEFAULT_REGULAR_VALUE = np.array(
    [[0.3 - 0.5j, 0.6 + 0.2j], [-0.6 + 0.2j, 0.3 + 0.5j]], dtype=complex
)
DEFAULT_REGULAR_VALUE /= np.sqrt(abs(np.linalg.det(DEFAULT_REGULAR_VALUE)))


def degree_oracle(phi: GaugeTransform, regular_value=None, det_tol: float = 1e-14, bary_tol: float = 1e-12) -> int:
    """Signed count of preimages of ``regular_value`` for the piecewise-linear
    interpolant of ``phi`` on the Freudenthal triangulation of the grid."""
    _require_t3(phi)
    g0 = DEFAULT_REGULAR_VALUE if regular_value is None else np.asarray(regular_value, dtype=complex)
    y0, y = chart_coordinates(phi.values, g0)
    valid = y0 > 0.2
    total = 0
    for perm in itertools.permutations(range(3)):
        shifts = [np.zeros(3, int)]
        for ax in perm:
            nxt = shifts[-1].copy()
            nxt[ax] += 1
            shifts.append(nxt)
        ys = [np.roll(y, tuple(-s), axis=(0, 1, 2)) for s in shifts]
        vs = [np.roll(valid, tuple(-s), axis=(0, 1, 2)) for s in shifts]
        stack = np.stack(ys)  # (4, N, N, N, 3)
        mask = vs[0] & vs[1] & vs[2] & vs[3]
        mask &= np.all(stack.min(axis=0) <= 0, axis=-1) & np.all(stack.max(axis=0) >= 0, axis=-1)
        if not mask.any():
            continue
        Y = stack[:, mask]  # (4, m, 3)
        J = np.stack([Y[1] - Y[0], Y[2] - Y[0], Y[3] - Y[0]], axis=-1)  # columns
        det = np.linalg.det(J)
        scale = np.max(np.abs(J), axis=(1, 2)) ** 3
        degenerate = np.abs(det) <= det_tol * np.maximum(scale, 1e-300)
        ok = ~degenerate
        lam = np.zeros((len(det), 3))
        lam[ok] = np.linalg.solve(J[ok], -Y[0][ok][..., None])[..., 0]
        bary = np.concatenate([1 - lam.sum(axis=1, keepdims=True), lam], axis=1)
        inside = np.all(bary > -bary_tol, axis=1)
        if np.any(inside & degenerate):
            raise InconclusiveDegree("regular value hits a (near-)critical simplex")
        if np.any(inside & (np.min(np.abs(bary), axis=1) <= bary_tol)):
            raise InconclusiveDegree("regular value lies on a simplex boundary; choose another")
        orient = _perm_parity(perm)
        total += orient * int(np.sum(np.sign(det[inside])))
    return total


def _perm_parity(perm) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# checks


def cs_shift_residual(A: LieValuedForm, phi: GaugeTransform, winding: float | None = None) -> float:
    """``|CS(phi . A) - CS(A) + S(phi)|``."""
    S = winding_number(phi) if winding is None else winding
    return abs(cs_action(gauge_act(phi, A)) - cs_action(A) + S)


def cs_descriptor(grid: TorusGrid, f: WeilPolynomial | None = None) -> CharFormDescriptor:
    f = f or get_polynomial("det_su2")
    return CharFormDescriptor(f, LieValuedForm(grid, 0, np.ones((1,) + grid.sizes)))


def noether_current(A: LieValuedForm, X: LieValuedForm, f: WeilPolynomial) -> LieValuedForm:
    """``c_f^1(F_A, X) = -k f(F_A, ..., F_A, X)`` pulled back to M."""
    F = curvature(A)
    return multilinear_wedge(f, *([F] * (f.degree - 1)), X) * (-f.degree)


def current_closedness_residual(A: LieValuedForm, X: LieValuedForm, f: WeilPolynomial | None = None) -> float:
    f = f or get_polynomial("det_su2")
    return exterior_derivative(noether_current(A, X, f)).norm()


def horizontality_residual(A: LieValuedForm, X: LieValuedForm, f: WeilPolynomial | None = None):
    """``(|C_A(d_A X)|, scale)`` for the 1-form ``C`` on connections over T^3.

    ``scale`` is the same integral taken with absolute values of the density.
    """
    _require_t3(A)
    desc = cs_descriptor(A.grid, f)
    a = infinitesimal_action(X, A)
    value = evaluate_C(desc, A, [a])
    F = curvature(A)
    dens = multilinear_wedge(desc.f, a, F).data[0]
    scale = desc.k * float(np.sum(np.abs(dens))) * A.grid.cell_volume
    return abs(value), scale
