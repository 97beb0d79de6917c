"""Forms on the space of connections obtained by integrating characteristic forms.

For a Weil polynomial ``f`` of degree ``k`` and a closed ``r``-form ``beta`` on
T^n, the ``q``-form ``C`` (``q = 2k + r - n``) and its gauge-equivariant
extension ``C#`` are evaluated at a connection ``A`` on tangent vectors
``a_1..a_m`` (Lie-valued 1-forms) as

    C#(X)_A(a_1..a_m) = w(k, i, m) * int f(a_1..a_m, F_A .. F_A, X .. X) ^ beta,

where ``i = (q - m) / 2`` copies of ``X`` appear, ``k - i - m`` copies of
``F_A``, and

    w(k, i, m) = (-1)^i * binom(k, i) * (k - i)! / (k - i - m)!.

The factor ``(k-i)!/(k-i-m)!`` counts the ordered ways the ``m`` contractions
can land on curvature slots.  With ``f = tr(X^2)/8pi^2`` on a surface this gives
``C_A(a, b) = 1/4pi^2 int tr(a ^ b)`` and the constant term
``-1/4pi^2 int tr(X F_A)``; unit tests pin both values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .forms import LieValuedForm, exterior_derivative, integrate, multilinear_wedge, wedge
from .gauge import GaugeTransform, adjoint_form, curvature, gauge_act, infinitesimal_action
from .lie import Algebra, trace_product
from .weil import WeilPolynomial

FOUR_PI2 = 4 * np.pi**2


@dataclass(frozen=True)
class CharFormDescriptor:
    """The pair ``(f, beta)``; ``beta`` is a closed scalar form checked at construction."""

    f: WeilPolynomial
    beta: LieValuedForm
    closed_tol: float = 1e-10

    def __post_init__(self):
        beta = self.beta
        if beta.algebra is not None:
            raise ValueError("beta must be a scalar form")
        if beta.degree < beta.grid.dim:
            d = exterior_derivative(beta)
            scale = max(beta.max_abs(), 1.0)
            if d.max_abs() > self.closed_tol * scale * max(beta.grid.sizes):
                raise ValueError(f"beta is not closed (|d beta| = {d.max_abs():.3e})")
        if self.q < 0:
            raise ValueError(f"2k + r - n = {self.q} < 0")

    @property
    def k(self) -> int:
        return self.f.degree

    @property
    def r(self) -> int:
        return self.beta.degree

    @property
    def n(self) -> int:
        return self.beta.grid.dim

    @property
    def grid(self):
        return self.beta.grid

    @property
    def q(self) -> int:
        return 2 * self.k + self.r - self.n

    def x_degree(self, m: int):
        """Number of ``X`` slots paired with ``m`` arguments, or ``None`` if inadmissible."""
        twice_i = self.q - m
        if m < 0 or twice_i < 0 or twice_i % 2:
            return None
        i = twice_i // 2
        if i > self.k or self.k - i - m < 0:
            return None
        return i

    def weight(self, i: int, m: int) -> float:
        return (-1) ** i * math.comb(self.k, i) * math.factorial(self.k - i) / math.factorial(self.k - i - m)


def _integrand(desc: CharFormDescriptor, args, F, X, i) -> LieValuedForm:
    nF = desc.k - i - len(args)
    slots = list(args) + [F] * nF + [X] * i
    density = multilinear_wedge(desc.f, *slots)
    if desc.r == 0:
        beta0 = desc.beta.data[0]
        return LieValuedForm(density.grid, density.degree, density.data * beta0)
    return wedge(density, desc.beta)


def _evaluate(desc: CharFormDescriptor, A: LieValuedForm, args, X, i) -> float:
    for a in args:
        if a.degree != 1 or a.grid != desc.grid:
            raise ValueError("tangent vectors must be 1-forms on the descriptor grid")
    if A.grid != desc.grid:
        raise ValueError("connection lives on a different grid")
    m = len(args)
    nF = desc.k - i - m
    F = curvature(A) if nF > 0 else None
    return desc.weight(i, m) * integrate(_integrand(desc, args, F, X, i))


def evaluate_C(desc: CharFormDescriptor, A: LieValuedForm, args: Sequence[LieValuedForm]) -> float:
    if len(args) != desc.q:
        raise ValueError(f"C takes {desc.q} arguments, got {len(args)}")
    if desc.q > desc.k:
        return 0.0
    return _evaluate(desc, A, args, None, 0)


def evaluate_C_sharp(desc: CharFormDescriptor, A: LieValuedForm, X: LieValuedForm,
                     args: Sequence[LieValuedForm]) -> float:
    """Degree-``len(args)`` component of the equivariant extension at ``X``; 0 if inadmissible."""
    if X.degree != 0 or X.grid != desc.grid:
        raise ValueError("X must be a 0-form on the descriptor grid")
    i = desc.x_degree(len(args))
    if i is None:
        return 0.0
    return _evaluate(desc, A, args, X, i)


def value_scale(desc: CharFormDescriptor, A: LieValuedForm, args: Sequence[LieValuedForm]) -> float:
    """``|w| * int |density|``: the natural magnitude against which ``evaluate_C`` residuals are judged."""
    m = len(args)
    i = desc.x_degree(m)
    if m != desc.q or i is None:
        return 0.0
    nF = desc.k - i - m
    F = curvature(A) if nF > 0 else None
    dens = _integrand(desc, args, F, None, i)
    return abs(desc.weight(i, m)) * float(np.sum(np.abs(dens.data))) * A.grid.cell_volume


def pairing(eta: LieValuedForm, X: LieValuedForm) -> float:
    """``<eta, X> = -1/4pi^2 int tr(X eta)`` for a top-degree Lie-valued ``eta``."""
    if eta.degree != eta.grid.dim or X.degree != 0:
        raise ValueError("pairing needs a top-degree form and a 0-form")
    dens = trace_product(X.data[0], eta.data[0])
    return -float(np.sum(np.ascontiguousarray(dens).ravel())) * eta.grid.cell_volume / FOUR_PI2


def moment_pairing(A: LieValuedForm, X: LieValuedForm) -> float:
    """``m_A(X) = -1/4pi^2 int tr(X F_A)`` on a surface."""
    if A.grid.dim != 2:
        raise ValueError("the moment map is defined here for surfaces")
    return pairing(curvature(A), X)


def shift(A: LieValuedForm, direction: LieValuedForm, t: float) -> LieValuedForm:
    return LieValuedForm(A.grid, A.degree, A.data + t * direction.data, A.algebra, check=False)


def directional_derivative(functional: Callable[[LieValuedForm], float], A: LieValuedForm,
                           direction: LieValuedForm, step: float) -> float:
    """Central difference of ``functional`` along the affine line ``A + t a``."""
    if step <= 0:
        raise ValueError("step must be positive")
    return (functional(shift(A, direction, step)) - functional(shift(A, direction, -step))) / (2 * step)


connection_space_directional_derivative = directional_derivative


def richardson_derivative(functional, A, direction, step):
    """Returns ``(D(h), D(h/2), extrapolated)``; the two raw values must agree."""
    d1 = directional_derivative(functional, A, direction, step)
    d2 = directional_derivative(functional, A, direction, step / 2)
    return d1, d2, (4 * d2 - d1) / 3


def cartan_closedness_residual(desc: CharFormDescriptor, A: LieValuedForm, X: LieValuedForm,
                               probes: Sequence[LieValuedForm], step: float = 1e-4) -> float:
    """``(d_c C#)(X)`` on ``len(probes)`` vectors.

    ``d(C#_m(X))(a_0..a_m) - C#_{m+2}(X)(X_A, a_0..a_m)`` with ``m = len(probes) - 1``,
    ``X_A = d_A X`` and the exterior derivative on the affine space of
    connections taken by central differences.
    """
    m = len(probes) - 1
    lower = desc.x_degree(m) if m >= 0 else None
    upper = desc.x_degree(m + 2)
    if lower is None and upper is None:
        raise ValueError(f"no admissible component for {len(probes)} probes")
    dterm = 0.0
    if lower is not None:
        for j, a in enumerate(probes):
            rest = list(probes[:j]) + list(probes[j + 1:])
            fun = lambda B, rest=rest: evaluate_C_sharp(desc, B, X, rest)
            dterm += (-1) ** j * directional_derivative(fun, A, a, step)
    iterm = 0.0
    if upper is not None:
        iterm = evaluate_C_sharp(desc, A, X, [infinitesimal_action(X, A)] + list(probes))
    return dterm - iterm


def gauge_invariance_residual(desc: CharFormDescriptor, A: LieValuedForm, phi: GaugeTransform,
                              args: Sequence[LieValuedForm]) -> float:
    before = evaluate_C(desc, A, args)
    after = evaluate_C(desc, gauge_act(phi, A), [adjoint_form(phi, a) for a in args])
    return abs(after - before)


def gauss_legendre_unit(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1), 0.5 * w


def characteristic_form(f: WeilPolynomial, A: LieValuedForm) -> LieValuedForm:
    F = curvature(A)
    return multilinear_wedge(f, *([F] * f.degree))


def transgression_form(f: WeilPolynomial, A0: LieValuedForm, A1: LieValuedForm, t_nodes: int) -> LieValuedForm:
    """``k int_0^1 f(a, F_t, ..., F_t) dt`` by Gauss-Legendre in ``t``."""
    a = A1 - A0
    ts, ws = gauss_legendre_unit(t_nodes)
    out = None
    for t, w in zip(ts, ws):
        At = LieValuedForm(A0.grid, 1, (1 - t) * A0.data + t * A1.data, A0.algebra, check=False)
        term = multilinear_wedge(f, a, *([curvature(At)] * (f.degree - 1)))
        out = term * (w * f.degree) if out is None else out + term * (w * f.degree)
    return out


@dataclass
class TransgressionResult:
    pointwise: float
    integral_gap: float
    scale: float


def transgression_residual(f: WeilPolynomial, A0: LieValuedForm, A1: LieValuedForm,
                           t_nodes: int = 2) -> TransgressionResult:
    """L2 norm of ``c_f(F_1) - c_f(F_0) - d T`` and the gap of the integrals."""
    if A0.grid.dim != 2 * f.degree:
        raise ValueError(f"transgression check needs dim M = 2k = {2 * f.degree}")
    if t_nodes < 2:
        raise ValueError("t_nodes must be >= 2")
    c1, c0 = characteristic_form(f, A1), characteristic_form(f, A0)
    T = transgression_form(f, A0, A1, t_nodes)
    R = c1 - c0 - exterior_derivative(T)
    scale = max((c1 - c0).norm(), 1e-300)
    return TransgressionResult(R.norm(), abs(integrate(c1) - integrate(c0)), scale)
