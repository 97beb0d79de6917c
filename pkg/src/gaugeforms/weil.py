"""Ad-invariant (Weil) polynomials with polarized evaluation.

Two kinds are supported: ``c0 * tr(X^k)`` and ``c0 * det(X)`` for k x k
matrices (k <= 3).  Evaluation is vectorized over leading axes and the real
part is returned.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lie import Algebra, SU2, U1, adjoint_action, random_group


@dataclass(frozen=True)
class WeilPolynomial:
    degree: int
    kind: str = "trace_power"
    normalization: complex = 1.0
    name: str = ""

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.kind not in ("trace_power", "determinant"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "determinant" and self.degree > 3:
            raise ValueError("determinant polarization supports degree <= 3")

    @property
    def arity(self) -> int:
        return self.degree

    def check_algebra(self, algebra: Algebra) -> None:
        if self.kind == "determinant" and algebra.k != self.degree:
            raise ValueError(
                f"det of {algebra.k}x{algebra.k} matrices has degree {algebra.k}, not {self.degree}"
            )

    def __call__(self, *args):
        return self.polarized(*args)

    def evaluate(self, X):
        """Diagonal value ``f(X, ..., X)``."""
        X = np.asarray(X)
        if self.kind == "determinant":
            self._check_det_shape(X)
            val = np.linalg.det(X)
        else:
            val = np.trace(np.linalg.matrix_power(X, self.degree), axis1=-2, axis2=-1)
        return (self.normalization * val).real

    def polarized(self, *args):
        if len(args) != self.degree:
            raise ValueError(f"expected {self.degree} arguments, got {len(args)}")
        args = [np.asarray(a) for a in args]
        if self.kind == "determinant":
            return (self.normalization * mixed_discriminant(args)).real
        return (self.normalization * symmetrized_trace(args)).real

    def _check_det_shape(self, X):
        if X.shape[-1] != self.degree:
            raise ValueError("determinant polynomial needs degree == matrix size")


def symmetrized_trace(args):
    """``(1/k!) sum_sigma tr(X_s1 ... X_sk)``; complex result."""
    k = len(args)
    if k == 1:
        return np.trace(args[0], axis1=-2, axis2=-1)
    total = 0
    # cyclicity of the trace: fix the first slot and permute the rest
    first, rest = args[0], args[1:]
    for perm in itertools.permutations(range(k - 1)):
        prod = first
        for j in perm:
            prod = prod @ rest[j]
        total = total + np.trace(prod, axis1=-2, axis2=-1)
    return total / math.factorial(k - 1)


def mixed_discriminant(args):
    """Polarization of ``det`` on k x k matrices via inclusion-exclusion:

    ``D(X_1..X_k) = (1/k!) sum_S (-1)^{k-|S|} det(sum_{i in S} X_i)``.
    """
    k = len(args)
    if args[0].shape[-1] != k:
        raise ValueError("determinant polynomial needs degree == matrix size")
    total = 0
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            total = total + (-1) ** (k - size) * np.linalg.det(sum(args[i] for i in S))
    return total / math.factorial(k)


def trace_product_map(m: int, normalization: complex = 1.0):
    """Non-symmetric multilinear map ``c * tr(X_1 ... X_m)``, for use in wedges."""

    def f(*args):
        if len(args) != m:
            raise ValueError(f"expected {m} arguments")
        prod = args[0]
        for a in args[1:]:
            prod = prod @ a
        return (normalization * np.trace(prod, axis1=-2, axis2=-1)).real

    f.arity = m
    return f


def ad_invariance_residual(f: WeilPolynomial, samples: int, algebra: Algebra = SU2, seed: int = 0) -> float:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        g = random_group(algebra, rng)
        Xs = [algebra.random(rng) for _ in range(f.degree)]
        before = f.polarized(*Xs)
        after = f.polarized(*[adjoint_action(g, X) for X in Xs])
        worst = max(worst, abs(float(after - before)))
    return worst


PI2 = np.pi**2

REGISTRY = {
    "c2_su2": (WeilPolynomial(2, "trace_power", 1 / (8 * PI2), "c2_su2"), SU2),
    "det_su2": (WeilPolynomial(2, "determinant", 1 / (4 * PI2), "det_su2"), SU2),
    "c1_u1": (WeilPolynomial(1, "trace_power", 1j / (2 * np.pi), "c1_u1"), U1),
}


def get_polynomial(key: str) -> WeilPolynomial:
    try:
        return REGISTRY[key][0]
    except KeyError:
        raise KeyError(f"unknown polynomial {key!r}; known: {sorted(REGISTRY)}") from None
