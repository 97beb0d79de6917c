"""Matrix Lie algebra and group kernels for u(1), su(2) and u(k).

Algebra elements are anti-Hermitian complex matrices (no factors of ``i``
are stripped), so ``tr(X @ X)`` is real and non-positive.  Everything here
works on stacked arrays of shape ``(..., k, k)`` so that grid fields can use
the same code as single elements.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

TOL = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class Algebra:
    """A matrix Lie algebra tag: ``u1``, ``su2`` or ``uk`` with matrix size ``k``."""

    name: str
    k: int

    def __post_init__(self):
        if self.name == "u1" and self.k != 1:
            raise ValueError("u1 is 1x1")
        if self.name == "su2" and self.k != 2:
            raise ValueError("su2 is 2x2")
        if self.name not in ("u1", "su2", "uk"):
            raise ValueError(f"unknown algebra {self.name!r}")

    @property
    def tag(self) -> str:
        return self.name if self.name != "uk" else f"uk({self.k})"

    @property
    def dim(self) -> int:
        return len(self.basis())

    def basis(self) -> np.ndarray:
        """Basis orthonormal for ``<X, Y> = -tr(XY)``."""
        if self.name == "u1":
            return np.array([[[1j]]])
        if self.name == "su2":
            return -1j * PAULI / np.sqrt(2)
        k = self.k
        out = []
        for a in range(k):
            e = np.zeros((k, k), complex)
            e[a, a] = 1j
            out.append(e)
        for a in range(k):
            for b in range(a + 1, k):
                e = np.zeros((k, k), complex)
                e[a, b], e[b, a] = 1, -1
                out.append(e / np.sqrt(2))
                e = np.zeros((k, k), complex)
                e[a, b], e[b, a] = 1j, 1j
                out.append(e / np.sqrt(2))
        return np.array(out)

    def from_coords(self, coords) -> np.ndarray:
        """Map real coordinates ``(..., dim)`` to matrices ``(..., k, k)``."""
        coords = np.asarray(coords, dtype=float)
        return np.tensordot(coords, self.basis(), axes=([-1], [0]))

    def to_coords(self, X) -> np.ndarray:
        B = self.basis()
        return -np.einsum("...ij,aji->...a", X, B).real

    def random(self, rng: np.random.Generator, shape=(), scale=1.0) -> np.ndarray:
        return self.from_coords(scale * rng.standard_normal(tuple(shape) + (self.dim,)))

    def check(self, X, tol=TOL) -> None:
        X = np.asarray(X)
        if X.shape[-2:] != (self.k, self.k):
            raise ValueError(f"expected {self.k}x{self.k} matrices for {self.tag}")
        scale = max(1.0, float(np.max(np.abs(X), initial=0.0)))
        if np.max(np.abs(X + dagger(X)), initial=0.0) > tol * scale:
            raise ValueError("algebra element is not anti-Hermitian")
        if self.name == "su2" and np.max(np.abs(np.trace(X, axis1=-2, axis2=-1)), initial=0.0) > tol * scale:
            raise ValueError("su2 element is not traceless")


U1 = Algebra("u1", 1)
SU2 = Algebra("su2", 2)


def uk(k: int) -> Algebra:
    return Algebra("uk", k)


def algebra_from_tag(tag: str) -> Algebra:
    if tag == "u1":
        return U1
    if tag == "su2":
        return SU2
    if tag.startswith("uk(") and tag.endswith(")"):
        return uk(int(tag[3:-1]))
    raise ValueError(f"unknown algebra tag {tag!r}")


def su2_basis() -> np.ndarray:
    """The basis ``e_i = -(i/2) sigma_i`` with ``[e_1, e_2] = e_3``."""
    return -0.5j * PAULI


# ---------------------------------------------------------------------------
# array kernels


def dagger(X):
    return np.conj(np.swapaxes(X, -1, -2))


def commutator(X, Y):
    return X @ Y - Y @ X


def adjoint_action(g, X):
    """``g X g^{-1}`` for unitary ``g``."""
    g, X = np.asarray(g), np.asarray(X)
    if g.shape[-1] == 1:
        # abelian: Ad is the identity, skip the rounding of g x conj(g)
        return np.broadcast_to(X, np.broadcast_shapes(g.shape, X.shape)).copy()
    return g @ X @ dagger(g)


def real_trace(X):
    return np.trace(X, axis1=-2, axis2=-1).real


def trace_product(X, Y):
    """Pointwise ``Re tr(X Y)`` without forming the full product."""
    return np.einsum("...ij,...ji->...", X, Y).real


def su2_exp(X):
    """Closed form ``exp`` on su(2): ``cos|x| + sin|x|/|x| X`` with ``X^2 = -|x|^2``."""
    X = np.asarray(X, dtype=complex)
    # for traceless anti-Hermitian 2x2, X^2 = det(X) I and det(X) = |x|^2 >= 0
    theta2 = (X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]).real
    theta = np.sqrt(np.maximum(theta2, 0.0))
    small = theta < 1e-4
    safe = np.where(small, 1.0, theta)
    sinc = np.where(small, 1 - theta2 / 6 + theta2**2 / 120, np.sin(safe) / safe)
    eye = np.eye(2)
    return np.cos(theta)[..., None, None] * eye + sinc[..., None, None] * X


def matrix_exp(X, algebra: Algebra | None = None):
    """Group exponential of stacked algebra elements."""
    X = np.asarray(X, dtype=complex)
    k = X.shape[-1]
    if k == 1:
        return np.exp(X)
    if k == 2 and (algebra is None or algebra.name == "su2"):
        tr = np.trace(X, axis1=-2, axis2=-1)
        if algebra is not None or np.max(np.abs(tr), initial=0.0) < 1e-14:
            return su2_exp(X)
    if X.ndim == 2:
        return expm(X)
    flat = X.reshape(-1, k, k)
    return np.array([expm(m) for m in flat]).reshape(X.shape)


def series_exp(X, terms=30):
    """Truncated power series; reference oracle for the closed forms."""
    X = np.asarray(X, dtype=complex)
    out = np.broadcast_to(np.eye(X.shape[-1], dtype=complex), X.shape).copy()
    term = out.copy()
    for n in range(1, terms):
        term = term @ X / n
        out = out + term
    return out


# ---------------------------------------------------------------------------
# single elements


@dataclass(frozen=True)
class AlgElem:
    entries: np.ndarray
    algebra: Algebra = field(default=SU2)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        self.algebra.check(entries)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def tag(self) -> str:
        return self.algebra.tag

    def __add__(self, other):
        _same(self, other)
        return AlgElem(self.entries + other.entries, self.algebra)

    def __sub__(self, other):
        _same(self, other)
        return AlgElem(self.entries - other.entries, self.algebra)

    def __mul__(self, s):
        return AlgElem(float(s) * self.entries, self.algebra)

    __rmul__ = __mul__

    def __neg__(self):
        return AlgElem(-self.entries, self.algebra)


@dataclass(frozen=True)
class GrpElem:
    entries: np.ndarray
    algebra: Algebra = field(default=SU2)

    def __post_init__(self):
        g = np.array(self.entries, dtype=complex)
        k = self.algebra.k
        if g.shape != (k, k):
            raise ValueError(f"expected a {k}x{k} matrix")
        if np.max(np.abs(g @ dagger(g) - np.eye(k))) > TOL * 10:
            raise ValueError("group element is not unitary")
        if self.algebra.name == "su2" and abs(np.linalg.det(g) - 1) > TOL * 10:
            raise ValueError("su2 group element must have unit determinant")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    def __matmul__(self, other):
        _same(self, other)
        return GrpElem(self.entries @ other.entries, self.algebra)

    def inverse(self):
        return GrpElem(dagger(self.entries), self.algebra)

    @classmethod
    def identity(cls, algebra: Algebra = SU2):
        return cls(np.eye(algebra.k), algebra)


def _same(x, y):
    if x.algebra != y.algebra:
        raise ValueError(f"algebra mismatch: {x.algebra.tag} vs {y.algebra.tag}")


def bracket(X: AlgElem, Y: AlgElem) -> AlgElem:
    _same(X, Y)
    return AlgElem(commutator(X.entries, Y.entries), X.algebra)


def group_exp(X: AlgElem) -> GrpElem:
    return GrpElem(matrix_exp(X.entries, X.algebra), X.algebra)


def adjoint(g: GrpElem, X: AlgElem) -> AlgElem:
    _same(g, X)
    return AlgElem(adjoint_action(g.entries, X.entries), X.algebra)


def trace_pairing(X: AlgElem, Y: AlgElem) -> float:
    """``Re tr(X Y)``; unnormalized, negative semi-definite on the diagonal."""
    _same(X, Y)
    return float(trace_product(X.entries, Y.entries))


def random_group(algebra: Algebra, rng: np.random.Generator, shape=(), scale=np.pi):
    return matrix_exp(algebra.random(rng, shape, scale), algebra)
