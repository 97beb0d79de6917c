"""Connections on the trivial bundle T^n x G, gauge action and the Coulomb projector.

Conventions (fixed once, every downstream identity is tested against them):

* gauge action ``phi . A = phi A phi^{-1} - (d phi) phi^{-1}``;
* curvature ``F_A = dA + 1/2 [A ^ A]``;
* the orbit direction generated by ``X`` is ``d_A X = dX + [A, X]``, which is
  ``d/dt|_0 exp(-tX) . A`` (the fundamental vector field of ``X``);
* ``<a, b> = -sum tr(a b) * cell volume`` and ``d_A^*`` is its exact adjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .forms import LieValuedForm, TorusGrid, bracket_wedge, exterior_derivative, trig_field
from .lie import SU2, U1, Algebra, adjoint_action, commutator, dagger, matrix_exp


class SolverError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


def _check_connection(A: LieValuedForm):
    if A.algebra is None or A.degree != 1:
        raise ValueError("a connection is a Lie-valued 1-form")


# ---------------------------------------------------------------------------
# gauge transformations


class GaugeTransform:
    """A field of unitary matrices together with its right Maurer-Cartan form
    ``R = (d phi) phi^{-1}``.

    ``R`` is computed with the grid derivative unless supplied.  Products and
    inverses update ``R`` with the exact cocycle rule, so the discrete gauge
    action is a group action to rounding error.
    """

    def __init__(self, grid: TorusGrid, values, algebra: Algebra = SU2, current: LieValuedForm | None = None):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.sizes + (algebra.k, algebra.k):
            raise ValueError("gauge transform values have the wrong shape")
        err = np.max(np.abs(values @ dagger(values) - np.eye(algebra.k)))
        if err > 1e-10:
            raise ValueError(f"gauge transform is not unitary (error {err:.2e})")
        values.setflags(write=False)
        self.grid = grid
        self.algebra = algebra
        self.values = values
        self._current = current

    @property
    def current(self) -> LieValuedForm:
        if self._current is None:
            phinv = dagger(self.values)
            comps = [self.grid.partial(self.values, i) @ phinv for i in range(self.grid.dim)]
            data = np.stack(comps)
            # project onto the algebra: removes O(h^4) Hermitian drift of the FD derivative
            data = 0.5 * (data - dagger(data))
            if self.algebra.name == "su2":
                tr = np.trace(data, axis1=-2, axis2=-1) / 2
                data = data - tr[..., None, None] * np.eye(2)
            self._current = LieValuedForm(self.grid, 1, data, self.algebra, check=False)
        return self._current

    @classmethod
    def identity(cls, grid, algebra=SU2):
        vals = np.broadcast_to(np.eye(algebra.k, dtype=complex), grid.sizes + (algebra.k, algebra.k)).copy()
        return cls(grid, vals, algebra, LieValuedForm.zeros(grid, 1, algebra))

    @classmethod
    def constant(cls, grid, g, algebra=SU2):
        g = np.asarray(g, dtype=complex)
        vals = np.broadcast_to(g, grid.sizes + g.shape).copy()
        return cls(grid, vals, algebra, LieValuedForm.zeros(grid, 1, algebra))

    @classmethod
    def exp(cls, X: LieValuedForm) -> "GaugeTransform":
        if X.degree != 0 or X.algebra is None:
            raise ValueError("exp needs a Lie-valued 0-form")
        return cls(X.grid, matrix_exp(X.data[0], X.algebra), X.algebra)

    def __matmul__(self, other: "GaugeTransform") -> "GaugeTransform":
        if other.grid != self.grid or other.algebra != self.algebra:
            raise ValueError("gauge transforms on different spaces")
        vals = self.values @ other.values
        cur = self.current.data + adjoint_action(self.values, other.current.data)
        return GaugeTransform(self.grid, vals, self.algebra,
                              LieValuedForm(self.grid, 1, cur, self.algebra, check=False))

    def inverse(self) -> "GaugeTransform":
        inv = dagger(self.values)
        cur = -adjoint_action(inv, self.current.data)
        return GaugeTransform(self.grid, inv, self.algebra,
                              LieValuedForm(self.grid, 1, cur, self.algebra, check=False))

    def left_current(self) -> LieValuedForm:
        """``phi^{-1} d phi``, consistent with :attr:`current`."""
        inv = dagger(self.values)
        return LieValuedForm(self.grid, 1, adjoint_action(inv, self.current.data), self.algebra, check=False)


def band_limited_gauge(grid: TorusGrid, rng: np.random.Generator, algebra: Algebra = SU2,
                       factors: int = 3, max_winding: int = 1) -> GaugeTransform:
    """Random smooth gauge map that is an exact trigonometric polynomial.

    Products of ``exp(2 pi m x_i u)`` with ``u^2 = -1`` and random constant
    group elements; Fourier differentiation is exact on such maps.
    """
    x = grid.coords()
    vals = np.broadcast_to(_random_unit_group(algebra, rng), grid.sizes + (algebra.k, algebra.k)).copy()
    for _ in range(factors):
        axis = int(rng.integers(grid.dim))
        m = int(rng.integers(1, max_winding + 1)) * int(rng.choice([-1, 1]))
        u = _random_unit_generator(algebra, rng)
        theta = 2 * np.pi * m * x[axis]
        factor = np.cos(theta)[..., None, None] * np.eye(algebra.k) + np.sin(theta)[..., None, None] * u
        vals = vals @ factor @ _random_unit_group(algebra, rng)
    return GaugeTransform(grid, vals, algebra)


def _random_unit_generator(algebra, rng):
    if algebra.k == 1:
        return np.array([[1j]])
    if algebra.name != "su2":
        raise NotImplementedError("band-limited maps are implemented for u1 and su2")
    n = rng.standard_normal(3)
    n /= np.linalg.norm(n)
    from .lie import PAULI

    return 1j * np.tensordot(n, PAULI, axes=1)


def _random_unit_group(algebra, rng):
    from .lie import random_group

    return random_group(algebra, rng)


def gauge_act(phi: GaugeTransform, A: LieValuedForm) -> LieValuedForm:
    _check_connection(A)
    if phi.grid != A.grid or phi.algebra != A.algebra:
        raise ValueError("gauge transform and connection live on different spaces")
    data = adjoint_action(phi.values, A.data) - phi.current.data
    return LieValuedForm(A.grid, 1, data, A.algebra, check=False)


def adjoint_form(phi: GaugeTransform, omega: LieValuedForm) -> LieValuedForm:
    """Pointwise ``phi omega phi^{-1}``."""
    return LieValuedForm(omega.grid, omega.degree, adjoint_action(phi.values, omega.data), omega.algebra, check=False)


def pure_gauge(phi: GaugeTransform) -> LieValuedForm:
    """``phi . 0 = -(d phi) phi^{-1}``."""
    return -phi.current


# ---------------------------------------------------------------------------
# connection calculus


def curvature(A: LieValuedForm) -> LieValuedForm:
    _check_connection(A)
    return exterior_derivative(A) + 0.5 * bracket_wedge(A, A)


def covariant_derivative(A: LieValuedForm, omega: LieValuedForm) -> LieValuedForm:
    """``d_A omega = d omega + [A ^ omega]``."""
    _check_connection(A)
    return exterior_derivative(omega) + bracket_wedge(A, omega)


def infinitesimal_action(X: LieValuedForm, A: LieValuedForm) -> LieValuedForm:
    """Orbit direction ``d_A X`` of the infinitesimal gauge transformation ``X``."""
    if X.degree != 0:
        raise ValueError("X must be a Lie-valued 0-form")
    return covariant_derivative(A, X)


def bianchi_residual(A: LieValuedForm) -> LieValuedForm:
    return covariant_derivative(A, curvature(A))


def codifferential(A: LieValuedForm, a: LieValuedForm) -> LieValuedForm:
    """``d_A^* a = -sum_i (D_i a_i + [A_i, a_i])``, the exact adjoint of ``d_A`` on 0-forms."""
    _check_connection(A)
    if a.degree != 1 or a.grid != A.grid:
        raise ValueError("codifferential takes a 1-form on the connection's grid")
    grid = A.grid
    out = np.zeros(a.data.shape[1:], complex)
    for i in range(grid.dim):
        out -= grid.partial(a.data[i], i) + commutator(A.data[i], a.data[i])
    return LieValuedForm(grid, 0, out[None], A.algebra, check=False)


def laplacian0(A: LieValuedForm, X: LieValuedForm) -> LieValuedForm:
    return codifferential(A, infinitesimal_action(X, A))


# ---------------------------------------------------------------------------
# Coulomb connection


def _sparse_partial(grid: TorusGrid, axis: int) -> sp.csr_matrix:
    N = grid.sizes[axis]
    if grid.method == "fd4":
        h = grid.spacing[axis]
        D1 = sp.diags(
            [8, -8, -1, 1, 8, -8, -1, 1],
            [1, -1, 2, -2, 1 - N, N - 1, 2 - N, N - 2],
            shape=(N, N),
        ) / (12 * h)
        D1 = sp.csr_matrix(D1)
    else:
        D1 = sp.csr_matrix(TorusGrid((N,), "spectral").partial(np.eye(N), 0).real)
    mats = [sp.identity(n, format="csr") for n in grid.sizes]
    mats[axis] = D1
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def covariant_derivative_matrix(A: LieValuedForm) -> sp.csr_matrix:
    """Sparse matrix of ``X -> d_A X`` in orthonormal algebra coordinates.

    Rows are ordered ``(axis, site, coordinate)``, columns ``(site, coordinate)``.
    """
    _check_connection(A)
    grid, alg = A.grid, A.algebra
    B = alg.basis()
    dimg, P = len(B), grid.npoints
    blocks = []
    for i in range(grid.dim):
        D = sp.kron(_sparse_partial(grid, i), sp.identity(dimg), format="csr")
        Ai = A.data[i].reshape(P, alg.k, alg.k)
        # coordinates of [A_i, e_b] along e_a: -Re tr([A_i, e_b] e_a)
        ad = np.einsum("pij,bjk,aki->pab", Ai, B, B).real - np.einsum("bij,pjk,aki->pab", B, Ai, B).real
        blocks.append(D - sp.block_diag(list(ad), format="csr"))
    return sp.vstack(blocks, format="csr")


@dataclass
class CGResult:
    solution: np.ndarray
    iterations: int
    residual: float


def conjugate_gradient(apply, b, project=None, rtol=1e-10, max_iter=None) -> CGResult:
    """Plain CG for a symmetric positive semi-definite operator on flat real vectors.

    ``project`` (optional) removes kernel components; it is applied to the
    right-hand side, every residual and the final iterate.
    """
    proj = project if project is not None else (lambda v: v)
    b = proj(b)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0:
        return CGResult(x, 0, 0.0)
    if max_iter is None:
        # CG terminates in at most n steps in exact arithmetic; allow that on small systems
        max_iter = max(int(10 * math.sqrt(b.size)), min(b.size, 5000))
    r = b.copy()
    p = r.copy()
    rr = r @ r
    for it in range(1, max_iter + 1):
        Ap = apply(p)
        alpha = rr / (p @ Ap)
        x += alpha * p
        r = proj(r - alpha * Ap)
        rr_new = r @ r
        if math.sqrt(rr_new) <= rtol * bnorm:
            x = proj(x)
            true_res = np.linalg.norm(proj(b - apply(x))) / bnorm
            return CGResult(x, it, float(true_res))
        p = r + (rr_new / rr) * p
        rr = rr_new
    res = np.linalg.norm(proj(b - apply(x))) / bnorm
    raise SolverError(f"CG did not converge in {max_iter} iterations", float(res))


class CoulombSolver:
    """Inverts ``Delta_A = d_A^* d_A`` on the orthogonal complement of its kernel.

    The kernel (covariantly constant sections of the discrete operator,
    including the checkerboard modes of the central stencil) is detected
    numerically from the smallest eigenpairs of the assembled operator.
    """

    def __init__(self, A: LieValuedForm, kernel_tol: float = 1e-8, rtol: float = 1e-10, max_iter=None):
        _check_connection(A)
        self.A = A
        self.rtol = rtol
        self.max_iter = max_iter
        self.kernel_tol = kernel_tol
        self.kernel = self._detect_kernel()

    @property
    def algebra(self):
        return self.A.algebra

    def _to_vec(self, X: LieValuedForm) -> np.ndarray:
        return self.algebra.to_coords(X.data[0]).ravel()

    def _from_vec(self, v) -> LieValuedForm:
        grid = self.A.grid
        coords = v.reshape(grid.sizes + (self.algebra.dim,))
        return LieValuedForm(grid, 0, self.algebra.from_coords(coords)[None], self.algebra, check=False)

    def _detect_kernel(self) -> np.ndarray:
        grid = self.A.grid
        dimg = self.algebra.dim
        n = grid.npoints * dimg
        M = covariant_derivative_matrix(self.A)
        L = (M.T @ M).tocsc()
        nev = min(dimg * 2**grid.dim + 4, n - 2)
        if n <= 600:
            vals, vecs = np.linalg.eigh(L.toarray())
            vals, vecs = vals[:nev], vecs[:, :nev]
        else:
            rng = np.random.default_rng(12345)
            vals, vecs = eigsh(L, k=nev, sigma=-1.0, which="LM", v0=rng.standard_normal(n))
        keep = vals < self.kernel_tol
        Q = vecs[:, keep]
        if Q.shape[1]:
            Q, _ = np.linalg.qr(Q)
        self.kernel_eigenvalues = np.sort(vals)
        return Q

    def project(self, v):
        Q = self.kernel
        if Q.shape[1] == 0:
            return v
        return v - Q @ (Q.T @ v)

    def kernel_orthogonal(self, X: LieValuedForm) -> LieValuedForm:
        return self._from_vec(self.project(self._to_vec(X)))

    def _apply(self, v):
        return self._to_vec(laplacian0(self.A, self._from_vec(v)))

    def solve(self, rhs: LieValuedForm) -> LieValuedForm:
        res = conjugate_gradient(self._apply, self._to_vec(rhs), self.project, self.rtol, self.max_iter)
        self.last_result = res
        return self._from_vec(res.solution)

    def vertical(self, a: LieValuedForm) -> LieValuedForm:
        """The Coulomb connection form ``G_A d_A^* a``."""
        return self.solve(codifferential(self.A, a))

    def horizontal(self, a: LieValuedForm) -> LieValuedForm:
        return a - infinitesimal_action(self.vertical(a), self.A)


def coulomb_vertical(A: LieValuedForm, a: LieValuedForm) -> LieValuedForm:
    return CoulombSolver(A).vertical(a)


def horizontal_project(A: LieValuedForm, a: LieValuedForm) -> LieValuedForm:
    return CoulombSolver(A).horizontal(a)


def random_connection(grid: TorusGrid, algebra: Algebra, rng: np.random.Generator, fmax: int = 3,
                      amplitude: float = 1.0) -> LieValuedForm:
    from .forms import random_form

    return random_form(grid, 1, algebra, rng, fmax, amplitude)


def random_gauge_parameter(grid: TorusGrid, algebra: Algebra, rng: np.random.Generator, fmax: int = 3,
                           amplitude: float = 1.0) -> LieValuedForm:
    from .forms import random_form

    return random_form(grid, 0, algebra, rng, fmax, amplitude)


__all__ = [
    "GaugeTransform", "SolverError", "CoulombSolver", "band_limited_gauge", "gauge_act", "adjoint_form",
    "pure_gauge", "curvature", "covariant_derivative", "infinitesimal_action", "bianchi_residual",
    "codifferential", "laplacian0", "coulomb_vertical", "horizontal_project", "conjugate_gradient",
    "covariant_derivative_matrix", "random_connection", "random_gauge_parameter", "U1", "SU2",
]
