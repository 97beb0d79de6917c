"""Lie-algebra- and scalar-valued differential forms on flat periodic tori.

A p-form on T^n is stored as one grid field per strictly increasing
multi-index ``I`` (lexicographic order), so ``data`` has shape
``(binom(n, p), N_1, ..., N_n)`` for scalar forms and
``(binom(n, p), N_1, ..., N_n, k, k)`` for Lie-algebra-valued ones.

Derivatives are 4th-order periodic central differences (default) or exact
Fourier differentiation.  Both are antisymmetric and mutually commuting
along different axes, which makes ``d o d = 0`` and the discrete Stokes
theorem hold up to rounding.
"""
from __future__ import annotations

import itertools
import json
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .lie import Algebra, algebra_from_tag, commutator, trace_product

METHODS = ("fd4", "spectral")


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on ``[0, 1)^n``."""

    sizes: tuple
    method: str = "fd4"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not 1 <= len(sizes) <= 4:
            raise ValueError("torus dimension must be 1..4")
        if min(sizes) < 8:
            raise ValueError("need at least 8 points per axis")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")

    @classmethod
    def cube(cls, n: int, N: int, method: str = "fd4") -> "TorusGrid":
        return cls((N,) * n, method)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def spacing(self) -> tuple:
        return tuple(1.0 / N for N in self.sizes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    def coords(self) -> list:
        axes = [np.arange(N) / N for N in self.sizes]
        return np.meshgrid(*axes, indexing="ij")

    def with_method(self, method: str) -> "TorusGrid":
        return TorusGrid(self.sizes, method)

    def partial(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Derivative along ``axis`` of an array whose leading axes are the grid."""
        h = self.spacing[axis]
        if self.method == "fd4":
            fp1 = np.roll(f, -1, axis)
            fm1 = np.roll(f, 1, axis)
            fp2 = np.roll(f, -2, axis)
            fm2 = np.roll(f, 2, axis)
            return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
        N = self.sizes[axis]
        k = np.fft.fftfreq(N, d=1.0 / N)
        if N % 2 == 0:
            k[N // 2] = 0.0  # keeps the operator antisymmetric
        shape = [1] * f.ndim
        shape[axis] = N
        ik = (2j * np.pi * k).reshape(shape)
        out = np.fft.ifft(ik * np.fft.fft(f, axis=axis), axis=axis)
        return out if np.iscomplexobj(f) else out.real


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple:
    return tuple(itertools.combinations(range(n), p))


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def shuffle_terms(n: int, degrees: tuple) -> tuple:
    """For a wedge of forms of the given degrees, list
    ``(out_index, (in_index_1, ...), sign)`` over all disjoint splittings."""
    total = sum(degrees)
    if total > n:
        raise ValueError("degree overflow")
    out_pos = {I: j for j, I in enumerate(multi_indices(n, total))}
    pos = [{I: j for j, I in enumerate(multi_indices(n, p))} for p in degrees]
    terms = []

    def rec(slot, used, chosen):
        if slot == len(degrees):
            concat = [i for I in chosen for i in I]
            K = tuple(sorted(concat))
            terms.append((out_pos[K], tuple(pos[s][I] for s, I in enumerate(chosen)), _perm_sign(concat)))
            return
        free = [i for i in range(n) if i not in used]
        for I in itertools.combinations(free, degrees[slot]):
            rec(slot + 1, used | set(I), chosen + [I])

    rec(0, frozenset(), [])
    return tuple(sorted(terms))


class LieValuedForm:
    """A p-form on a torus grid with Lie-algebra (``algebra`` set) or real scalar values."""

    def __init__(self, grid: TorusGrid, degree: int, data, algebra: Algebra | None = None, check: bool = True):
        if not 0 <= degree <= grid.dim:
            raise ValueError(f"degree {degree} invalid on T^{grid.dim}")
        ncomp = math.comb(grid.dim, degree)
        if algebra is None:
            data = np.asarray(data, dtype=float)
            expected = (ncomp,) + grid.sizes
        else:
            data = np.asarray(data, dtype=complex)
            expected = (ncomp,) + grid.sizes + (algebra.k, algebra.k)
        if data.shape != expected:
            raise ValueError(f"data shape {data.shape} != expected {expected}")
        if check and algebra is not None:
            algebra.check(data, tol=1e-10)
        data.setflags(write=False)
        self.grid = grid
        self.degree = degree
        self.data = data
        self.algebra = algebra

    # -- construction helpers
    @classmethod
    def zeros(cls, grid, degree, algebra=None):
        ncomp = math.comb(grid.dim, degree)
        tail = () if algebra is None else (algebra.k, algebra.k)
        dtype = float if algebra is None else complex
        return cls(grid, degree, np.zeros((ncomp,) + grid.sizes + tail, dtype), algebra, check=False)

    @classmethod
    def from_components(cls, grid, degree, components: dict, algebra=None):
        """Build from ``{multi_index: field}``; missing components are zero."""
        out = cls.zeros(grid, degree, algebra).data.copy()
        index = {I: j for j, I in enumerate(multi_indices(grid.dim, degree))}
        for I, field in components.items():
            I = tuple(I)
            if tuple(sorted(I)) != I or len(set(I)) != len(I):
                raise ValueError(f"multi-index {I} must be strictly increasing")
            out[index[I]] = np.broadcast_to(field, out.shape[1:])
        return cls(grid, degree, out, algebra)

    def _like(self, data, degree=None, check=False):
        return LieValuedForm(self.grid, self.degree if degree is None else degree, data, self.algebra, check=check)

    @property
    def value_kind(self) -> str:
        return "scalar" if self.algebra is None else "lie"

    @property
    def indices(self) -> tuple:
        return multi_indices(self.grid.dim, self.degree)

    def component(self, I) -> np.ndarray:
        return self.data[self.indices.index(tuple(I))]

    def _compatible(self, other):
        if not isinstance(other, LieValuedForm):
            return NotImplemented
        if other.grid != self.grid or other.degree != self.degree or other.algebra != self.algebra:
            raise ValueError("forms live on different spaces")
        return True

    def __add__(self, other):
        self._compatible(other)
        return self._like(self.data + other.data)

    def __sub__(self, other):
        self._compatible(other)
        return self._like(self.data - other.data)

    def __mul__(self, s):
        return self._like(float(s) * self.data)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self._like(self.data / float(s))

    def __neg__(self):
        return self._like(-self.data)

    def inner(self, other) -> float:
        """Flat L2 pairing; ``-sum tr(a b) * cell volume`` for Lie-valued forms."""
        self._compatible(other)
        if self.algebra is None:
            val = np.sum(self.data * other.data)
        else:
            val = -np.sum(trace_product(self.data, other.data))
        return float(val) * self.grid.cell_volume

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data), initial=0.0))

    def __repr__(self):
        kind = "scalar" if self.algebra is None else self.algebra.tag
        return f"LieValuedForm(T^{self.grid.dim} {self.grid.sizes}, degree={self.degree}, {kind})"


# ---------------------------------------------------------------------------
# calculus


def exterior_derivative(omega: LieValuedForm) -> LieValuedForm:
    grid, p = omega.grid, omega.degree
    if p >= grid.dim:
        raise ValueError("cannot differentiate a top-degree form")
    out_index = {J: j for j, J in enumerate(multi_indices(grid.dim, p + 1))}
    out = np.zeros((len(out_index),) + omega.data.shape[1:], omega.data.dtype)
    for c, I in enumerate(omega.indices):
        for axis in range(grid.dim):
            if axis in I:
                continue
            J = tuple(sorted(I + (axis,)))
            sign = (-1) ** J.index(axis)
            out[out_index[J]] += sign * grid.partial(omega.data[c], axis)
    return omega._like(out, degree=p + 1)


def _wedge(forms: Sequence[LieValuedForm], combine: Callable, algebra) -> LieValuedForm:
    grid = forms[0].grid
    for w in forms[1:]:
        if w.grid != grid:
            raise ValueError("forms live on different grids")
    degrees = tuple(w.degree for w in forms)
    total = sum(degrees)
    if total > grid.dim:
        raise ValueError(f"degree overflow: {total} > {grid.dim}")
    out = None
    for K, ins, sign in shuffle_terms(grid.dim, degrees):
        val = combine(*[w.data[i] for w, i in zip(forms, ins)])
        if out is None:
            out = np.zeros((math.comb(grid.dim, total),) + val.shape, val.dtype)
        out[K] += sign * val
    if out is None:
        tail = () if algebra is None else (algebra.k, algebra.k)
        out = np.zeros((math.comb(grid.dim, total),) + grid.sizes + tail)
    return LieValuedForm(grid, total, out, algebra, check=False)


def multilinear_wedge(f, *forms: LieValuedForm) -> LieValuedForm:
    """``f(w_1 ^ ... ^ w_m)`` as a real scalar form.

    ``f`` is any pointwise multilinear map of ``m`` arrays returning real
    arrays (a :class:`WeilPolynomial` or a fixed map).
    """
    arity = getattr(f, "arity", None)
    if arity is not None and arity != len(forms):
        raise ValueError(f"map takes {arity} arguments, got {len(forms)} forms")
    return _wedge(forms, lambda *xs: np.asarray(f(*xs), dtype=float), None)


def wedge(omega: LieValuedForm, eta: LieValuedForm) -> LieValuedForm:
    """Scalar wedge product."""
    if omega.algebra is not None or eta.algebra is not None:
        raise ValueError("wedge is for scalar forms; use multilinear_wedge or bracket_wedge")
    return _wedge([omega, eta], lambda x, y: x * y, None)


def bracket_wedge(omega: LieValuedForm, eta: LieValuedForm) -> LieValuedForm:
    """``[omega ^ eta]`` for Lie-valued forms."""
    if omega.algebra is None or eta.algebra is None:
        raise ValueError("bracket_wedge needs Lie-valued forms")
    if omega.algebra != eta.algebra:
        raise ValueError("algebra mismatch")
    return _wedge([omega, eta], commutator, omega.algebra)


def product_wedge(omega: LieValuedForm, eta: LieValuedForm) -> LieValuedForm:
    """Matrix product wedge ``omega ^ eta`` (result in gl(k), not checked)."""
    return _wedge([omega, eta], lambda x, y: x @ y, omega.algebra)


def scale_by_function(omega: LieValuedForm, g: np.ndarray) -> LieValuedForm:
    """Multiply every component by a real grid function."""
    g = np.asarray(g, dtype=float)
    if omega.algebra is not None:
        g = g[..., None, None]
    return omega._like(omega.data * g)


def integrate(omega: LieValuedForm) -> float:
    """Midpoint/trapezoidal rule for a top-degree scalar form (unit torus)."""
    if omega.algebra is not None:
        raise ValueError("only scalar forms can be integrated")
    if omega.degree != omega.grid.dim:
        raise ValueError(f"need a degree-{omega.grid.dim} form, got degree {omega.degree}")
    # numpy's contiguous sum is a fixed pairwise tree: deterministic
    return float(np.sum(np.ascontiguousarray(omega.data[0]).ravel())) * omega.grid.cell_volume


def constant_form(grid: TorusGrid, coefficients: dict, degree: int | None = None) -> LieValuedForm:
    """Scalar form with constant coefficients ``{(i, j, ...): c}`` (0-based axes)."""
    if degree is None:
        degree = len(next(iter(coefficients))) if coefficients else 0
    comps = {}
    for I, c in coefficients.items():
        I = tuple(I)
        if len(I) != degree:
            raise ValueError("mixed degrees in constant form")
        order = sorted(range(len(I)), key=lambda j: I[j])
        J = tuple(I[j] for j in order)
        comps[J] = comps.get(J, 0.0) + _perm_sign(order) * float(c)
    return LieValuedForm.from_components(grid, degree, comps)


def parse_constant_form(grid: TorusGrid, text: str) -> LieValuedForm:
    """Parse ``"1"``, ``"dx1^dx2"`` or ``"dx1^dx2 + dx3^dx4"`` (1-based axes, optional
    numeric prefactors such as ``"2*dx1^dx2"``)."""
    text = text.replace(" ", "")
    if not any(ch == "d" for ch in text):
        return LieValuedForm(grid, 0, np.full((1,) + grid.sizes, float(text)))
    coeffs = {}
    for term in text.replace("-", "+-").split("+"):
        if not term:
            continue
        c = 1.0
        if "*" in term:
            c_str, term = term.split("*", 1)
            c = float(c_str)
        elif term.startswith("-"):
            c, term = -1.0, term[1:]
        factors = term.split("^")
        idx = []
        for fac in factors:
            if not fac.startswith("dx"):
                raise ValueError(f"cannot parse factor {fac!r}")
            idx.append(int(fac[2:]) - 1)
        if len(set(idx)) != len(idx):
            continue
        coeffs[tuple(idx)] = coeffs.get(tuple(idx), 0.0) + c
    return constant_form(grid, coeffs)


# ---------------------------------------------------------------------------
# band-limited random fields


def frequency_vectors(n: int, fmax: int) -> np.ndarray:
    """Integer frequency vectors with ``1 <= |k|_1 <= fmax``, one per +/- pair."""
    ks = []
    for k in itertools.product(range(-fmax, fmax + 1), repeat=n):
        if 0 < sum(abs(x) for x in k) <= fmax and k > tuple(-x for x in k):
            ks.append(k)
    return np.array(ks, dtype=int).reshape(-1, n)


def trig_field(grid: TorusGrid, rng: np.random.Generator, tail=(), fmax: int = 3, amplitude: float = 1.0,
               constant: bool = True) -> np.ndarray:
    """Real trigonometric polynomial of total frequency <= fmax, shape ``sizes + tail``."""
    ks = frequency_vectors(grid.dim, fmax)
    nterms = len(ks) + (1 if constant else 0)
    scale = amplitude / math.sqrt(max(nterms, 1))
    x = grid.coords()
    out = np.zeros(grid.sizes + tuple(tail))
    if constant:
        out += scale * rng.standard_normal(tuple(tail))
    for k in ks:
        phase = 2 * np.pi * sum(ki * xi for ki, xi in zip(k, x))
        a = scale * rng.standard_normal(tuple(tail))
        b = scale * rng.standard_normal(tuple(tail))
        exp = (slice(None),) * grid.dim + (None,) * len(tail)
        out += np.cos(phase)[exp] * a + np.sin(phase)[exp] * b
    return out


def random_form(grid: TorusGrid, degree: int, algebra: Algebra | None, rng: np.random.Generator,
                fmax: int = 3, amplitude: float = 1.0, constant: bool = True) -> LieValuedForm:
    ncomp = math.comb(grid.dim, degree)
    if algebra is None:
        data = np.stack([trig_field(grid, rng, (), fmax, amplitude, constant) for _ in range(ncomp)])
        return LieValuedForm(grid, degree, data)
    comps = [algebra.from_coords(trig_field(grid, rng, (algebra.dim,), fmax, amplitude, constant))
             for _ in range(ncomp)]
    return LieValuedForm(grid, degree, np.stack(comps), algebra)


# ---------------------------------------------------------------------------
# binary dump

MAGIC = b"GFFIELD1"


def dump_form(omega: LieValuedForm, fh) -> None:
    """Write ``MAGIC | uint32 header length | JSON header | complex128 LE payload``."""
    header = {
        "dim": omega.grid.dim,
        "sizes": list(omega.grid.sizes),
        "method": omega.grid.method,
        "degree": omega.degree,
        "algebra": "scalar" if omega.algebra is None else omega.algebra.tag,
        "shape": list(omega.data.shape),
        "dtype": "<c16",
        "order": "C",
    }
    raw = json.dumps(header, sort_keys=True).encode()
    fh.write(MAGIC)
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)
    fh.write(np.ascontiguousarray(omega.data, dtype="<c16").tobytes())


def load_form(fh) -> LieValuedForm:
    if fh.read(len(MAGIC)) != MAGIC:
        raise ValueError("not a gaugeforms field dump")
    (length,) = struct.unpack("<I", fh.read(4))
    header = json.loads(fh.read(length))
    count = int(np.prod(header["shape"]))
    data = np.frombuffer(fh.read(16 * count), dtype="<c16").reshape(header["shape"])
    grid = TorusGrid(tuple(header["sizes"]), header.get("method", "fd4"))
    if header["algebra"] == "scalar":
        return LieValuedForm(grid, header["degree"], data.real.copy())
    return LieValuedForm(grid, header["degree"], data.copy(), algebra_from_tag(header["algebra"]))


def save_form(omega: LieValuedForm, path) -> None:
    with open(path, "wb") as fh:
        dump_form(omega, fh)


def read_form(path) -> LieValuedForm:
    with open(path, "rb") as fh:
        return load_form(fh)
