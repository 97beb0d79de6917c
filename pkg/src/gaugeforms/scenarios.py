"""Built-in end-to-end scenarios.

Besides the torus scenarios this module holds two self-contained pieces:

* the Dirac monopole of charge ``n`` on S^2, written analytically on two polar
  caps and integrated by Gauss-Legendre quadrature;
* the descriptor ``(c2, sigma^{n-1}/(n-1)!)`` on T^{2n} whose 2-form on the
  space of connections is the Atiyah-Bott symplectic form.

Every scenario is a list of named checks.  A check function receives the
resolved configuration and its own random generator and returns an
:class:`~gaugeforms.report.Outcome`; the runner applies tolerances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chern_simons import (DegreeMapSpec, cs_action, cs_descriptor, cs_shift_residual, degree_oracle,
                           horizontality_residual, make_degree_map, winding_number)
from .forms import (LieValuedForm, TorusGrid, constant_form, exterior_derivative, integrate,
                    multilinear_wedge, parse_constant_form, random_form, wedge)
from .gauge import (CoulombSolver, GaugeTransform, adjoint_form, band_limited_gauge, bianchi_residual,
                    codifferential, curvature, gauge_act, infinitesimal_action, pure_gauge,
                    random_connection, random_gauge_parameter)
from .lie import SU2, U1, algebra_from_tag
from .report import Condition, Convergence, Outcome
from .spaceforms import (CharFormDescriptor, evaluate_C, evaluate_C_sharp, gauge_invariance_residual,
                         moment_pairing, richardson_derivative, transgression_residual, value_scale)
from .weil import REGISTRY, get_polynomial

FOUR_PI2 = 4 * np.pi**2

# ---------------------------------------------------------------------------
# monopole on S^2
#
# North cap (theta < pi):  A_N = -i n/2 (1 - cos theta) dphi
# South cap (theta > 0):   A_S = +i n/2 (1 + cos theta) dphi
# On the overlap A_N = A_S - (dg) g^{-1} with clutching g = exp(i n phi), i.e.
# A_N is the gauge transform of A_S by g, and both give
#     F = -i n/2 sin(theta) dtheta ^ dphi,
# so (i/2pi) F = n/(4pi) sin(theta) dtheta ^ dphi integrates to n.


def monopole_potential(n: int, theta, chart: str):
    """``dphi``-coefficient of the anti-Hermitian u(1) connection on one cap."""
    theta = np.asarray(theta, dtype=float)
    if chart == "north":
        return -0.5j * n * (1 - np.cos(theta))
    if chart == "south":
        return 0.5j * n * (1 + np.cos(theta))
    raise ValueError(f"unknown chart {chart!r}")


def monopole_curvature(n: int, theta, chart: str):
    """``dtheta ^ dphi``-coefficient: the theta-derivative of the potential."""
    theta = np.asarray(theta, dtype=float)
    if chart == "north":
        return -0.5j * n * np.sin(theta)
    if chart == "south":
        return -0.5j * n * np.sin(theta)
    raise ValueError(f"unknown chart {chart!r}")


def _gl(a, b, m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def monopole_chern_number(n: int, quad_points: int = 64) -> float:
    """``int c_1(F)`` over S^2, each cap integrated on its own chart."""
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    c1, _ = REGISTRY["c1_u1"]
    total = 0.0
    ph, wph = _gl(0.0, 2 * np.pi, quad_points)
    for chart, (a, b) in (("north", (0.0, np.pi / 2)), ("south", (np.pi / 2, np.pi))):
        th, wth = _gl(a, b, quad_points)
        T, _ = np.meshgrid(th, ph, indexing="ij")
        F = monopole_curvature(n, T, chart)[..., None, None]
        dens = c1.evaluate(F)
        total += float(np.einsum("i,j,ij->", wth, wph, dens))
    return total


def monopole_overlap_residual(n: int, samples: int = 16) -> float:
    """Largest mismatch of the clutching relation and of the curvature on the overlap."""
    th = np.linspace(0.2, np.pi - 0.2, samples)
    ph = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    T, P = np.meshgrid(th, ph, indexing="ij")
    g = np.exp(1j * n * P)
    dg = 1j * n * g  # d/dphi of the clutching function
    shifted = monopole_potential(n, T, "south") - dg / g
    r1 = np.max(np.abs(monopole_potential(n, T, "north") - shifted))
    r2 = np.max(np.abs(monopole_curvature(n, T, "north") - monopole_curvature(n, T, "south")))
    return float(max(r1, r2))


# ---------------------------------------------------------------------------
# symplectic descriptor


def standard_symplectic_form(grid: TorusGrid) -> LieValuedForm:
    if grid.dim % 2:
        raise ValueError("need an even-dimensional torus")
    return constant_form(grid, {(2 * j, 2 * j + 1): 1.0 for j in range(grid.dim // 2)})


def symplectic_descriptor(n_pairs: int, grid: TorusGrid, polynomial: str = "c2_su2") -> CharFormDescriptor:
    """``(f, sigma^{n-1}/(n-1)!)`` on T^{2n}; its ``C`` is a 2-form on connections."""
    if n_pairs < 1 or grid.dim != 2 * n_pairs:
        raise ValueError(f"grid dimension {grid.dim} != 2 * n_pairs = {2 * n_pairs}")
    f = get_polynomial(polynomial)
    if f.degree != 2:
        raise ValueError("the symplectic descriptor needs a quadratic polynomial")
    beta = LieValuedForm(grid, 0, np.ones((1,) + grid.sizes))
    if n_pairs > 1:
        sigma = standard_symplectic_form(grid)
        for _ in range(n_pairs - 1):
            beta = wedge(beta, sigma)
        beta = beta / math.factorial(n_pairs - 1)
    return CharFormDescriptor(f, beta)


def gram_matrix(desc: CharFormDescriptor, A: LieValuedForm, probes) -> np.ndarray:
    if desc.q != 2:
        raise ValueError("gram_matrix needs a 2-form descriptor")
    m = len(probes)
    G = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                G[i, j] = evaluate_C(desc, A, [probes[i], probes[j]])
    return G


def nondegeneracy(G: np.ndarray):
    """``(antisymmetry residual, smallest/largest singular value)`` of a Gram matrix."""
    s = np.linalg.svd(G, compute_uv=False)
    anti = float(np.max(np.abs(G + G.T)) / max(np.max(np.abs(G)), 1e-300))
    return anti, float(s[-1] / max(s[0], 1e-300))


# ---------------------------------------------------------------------------
# registered descriptors (used by the gauge-invariance sweep)


@dataclass(frozen=True)
class DescriptorEntry:
    dim: int
    algebra: str
    build: Callable[[TorusGrid], CharFormDescriptor]
    note: str = ""


def _simple(poly: str, beta: str):
    return lambda grid: CharFormDescriptor(get_polynomial(poly), parse_constant_form(grid, beta))


DESCRIPTORS = {
    "atiyah_bott_t2": DescriptorEntry(2, "su2", lambda g: symplectic_descriptor(1, g), "c2, beta = 1, q = 2"),
    "det_t2": DescriptorEntry(2, "su2", _simple("det_su2", "1"), "det, beta = 1, q = 2"),
    "chern_t2": DescriptorEntry(2, "u1", _simple("c1_u1", "1"), "c1, beta = 1, q = 0"),
    "chern_dx3_t3": DescriptorEntry(3, "u1", _simple("c1_u1", "dx3"), "c1, beta = dx3, q = 0"),
    "cs_t3": DescriptorEntry(3, "su2", cs_descriptor, "det, beta = 1, q = 1"),
    "symplectic_t4": DescriptorEntry(4, "su2", lambda g: symplectic_descriptor(2, g), "c2, beta = sigma, q = 2"),
    "instanton_t4": DescriptorEntry(4, "su2", _simple("c2_su2", "1"), "c2, beta = 1, q = 0"),
}


# ---------------------------------------------------------------------------
# hand-coded oracles (deliberately independent of the forms module)


def _hand_partial(f, axis, N, method):
    h = 1.0 / N
    if method == "fd4":
        return (8 * (np.roll(f, -1, axis) - np.roll(f, 1, axis))
                - (np.roll(f, -2, axis) - np.roll(f, 2, axis))) / (12 * h)
    k = np.fft.fftfreq(N, d=1.0 / N) * 2 * np.pi
    k[N // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = N
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)


def hand_symplectic_t2(a: np.ndarray, b: np.ndarray) -> float:
    """``1/4pi^2 int tr(a ^ b)`` on T^2 from raw ``(2, N, N, k, k)`` arrays."""
    N = a.shape[1]
    prod = np.einsum("xyij,xyji->xy", a[0], b[1]) - np.einsum("xyij,xyji->xy", a[1], b[0])
    return float(prod.real.sum()) / N**2 / FOUR_PI2


def hand_moment_t2(A: np.ndarray, X: np.ndarray, method: str) -> float:
    """``-1/4pi^2 int tr(X F_A)`` on T^2 with F_12 built by hand."""
    N = A.shape[1]
    F = (_hand_partial(A[1], 0, N, method) - _hand_partial(A[0], 1, N, method)
         + A[0] @ A[1] - A[1] @ A[0])
    return -float(np.einsum("xyij,xyji->xy", X, F).real.sum()) / N**2 / FOUR_PI2


def hand_symplectic_t4(a: np.ndarray, b: np.ndarray) -> float:
    """``1/4pi^2 int tr(a ^ b) ^ (dx1^dx2 + dx3^dx4)`` on T^4."""
    N = a.shape[1]

    def ab(i, j):
        return (np.einsum("...ij,...ji->...", a[i], b[j]) - np.einsum("...ij,...ji->...", a[j], b[i])).real

    top = ab(0, 1) + ab(2, 3)
    return float(top.sum()) / N**4 / FOUR_PI2


# ---------------------------------------------------------------------------
# scenario plumbing


@dataclass(frozen=True)
class CheckSpec:
    id: str
    fn: Callable
    tolerance: float
    criterion: int | None = None
    summary: str = ""


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    checks: tuple
    sweep: Callable | None = None
    sweep_min_order: float = 3.0
    sweep_label: str = ""

    def check_ids(self):
        return [c.id for c in self.checks]


def _grid(cfg, sizes=None, method=None) -> TorusGrid:
    return TorusGrid(tuple(sizes or cfg.sizes), method or cfg.method)


def _algebra(cfg):
    return algebra_from_tag(cfg.group)


def _rel(x, scale):
    return abs(x) / max(abs(scale), 1e-300)


# --- monopole ----------------------------------------------------------------


def check_monopole(cfg, rng):
    q = int(cfg.params["quad_points"])
    vals = {n: monopole_chern_number(n, q) for n in cfg.params["charges"]}
    err = max(abs(v - n) for n, v in vals.items())
    return Outcome(err, value={str(n): v for n, v in vals.items()},
                   expected={str(n): float(n) for n in vals}, details={"quad_points": q})


def check_monopole_overlap(cfg, rng):
    r = max(monopole_overlap_residual(n) for n in cfg.params["charges"])
    return Outcome(r, details={"samples": 16})


def sweep_monopole(cfg, N, rng):
    return max(abs(monopole_chern_number(n, N) - n) for n in cfg.params["charges"])


# --- Atiyah-Bott on T^2 -------------------------------------------------------


def _t2_fields(cfg, grid, rng):
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    a = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    b = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    X = random_gauge_parameter(grid, alg, rng, cfg.fmax, cfg.amplitude)
    return A, a, b, X


def check_calibration_anchor(cfg, rng):
    grid = _grid(cfg, sizes=cfg.params["anchor_sizes"])
    A, a, b, X = _t2_fields(cfg, grid, rng)
    desc = symplectic_descriptor(1, grid, cfg.polynomial)
    C = evaluate_C(desc, A, [a, b])
    C_hand = hand_symplectic_t2(a.data, b.data)
    m = moment_pairing(A, X)
    m_hand = hand_moment_t2(A.data, X.data[0], grid.method)
    sharp0 = evaluate_C_sharp(desc, A, X, [])
    r_C, r_m, r_s = _rel(C - C_hand, C_hand), _rel(m - m_hand, m_hand), _rel(sharp0 - m, m)
    return Outcome(max(r_C, r_m, r_s), value={"C": C, "moment": m, "C_sharp_0": sharp0},
                   expected={"C": C_hand, "moment": m_hand, "C_sharp_0": m},
                   details={"rel_C": r_C, "rel_moment": r_m, "rel_sharp": r_s, "sizes": list(grid.sizes)})


def check_moment_identity(cfg, rng):
    grid = _grid(cfg)
    A, a, _, X = _t2_fields(cfg, grid, rng)
    desc = symplectic_descriptor(1, grid, cfg.polynomial)
    step = float(cfg.params["fd_step"])
    d1, d2, _ = richardson_derivative(lambda B: moment_pairing(B, X), A, a, step)
    rhs = evaluate_C(desc, A, [infinitesimal_action(X, A), a])
    return Outcome(abs(d1 - rhs), value=d1, expected=rhs,
                   conditions=[Condition("richardson_agreement", abs(d1 - d2), float(cfg.params["richardson_tol"]))],
                   details={"step": step, "D_half_step": d2})


def check_moment_equivariance(cfg, rng):
    grid = _grid(cfg, method=cfg.params["exact_method"])
    alg = _algebra(cfg)
    worst, scales = 0.0, []
    for _ in range(int(cfg.params["equivariance_samples"])):
        A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
        X = random_gauge_parameter(grid, alg, rng, cfg.fmax, cfg.amplitude)
        phi = band_limited_gauge(grid, rng, alg)
        before = moment_pairing(A, X)
        after = moment_pairing(gauge_act(phi, A), adjoint_form(phi, X))
        F = curvature(A)
        scale = float(np.sum(np.abs(np.einsum("...ij,...ji->...", X.data[0], F.data[0])))) \
            * grid.cell_volume / FOUR_PI2
        scales.append(scale)
        worst = max(worst, _rel(after - before, scale))
    return Outcome(worst, details={"method": grid.method, "samples": len(scales), "min_scale": min(scales)})


def check_flat_zero_set(cfg, rng):
    grid = _grid(cfg, method=cfg.params["exact_method"])
    alg = _algebra(cfg)
    phi = band_limited_gauge(grid, rng, alg)
    A = pure_gauge(phi)
    X = random_gauge_parameter(grid, alg, rng, cfg.fmax, cfg.amplitude)
    return Outcome(abs(moment_pairing(A, X)), details={"method": grid.method})


def check_extension_property(cfg, rng):
    grid = _grid(cfg)
    A, a, b, _ = _t2_fields(cfg, grid, rng)
    desc = symplectic_descriptor(1, grid, cfg.polynomial)
    zero = LieValuedForm.zeros(grid, 0, _algebra(cfg))
    return Outcome(abs(evaluate_C_sharp(desc, A, zero, [a, b]) - evaluate_C(desc, A, [a, b])))


def sweep_flatness(cfg, N, rng):
    grid = _grid(cfg, sizes=(N,) * len(cfg.sizes))
    phi = band_limited_gauge(grid, rng, _algebra(cfg))
    return curvature(pure_gauge(phi)).norm()


# --- symplectic T^4 ------------------------------------------------------------


def check_symplectic_anchor(cfg, rng):
    grid = _grid(cfg)
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    a = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    b = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    desc = symplectic_descriptor(2, grid, cfg.polynomial)
    C, C_hand = evaluate_C(desc, A, [a, b]), hand_symplectic_t4(a.data, b.data)
    return Outcome(_rel(C - C_hand, C_hand), value=C, expected=C_hand)


def check_symplectic_t2_same_path(cfg, rng):
    grid = TorusGrid.cube(2, int(cfg.params["t2_size"]), cfg.method)
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    a = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    b = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    C = evaluate_C(symplectic_descriptor(1, grid, cfg.polynomial), A, [a, b])
    return Outcome(_rel(C - hand_symplectic_t2(a.data, b.data), C), value=C)


def check_symplectic_nondegenerate(cfg, rng):
    grid = _grid(cfg)
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    probes = [random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
              for _ in range(int(cfg.params["probes"]))]
    G = gram_matrix(symplectic_descriptor(2, grid, cfg.polynomial), A, probes)
    anti, ratio = nondegeneracy(G)
    return Outcome(anti, value=ratio,
                   conditions=[Condition("singular_value_ratio", ratio, float(cfg.params["min_singular_ratio"]), "ge")],
                   details={"probes": len(probes)})


def sweep_symplectic(cfg, N, rng):
    grid = _grid(cfg, sizes=(N,) * 4)
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    a = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    b = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    C, C_hand = evaluate_C(symplectic_descriptor(2, grid, cfg.polynomial), A, [a, b]), hand_symplectic_t4(a.data, b.data)
    return _rel(C - C_hand, C_hand)


# --- Chern-Simons on T^3 -------------------------------------------------------


def _degree_spec(cfg, d, radius=None):
    return DegreeMapSpec(int(d), float(radius if radius is not None else cfg.params["radius"]),
                         tuple(cfg.params["center"]))


def check_cs_shift(cfg, rng):
    alg = _algebra(cfg)
    Ns = list(cfg.resolutions)
    samples = int(cfg.params["samples"])
    seeds = rng.integers(0, 2**32, size=samples)
    curves, finest = [], []
    for d in cfg.params["degrees"]:
        for s, seed in enumerate(seeds):
            res = []
            for N in Ns:
                grid = _grid(cfg, sizes=(N, N, N))
                A = random_connection(grid, alg, np.random.default_rng(int(seed)), cfg.fmax, cfg.amplitude)
                res.append(cs_shift_residual(A, make_degree_map(_degree_spec(cfg, d), grid)))
            curves.append(Convergence(f"cs_shift d={d} sample={s}", Ns, res))
            finest.append(res[-1])
    orders = [c.order for c in curves]
    worst_order = min(o for o in orders if o != "exact") if any(o != "exact" for o in orders) else "exact"
    return Outcome(max(finest), conditions=[Condition("fitted_order_min", worst_order,
                                                      float(cfg.params["min_order"]), "ge")],
                   convergence=curves, details={"resolution": Ns[-1]})


def check_winding(cfg, rng):
    N = int(cfg.params["winding_size"])
    grid = TorusGrid.cube(3, N, cfg.method)
    radius = float(cfg.params["winding_radius"])
    vals, oracle = {}, {}
    for d in cfg.params["winding_degrees"]:
        phi = make_degree_map(_degree_spec(cfg, d, radius), grid)
        vals[str(d)] = winding_number(phi)
        oracle[str(d)] = degree_oracle(phi)
    err = max(abs(vals[k] - oracle[k]) for k in vals)
    mismatch = sum(int(oracle[k] != int(k)) for k in vals)
    return Outcome(err, value=vals, expected=oracle,
                   conditions=[Condition("oracle_mismatches", mismatch, 0, "eq")],
                   details={"size": N, "radius": radius})


def check_horizontality(cfg, rng):
    N = int(cfg.params["horizontality_size"])
    grid = TorusGrid.cube(3, N, cfg.params["exact_method"])
    alg = _algebra(cfg)
    worst = 0.0
    for _ in range(int(cfg.params["horizontality_samples"])):
        A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
        X = random_gauge_parameter(grid, alg, rng, cfg.fmax, cfg.amplitude)
        val, scale = horizontality_residual(A, X, get_polynomial(cfg.polynomial))
        worst = max(worst, _rel(val, scale))
    return Outcome(worst, details={"size": N, "method": grid.method})


def check_degree_additivity(cfg, rng):
    grid = TorusGrid.cube(3, int(cfg.params["winding_size"]), cfg.method)
    r = float(cfg.params["additivity_radius"])
    p1 = make_degree_map(DegreeMapSpec(1, r, (0.25, 0.25, 0.25)), grid)
    p2 = make_degree_map(DegreeMapSpec(1, r, (0.75, 0.75, 0.75)), grid)
    phi = p1 @ p2
    w = winding_number(phi)
    o = degree_oracle(phi)
    return Outcome(abs(w - 2.0), value=w, expected=2.0, conditions=[Condition("oracle", o, 2, "eq")])


def check_cs_small_gauge(cfg, rng):
    grid = TorusGrid.cube(3, int(cfg.params["small_gauge_size"]), cfg.params["exact_method"])
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    X = random_gauge_parameter(grid, alg, rng, 2, 0.5)
    phi = GaugeTransform.exp(X)
    return Outcome(abs(cs_action(gauge_act(phi, A)) - cs_action(A)), details={"method": grid.method})


def sweep_cs_shift(cfg, N, rng):
    grid = _grid(cfg, sizes=(N, N, N))
    A = random_connection(grid, _algebra(cfg), rng, cfg.fmax, cfg.amplitude)
    return cs_shift_residual(A, make_degree_map(_degree_spec(cfg, cfg.params["sweep_degree"]), grid))


# --- transgression on T^4 -------------------------------------------------------


def check_transgression(cfg, rng):
    alg = _algebra(cfg)
    f = get_polynomial(cfg.polynomial)
    Ns = list(cfg.resolutions)
    seed = int(rng.integers(0, 2**32))
    pts, gaps = [], []
    for N in Ns:
        grid = _grid(cfg, sizes=(N,) * 4)
        r = np.random.default_rng(seed)
        A0 = random_connection(grid, alg, r, cfg.fmax, cfg.amplitude)
        A1 = random_connection(grid, alg, r, cfg.fmax, cfg.amplitude)
        res = transgression_residual(f, A0, A1, int(cfg.params["t_nodes"]))
        pts.append(res.pointwise)
        gaps.append(res.integral_gap)
    cv = Convergence("transgression pointwise", Ns, pts)
    return Outcome(max(gaps), conditions=[Condition("fitted_order", cv.order, float(cfg.params["min_order"]), "ge")],
                   convergence=[cv], details={"integral_gaps": gaps})


def sweep_transgression(cfg, N, rng):
    grid = _grid(cfg, sizes=(N,) * 4)
    alg = _algebra(cfg)
    A0 = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    A1 = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    return transgression_residual(get_polynomial(cfg.polynomial), A0, A1, int(cfg.params["t_nodes"])).pointwise


# --- Coulomb projector on T^2 -----------------------------------------------------


def _coulomb_case(A, X, a):
    solver = CoulombSolver(A)
    Y = solver.kernel_orthogonal(X)
    dY = infinitesimal_action(Y, A)
    recovered = solver.vertical(dY)
    rec = (recovered - Y).norm() / max(Y.norm(), 1e-300)
    hor = solver.horizontal(dY).norm() / max(dY.norm(), 1e-300)
    lhs, rhs = infinitesimal_action(X, A).inner(a), X.inner(codifferential(A, a))
    adj = abs(lhs - rhs) / max(abs(lhs), infinitesimal_action(X, A).norm() * a.norm(), 1e-300)
    return rec, hor, adj, solver.kernel.shape[1]


def check_coulomb(cfg, rng):
    grid = _grid(cfg)
    alg = _algebra(cfg)
    A = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    X = random_gauge_parameter(grid, alg, rng, cfg.fmax, cfg.amplitude)
    a = random_connection(grid, alg, rng, cfg.fmax, cfg.amplitude)
    cases = {"random": _coulomb_case(A, X, a),
             "zero": _coulomb_case(LieValuedForm.zeros(grid, 1, alg), X, a)}
    rec = max(c[0] for c in cases.values())
    hor = max(c[1] for c in cases.values())
    adj = max(c[2] for c in cases.values())
    return Outcome(rec, conditions=[Condition("horizontal_of_orbit", hor, float(cfg.params["horizontal_tol"])),
                                    Condition("adjointness", adj, float(cfg.params["adjoint_tol"]))],
                   details={k: {"recovery": v[0], "horizontal": v[1], "adjoint": v[2], "kernel_dim": v[3]}
                            for k, v in cases.items()})


# --- calculus ----------------------------------------------------------------


def _d2_and_stokes(rng, fmax):
    d2, stokes = 0.0, 0.0
    for n, N in ((2, 32), (3, 16), (4, 8)):
        for method in ("fd4", "spectral"):
            grid = TorusGrid.cube(n, N, method)
            for alg in (None, SU2):
                for p in range(n):
                    w = random_form(grid, p, alg, rng, min(fmax, N // 8 + 1))
                    dw = exterior_derivative(w)
                    if p <= n - 2:
                        dd = exterior_derivative(dw)
                        d2 = max(d2, dd.max_abs() / max(dw.max_abs() * (2 * np.pi * N), 1e-300))
                    if p == n - 1 and alg is None:
                        stokes = max(stokes, abs(integrate(dw)) / max(np.sum(np.abs(dw.data)) * grid.cell_volume, 1e-300))
    return d2, stokes


def leibniz_residual(grid, rng, fmax):
    f = get_polynomial("c2_su2")
    a = random_form(grid, 1, SU2, rng, fmax)
    b = random_form(grid, 1, SU2, rng, fmax)
    lhs = exterior_derivative(multilinear_wedge(f, a, b))
    rhs = multilinear_wedge(f, exterior_derivative(a), b) - multilinear_wedge(f, a, exterior_derivative(b))
    return (lhs - rhs).norm()


def _gauge_invariance_all(rng, fmax):
    worst = {}
    sizes = {2: 32, 3: 24, 4: 12}
    for name, entry in DESCRIPTORS.items():
        grid = TorusGrid.cube(entry.dim, sizes[entry.dim], "spectral")
        alg = algebra_from_tag(entry.algebra)
        fm = 1 if entry.dim == 4 else fmax
        factors = 1 if entry.dim == 4 else 2
        desc = entry.build(grid)
        A = random_connection(grid, alg, rng, fm)
        args = [random_connection(grid, alg, rng, fm) for _ in range(desc.q)]
        phi = band_limited_gauge(grid, rng, alg, factors=factors)
        scale = value_scale(desc, A, args)
        worst[name] = _rel(gauge_invariance_residual(desc, A, phi, args), scale)
    return worst


def check_calculus(cfg, rng):
    seed = int(rng.integers(0, 2**32))
    d2, stokes = _d2_and_stokes(np.random.default_rng(seed), cfg.fmax)
    Ns = list(cfg.resolutions)
    leib, bian = [], []
    for N in Ns:
        grid = TorusGrid.cube(3, N, "fd4")
        r = np.random.default_rng(seed + 1)
        leib.append(leibniz_residual(grid, r, cfg.params["refinement_fmax"]))
        A = random_connection(grid, SU2, np.random.default_rng(seed + 2), cfg.params["refinement_fmax"])
        bian.append(bianchi_residual(A).norm())
    cl, cb = Convergence("leibniz", Ns, leib), Convergence("bianchi", Ns, bian)
    gi = _gauge_invariance_all(np.random.default_rng(seed + 3), cfg.fmax)
    min_order = float(cfg.params["min_order"])
    return Outcome(max(d2, stokes), conditions=[
        Condition("leibniz_order", cl.order, min_order, "ge"),
        Condition("bianchi_order", cb.order, min_order, "ge"),
        Condition("gauge_invariance_worst", max(gi.values()), float(cfg.params["gauge_invariance_tol"])),
    ], convergence=[cl, cb], details={"d_squared": d2, "stokes": stokes, "gauge_invariance": gi})


def sweep_bianchi(cfg, N, rng):
    grid = TorusGrid.cube(3, N, cfg.method)
    return bianchi_residual(random_connection(grid, SU2, rng, cfg.params["refinement_fmax"])).norm()


# --- determinism ------------------------------------------------------------------


def check_determinism(cfg, rng):
    from .runner import ScenarioConfig, run_suite

    target = cfg.params["target"]
    base = ScenarioConfig.from_dict({"scenario": target, "seed": cfg.seed})
    texts = [run_suite(base, threads=int(t)).to_json(include_threads=False) for t in cfg.params["threads"]]
    mismatches = sum(int(t != texts[0]) for t in texts[1:])
    return Outcome(float(mismatches), value=len(texts[0]),
                   details={"target": target, "threads": list(cfg.params["threads"])})


# ---------------------------------------------------------------------------
# registry

SCENARIOS = {}


def register(s: Scenario) -> Scenario:
    SCENARIOS[s.name] = s
    return s


register(Scenario(
    "monopole", "Chern number of the charge-n monopole on S^2 from two analytic charts",
    {"group": "u1", "polynomial": "c1_u1", "grid": {"sizes": [16, 16], "method": "fd4"},
     "resolutions": [16, 24, 32],
     "params": {"charges": [-2, -1, 0, 1, 2, 3], "quad_points": 64}},
    (CheckSpec("monopole_chern", check_monopole, 1e-8, 9, "c_1 = n for n in -2..3"),
     CheckSpec("monopole_overlap", check_monopole_overlap, 1e-12, None, "clutching relation on the overlap")),
    sweep_monopole, 3.0, "quadrature error vs points per axis"))

register(Scenario(
    "atiyah_bott_t2", "Symplectic form, moment map and equivariant extension on T^2 for SU(2)",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [32, 32], "method": "fd4"},
     "resolutions": [16, 24, 32],
     "params": {"anchor_sizes": [64, 64], "fd_step": 1e-4, "richardson_tol": 1e-8,
                "equivariance_samples": 20, "exact_method": "spectral"}},
    (CheckSpec("calibration_anchor", check_calibration_anchor, 1e-10, 1, "C(a,b) and m_A(X) against hand quadrature"),
     CheckSpec("moment_map_identity", check_moment_identity, 1e-6, 2, "D_a <m, X> = C(d_A X, a)"),
     CheckSpec("moment_equivariance", check_moment_equivariance, 1e-10, 3, "<m_{phi.A}, Ad X> = <m_A, X>"),
     CheckSpec("flat_zero_set", check_flat_zero_set, 1e-8, None, "m vanishes on pure gauge"),
     CheckSpec("extension_property", check_extension_property, 1e-15, None, "C#(0) = C")),
    sweep_flatness, 3.5, "curvature of pure gauge"))

register(Scenario(
    "symplectic_t4", "Atiyah-Bott form on T^4 from beta = sigma",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [8, 8, 8, 8], "method": "fd4"},
     "resolutions": [8, 10, 12], "fmax": 1,
     "params": {"t2_size": 32, "probes": 6, "min_singular_ratio": 1e-6}},
    (CheckSpec("symplectic_anchor_t4", check_symplectic_anchor, 1e-10, None, "C against wedge quadrature"),
     CheckSpec("symplectic_t2_reduction", check_symplectic_t2_same_path, 1e-10, None, "n = 1 gives the T^2 anchor"),
     CheckSpec("symplectic_nondegenerate", check_symplectic_nondegenerate, 1e-12, None, "antisymmetric, full rank")),
    sweep_symplectic, 3.0, "anchor error"))

register(Scenario(
    "cs_t3", "Chern-Simons gauge-shift law and winding numbers on T^3",
    {"group": "su2", "polynomial": "det_su2", "grid": {"sizes": [48, 48, 48], "method": "fd4"},
     "resolutions": [24, 32, 48],
     "params": {"degrees": [-1, 1, 2], "samples": 3, "radius": 0.35, "center": [0.5, 0.5, 0.5],
                "min_order": 3.0, "winding_degrees": [-2, -1, 0, 1, 2, 3], "winding_size": 48,
                "winding_radius": 0.45, "horizontality_size": 32, "horizontality_samples": 10,
                "exact_method": "spectral", "additivity_radius": 0.4, "small_gauge_size": 24,
                "sweep_degree": 1}},
    (CheckSpec("cs_gauge_shift", check_cs_shift, 5e-3, 4, "|CS(phi.A) - CS(A) + S(phi)|"),
     CheckSpec("winding_quantization", check_winding, 5e-3, 5, "S(phi) against the preimage count"),
     CheckSpec("horizontality", check_horizontality, 1e-8, 6, "C_A(d_A X) = 0 relative to scale"),
     CheckSpec("degree_additivity", check_degree_additivity, 1e-2, None, "two disjoint bumps give 2"),
     CheckSpec("cs_small_gauge", check_cs_small_gauge, 1e-6, None, "CS invariant under exp(X)")),
    sweep_cs_shift, 3.0, "cs_shift residual"))

register(Scenario(
    "transgression_t4", "Transgression of c_2 between two connections on T^4",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [12, 12, 12, 12], "method": "fd4"},
     "resolutions": [12, 16, 24], "fmax": 1,
     "params": {"t_nodes": 2, "min_order": 3.5}},
    (CheckSpec("transgression", check_transgression, 1e-10, 7, "integral gap; pointwise order"),),
    sweep_transgression, 3.5, "pointwise transgression residual"))

register(Scenario(
    "coulomb_t2", "Coulomb connection G_A d_A^* and horizontal projector on T^2",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [32, 32], "method": "fd4"},
     "resolutions": [16, 24, 32],
     "params": {"horizontal_tol": 1e-8, "adjoint_tol": 1e-11}},
    (CheckSpec("coulomb_projector", check_coulomb, 1e-8, 8, "recovery, horizontality, adjointness"),),
    None))

register(Scenario(
    "calculus", "Discrete exterior calculus: d^2, Stokes, Leibniz, Bianchi, gauge invariance",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [16, 16, 16], "method": "fd4"},
     "resolutions": [16, 24, 32],
     "params": {"refinement_fmax": 2, "min_order": 3.5, "gauge_invariance_tol": 1e-10}},
    (CheckSpec("calculus_exactness", check_calculus, 1e-12, 10, "d^2 = 0, Stokes; orders; invariance"),),
    sweep_bianchi, 3.5, "Bianchi residual"))

register(Scenario(
    "determinism", "Byte-identical reports across thread counts",
    {"group": "su2", "polynomial": "c2_su2", "grid": {"sizes": [32, 32], "method": "fd4"},
     "resolutions": [16, 24, 32],
     "params": {"target": "atiyah_bott_t2", "threads": [1, 4, 8]}},
    (CheckSpec("determinism", check_determinism, 0.0, 11, "identical report bytes"),),
    None))


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}") from None


def criteria_map() -> dict:
    """Acceptance criterion number -> (scenario, check id)."""
    out = {}
    for s in SCENARIOS.values():
        for c in s.checks:
            if c.criterion is not None:
                if c.criterion in out:
                    raise RuntimeError(f"criterion {c.criterion} mapped twice")
                out[c.criterion] = (s.name, c.id)
    return dict(sorted(out.items()))
