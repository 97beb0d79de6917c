import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugeforms.chern_simons import cs_descriptor
from gaugeforms.forms import LieValuedForm, TorusGrid, parse_constant_form, random_form
from gaugeforms.gauge import band_limited_gauge, curvature
from gaugeforms.lie import PAULI, SU2, U1
from gaugeforms.scenarios import hand_moment_t2, hand_symplectic_t2, hand_symplectic_t4, symplectic_descriptor
from gaugeforms.spaceforms import (CharFormDescriptor, cartan_closedness_residual, directional_derivative,
                                   evaluate_C, evaluate_C_sharp, gauge_invariance_residual, moment_pairing,
                                   richardson_derivative, transgression_residual, value_scale)
from gaugeforms.weil import get_polynomial


def _t2(N=16, method="fd4"):
    g = TorusGrid.cube(2, N, method)
    return g, symplectic_descriptor(1, g)


def test_weights_by_hand():
    _, d = _t2(8)
    assert d.q == 2 and d.k == 2
    assert d.weight(0, 2) == 2  # pairs with 1/8pi^2 to give 1/4pi^2
    assert d.weight(1, 0) == -2
    assert d.x_degree(2) == 0 and d.x_degree(0) == 1 and d.x_degree(1) is None and d.x_degree(4) is None
    g3 = TorusGrid.cube(4, 8)
    d4 = CharFormDescriptor(get_polynomial("c2_su2"), parse_constant_form(g3, "1"))
    assert d4.q == 0 and d4.x_degree(0) == 0 and d4.weight(0, 0) == 1


def test_symplectic_anchor_against_hand_code(rng):
    g, d = _t2(16)
    A, a, b = (random_form(g, 1, SU2, rng, 3) for _ in range(3))
    val = evaluate_C(d, A, [a, b])
    assert abs(val - hand_symplectic_t2(a.data, b.data)) <= 1e-12 * value_scale(d, A, [a, b])


def test_symplectic_t4_anchor(rng):
    g = TorusGrid.cube(4, 8)
    d = symplectic_descriptor(2, g)
    A, a, b = (random_form(g, 1, SU2, rng, 1) for _ in range(3))
    val = evaluate_C(d, A, [a, b])
    assert abs(val - hand_symplectic_t4(a.data, b.data)) <= 1e-12 * value_scale(d, A, [a, b])


def test_antisymmetry_and_linearity(rng):
    g, d = _t2(12)
    A, a, b, c = (random_form(g, 1, SU2, rng, 2) for _ in range(4))
    assert abs(evaluate_C(d, A, [a, b]) + evaluate_C(d, A, [b, a])) < 1e-14
    lhs = evaluate_C(d, A, [a + c * 2.0, b])
    rhs = evaluate_C(d, A, [a, b]) + 2 * evaluate_C(d, A, [c, b])
    assert abs(lhs - rhs) < 1e-13


def test_extension_property(rng):
    g, d = _t2(12)
    A, a, b = (random_form(g, 1, SU2, rng, 2) for _ in range(3))
    X = random_form(g, 0, SU2, rng, 2)
    zero = LieValuedForm.zeros(g, 0, SU2)
    assert evaluate_C_sharp(d, A, zero, [a, b]) == evaluate_C(d, A, [a, b])
    # the X-independent top piece does not see X at all
    assert evaluate_C_sharp(d, A, X, [a, b]) == evaluate_C(d, A, [a, b])
    assert evaluate_C_sharp(d, A, X, [a]) == 0.0  # odd degree is inadmissible
    assert evaluate_C_sharp(d, A, zero, []) == 0.0


def test_q_above_k_vanishes(rng):
    g = TorusGrid.cube(2, 8)
    d = CharFormDescriptor(get_polynomial("c2_su2"), parse_constant_form(g, "dx1^dx2"))
    assert d.q == 4
    args = [random_form(g, 1, SU2, rng) for _ in range(4)]
    assert evaluate_C(d, random_form(g, 1, SU2, rng), args) == 0.0


@pytest.mark.parametrize("method", ["fd4", "spectral"])
def test_moment_against_hand_code(method, rng):
    g, d = _t2(16, method)
    A = random_form(g, 1, SU2, rng, 3)
    X = random_form(g, 0, SU2, rng, 3)
    m = evaluate_C_sharp(d, A, X, [])
    assert m == pytest.approx(moment_pairing(A, X), abs=1e-14)
    assert m == pytest.approx(hand_moment_t2(A.data, X.data[0], method), abs=1e-12)


def test_moment_analytic_value():
    g = TorusGrid.cube(2, 16, "spectral")
    x, _ = g.coords()
    T = 1j * PAULI[2]
    c = 0.7
    A = LieValuedForm.from_components(g, 1, {(1,): c * np.sin(2 * np.pi * x)[..., None, None] * T}, SU2)
    X = LieValuedForm(g, 0, (np.cos(2 * np.pi * x)[..., None, None] * T)[None], SU2)
    # F = 2 pi c cos dx^dy T, tr(T T) = -2, int cos^2 = 1/2
    assert moment_pairing(A, X) == pytest.approx(c / (2 * np.pi), abs=1e-14)


def test_moment_needs_surface(rng):
    g = TorusGrid.cube(3, 8)
    with pytest.raises(ValueError):
        moment_pairing(random_form(g, 1, SU2, rng), random_form(g, 0, SU2, rng))


def test_chern_t2_vanishes(rng):
    g = TorusGrid.cube(2, 16)
    d = CharFormDescriptor(get_polynomial("c1_u1"), parse_constant_form(g, "1"))
    assert d.q == 0
    assert abs(evaluate_C(d, random_form(g, 1, U1, rng, 3), [])) < 1e-14


def test_abelian_quadratic_oracle(rng):
    # for u(1) written as i*alpha the symplectic pairing is -1/4pi^2 int alpha ^ beta
    g = TorusGrid.cube(2, 8)
    d = CharFormDescriptor(get_polynomial("c2_su2"), parse_constant_form(g, "1"))
    al, be = rng.standard_normal((2, 2, 8, 8))
    a = LieValuedForm(g, 1, 1j * al[..., None, None], U1)
    b = LieValuedForm(g, 1, 1j * be[..., None, None], U1)
    by_hand = -np.mean(al[0] * be[1] - al[1] * be[0]) / (4 * np.pi**2)
    assert evaluate_C(d, LieValuedForm.zeros(g, 1, U1), [a, b]) == pytest.approx(by_hand, abs=1e-15)


@pytest.mark.parametrize("method", ["fd4", "spectral"])
def test_cartan_t2_one_probe(method, rng):
    g, d = _t2(16, method)
    A, a = random_form(g, 1, SU2, rng, 3), random_form(g, 1, SU2, rng, 3)
    X = random_form(g, 0, SU2, rng, 3)
    r = cartan_closedness_residual(d, A, X, [a])
    assert abs(r) < 1e-10
    assert cartan_closedness_residual(d, A, LieValuedForm.zeros(g, 0, SU2), [a]) == 0.0


def test_cartan_t3_cs_two_probes(rng):
    g = TorusGrid.cube(3, 10)
    d = cs_descriptor(g)
    A, a, b = (random_form(g, 1, SU2, rng, 2) for _ in range(3))
    X = random_form(g, 0, SU2, rng, 2)
    assert abs(cartan_closedness_residual(d, A, X, [a, b])) < 1e-10


def test_cartan_t4_one_probe(rng):
    g = TorusGrid.cube(4, 8)
    d = symplectic_descriptor(2, g)
    A, a = random_form(g, 1, SU2, rng, 1), random_form(g, 1, SU2, rng, 1)
    X = random_form(g, 0, SU2, rng, 1)
    assert abs(cartan_closedness_residual(d, A, X, [a])) < 1e-10


def test_cartan_inadmissible():
    g, d = _t2(8)
    A = LieValuedForm.zeros(g, 1, SU2)
    X = LieValuedForm.zeros(g, 0, SU2)
    with pytest.raises(ValueError):
        cartan_closedness_residual(d, A, X, [A, A, A, A])


@pytest.mark.parametrize("name", ["atiyah_bott_t2", "symplectic_t4", "cs_t3"])
def test_gauge_invariance_spectral(name, rng):
    from gaugeforms.scenarios import DESCRIPTORS

    entry = DESCRIPTORS[name]
    N = {2: 24, 3: 16, 4: 12}[entry.dim]
    g = TorusGrid.cube(entry.dim, N, "spectral")
    d = entry.build(g)
    A = random_form(g, 1, SU2, rng, 1)
    phi = band_limited_gauge(g, rng, factors=2)
    args = [random_form(g, 1, SU2, rng, 1) for _ in range(d.q)]
    scale = max(value_scale(d, A, args), 1.0)
    assert gauge_invariance_residual(d, A, phi, args) < 1e-10 * scale


def test_directional_derivative_quadratic(rng):
    g, d = _t2(8)
    A, a = random_form(g, 1, SU2, rng), random_form(g, 1, SU2, rng)
    X = random_form(g, 0, SU2, rng)
    fun = lambda B: moment_pairing(B, X)
    d1, d2, ext = richardson_derivative(fun, A, a, 1e-3)
    assert abs(d1 - d2) < 1e-10 and abs(ext - d1) < 1e-10
    with pytest.raises(ValueError):
        directional_derivative(fun, A, a, 0.0)
    # linear functional along a zero direction
    assert directional_derivative(fun, A, LieValuedForm.zeros(g, 1, SU2), 1e-3) == 0.0


def test_descriptor_errors(rng):
    g = TorusGrid.cube(2, 16)
    x, _ = g.coords()
    with pytest.raises(ValueError):  # not closed: d(sin(2 pi x) dy) != 0
        CharFormDescriptor(get_polynomial("c2_su2"), LieValuedForm.from_components(g, 1, {(1,): np.sin(2 * np.pi * x)}))
    with pytest.raises(ValueError):
        CharFormDescriptor(get_polynomial("c2_su2"), random_form(g, 0, SU2, rng))
    g4 = TorusGrid.cube(4, 8)
    with pytest.raises(ValueError):  # q = 2 - 4 < 0
        CharFormDescriptor(get_polynomial("c1_u1"), parse_constant_form(g4, "1"))
    _, d = _t2(8)
    A = LieValuedForm.zeros(d.grid, 1, SU2)
    with pytest.raises(ValueError):
        evaluate_C(d, A, [A])
    with pytest.raises(ValueError):
        evaluate_C_sharp(d, A, A, [])
    with pytest.raises(ValueError):
        evaluate_C(d, A, [A, LieValuedForm.zeros(TorusGrid.cube(2, 12), 1, SU2)])


def test_transgression_edge_cases(rng):
    f = get_polynomial("c2_su2")
    g4 = TorusGrid.cube(4, 8)
    A = random_form(g4, 1, SU2, rng, 1)
    same = transgression_residual(f, A, A)
    assert same.pointwise == 0.0 and same.integral_gap == 0.0
    with pytest.raises(ValueError):
        transgression_residual(f, A, A, t_nodes=1)
    g2 = TorusGrid.cube(2, 8)
    with pytest.raises(ValueError):
        transgression_residual(f, LieValuedForm.zeros(g2, 1, SU2), LieValuedForm.zeros(g2, 1, SU2))


def test_transgression_small_on_smooth_fields(rng):
    f = get_polynomial("c2_su2")
    g = TorusGrid.cube(4, 12, "spectral")
    A0, A1 = random_form(g, 1, SU2, rng, 1), random_form(g, 1, SU2, rng, 1)
    res = transgression_residual(f, A0, A1)
    assert res.pointwise < 1e-3 * res.scale
    assert res.integral_gap < 1e-12


@given(st.integers(0, 10_000), st.floats(-2, 2))
def test_bilinear_scaling(seed, s):
    rng = np.random.default_rng(seed)
    g, d = _t2(8)
    A, a, b = (random_form(g, 1, SU2, rng, 1) for _ in range(3))
    assert evaluate_C(d, A, [a * s, b]) == pytest.approx(s * evaluate_C(d, A, [a, b]), abs=1e-13)
