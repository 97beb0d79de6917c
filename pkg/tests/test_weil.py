import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaugeforms.lie import SU2, U1, uk
from gaugeforms.weil import (REGISTRY, WeilPolynomial, ad_invariance_residual, get_polynomial,
                             mixed_discriminant, trace_product_map)

c2 = get_polynomial("c2_su2")
det = get_polynomial("det_su2")


def test_c2_at_diagonal_element():
    X = np.diag([1j, -1j])
    assert abs(c2.evaluate(X) - (-1 / (4 * np.pi**2))) < 1e-15


def test_det_trace_relation(rng):
    X = SU2.random(rng, (100,))
    # det X = -tr(X^2)/2 for traceless 2x2
    assert np.max(np.abs(det.evaluate(X) + c2.evaluate(X))) < 1e-14


def test_zero_and_diagonal(rng):
    X = SU2.random(rng)
    assert c2.evaluate(np.zeros((2, 2))) == 0
    assert abs(c2.polarized(X, np.zeros((2, 2)))) < 1e-16
    for f in (c2, det):
        assert abs(f.polarized(X, X) - f.evaluate(X)) < 1e-12


def test_k2_trace_matches_explicit_symmetrization(rng):
    X, Y = SU2.random(rng), SU2.random(rng)
    sym = 0.5 * (np.trace(X @ Y) + np.trace(Y @ X)).real / (8 * np.pi**2)
    assert abs(c2.polarized(X, Y) - sym) < 1e-15
    assert abs(c2.polarized(X, Y) - np.trace(X @ Y).real / (8 * np.pi**2)) < 1e-15


def test_cubic_symmetry_and_diagonal(rng):
    f = WeilPolynomial(3, "trace_power", 1.0)
    alg = uk(3)
    Xs = [alg.random(rng) for _ in range(3)]
    # oracle: average over all 3! orderings
    full = np.mean([np.trace(Xs[p[0]] @ Xs[p[1]] @ Xs[p[2]]) for p in itertools.permutations(range(3))]).real
    for p in itertools.permutations(range(3)):
        assert abs(f.polarized(*[Xs[i] for i in p]) - full) < 1e-12
    assert abs(f.polarized(Xs[0], Xs[0], Xs[0]) - f.evaluate(Xs[0])) < 1e-12


def test_mixed_discriminant_degree3(rng):
    alg = uk(3)
    X = alg.random(rng)
    assert abs(mixed_discriminant([X, X, X]) - np.linalg.det(X)) < 1e-12
    f = WeilPolynomial(3, "determinant")
    f.check_algebra(alg)
    with pytest.raises(ValueError):
        f.check_algebra(SU2)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**16))
def test_multilinearity(a, b, seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = SU2.random(rng), SU2.random(rng), SU2.random(rng)
    for f in (c2, det):
        lhs = f.polarized(a * X + b * Y, Z)
        rhs = a * f.polarized(X, Z) + b * f.polarized(Y, Z)
        assert abs(lhs - rhs) < 1e-12


def test_ad_invariance():
    assert ad_invariance_residual(c2, 50) < 1e-11
    assert ad_invariance_residual(det, 50) < 1e-11
    assert ad_invariance_residual(get_polynomial("c1_u1"), 10, U1) == 0.0
    assert ad_invariance_residual(WeilPolynomial(3), 20, uk(3)) < 1e-11
    with pytest.raises(ValueError):
        ad_invariance_residual(c2, 0)


def test_wrong_argument_count():
    with pytest.raises(ValueError):
        c2.polarized(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        WeilPolynomial(0)
    with pytest.raises(ValueError):
        WeilPolynomial(2, "pfaffian")


def test_registry_constants():
    assert set(REGISTRY) == {"c2_su2", "det_su2", "c1_u1"}
    c1 = get_polynomial("c1_u1")
    # (i/2pi) * (i theta) = -theta/2pi
    assert abs(c1.evaluate(np.array([[0.5j]])) + 0.5 / (2 * np.pi)) < 1e-16
    assert det.normalization == 1 / (4 * np.pi**2)
    with pytest.raises(KeyError):
        get_polynomial("nope")


def test_trace_product_map(rng):
    X, Y, Z = SU2.random(rng), SU2.random(rng), SU2.random(rng)
    f = trace_product_map(3, 2.0)
    assert f.arity == 3
    assert abs(f(X, Y, Z) - 2 * np.trace(X @ Y @ Z).real) < 1e-14
    with pytest.raises(ValueError):
        f(X, Y)
    assert math.isclose(trace_product_map(1)(X), 0.0, abs_tol=1e-15)
