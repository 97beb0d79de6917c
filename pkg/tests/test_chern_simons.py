import numpy as np
import pytest

from gaugeforms.chern_simons import (DegreeMapSpec, InconclusiveDegree, cs_action, cs_shift_residual,
                                     cs_transgression, current_closedness_residual, degree_oracle,
                                     horizontality_residual, make_degree_map, noether_current, smoothstep5,
                                     winding_number, wrapped_directions)
from gaugeforms.forms import LieValuedForm, TorusGrid, exterior_derivative, multilinear_wedge, random_form
from gaugeforms.gauge import curvature, infinitesimal_action
from gaugeforms.weil import get_polynomial
from gaugeforms.gauge import GaugeTransform, gauge_act
from gaugeforms.lie import SU2, U1, uk


def test_cs_of_zero():
    g = TorusGrid.cube(3, 8)
    assert cs_action(LieValuedForm.zeros(g, 1, SU2)) == 0.0


def test_u1_helical_oracle():
    g = TorusGrid.cube(3, 16, "spectral")
    x = g.coords()[0]
    c, s = np.cos(2 * np.pi * x), np.sin(2 * np.pi * x)
    A = LieValuedForm.from_components(g, 1, {(1,): 1j * c[..., None, None], (2,): 1j * s[..., None, None]}, U1)
    # int alpha ^ d alpha = -2 pi, so CS = -2pi / 8pi^2
    assert cs_action(A) == pytest.approx(-1 / (4 * np.pi), abs=1e-14)


def test_cs_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        cs_action(LieValuedForm.zeros(TorusGrid.cube(2, 8), 1, SU2))
    g = TorusGrid.cube(3, 8)
    with pytest.raises(ValueError):
        cs_action(random_form(g, 0, SU2, rng))
    with pytest.raises(ValueError):
        cs_action(LieValuedForm.zeros(g, 1, uk(2)))


@pytest.mark.parametrize("method", ["fd4", "spectral"])
def test_cs_equals_transgression_potential(method, rng):
    g = TorusGrid.cube(3, 10, method)
    A = random_form(g, 1, SU2, rng, 2)
    # the integrand is cubic in t, so two Gauss nodes are exact
    assert cs_transgression(A) == pytest.approx(cs_action(A), abs=1e-13)


def test_smoothstep_and_spec():
    assert smoothstep5(0.0) == 0.0 and smoothstep5(1.0) == 1.0 and smoothstep5(2.0) == 1.0
    assert smoothstep5(0.5) == pytest.approx(0.5)
    for bad in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            DegreeMapSpec(1, radius=bad)
    with pytest.raises(ValueError):
        DegreeMapSpec(1, center=(0.5, 0.5))
    assert DegreeMapSpec(1, center=(1.25, -0.25, 0.5)).center == (0.25, 0.75, 0.5)


def test_wrapped_directions_unit_and_degree_one(rng):
    delta = rng.standard_normal((50, 3))
    for d in (-2, 1, 3):
        n = wrapped_directions(delta, d)
        assert np.allclose(np.linalg.norm(n, axis=-1), 1.0)
    assert np.allclose(wrapped_directions(delta, 1), delta / np.linalg.norm(delta, axis=-1, keepdims=True))


def test_identity_map_has_degree_zero():
    g = TorusGrid.cube(3, 16)
    phi = make_degree_map(DegreeMapSpec(0), g)
    assert winding_number(phi) == 0.0
    assert degree_oracle(phi) == 0


@pytest.mark.parametrize("d", [-1, 1, 2])
def test_winding_matches_oracle(d):
    g = TorusGrid.cube(3, 32)
    phi = make_degree_map(DegreeMapSpec(d, radius=0.45), g)
    assert degree_oracle(phi) == d
    assert abs(winding_number(phi) - d) < 2e-2


def test_winding_inverse_and_additivity():
    g = TorusGrid.cube(3, 32)
    a = make_degree_map(DegreeMapSpec(1, radius=0.2, center=(0.25, 0.5, 0.5)), g)
    b = make_degree_map(DegreeMapSpec(1, radius=0.2, center=(0.75, 0.5, 0.5)), g)
    assert degree_oracle(a @ b) == 2
    assert degree_oracle(a.inverse()) == -1
    assert winding_number(a @ b) == pytest.approx(winding_number(a) + winding_number(b), abs=1e-10)


def test_oracle_rejects_critical_value():
    g = TorusGrid.cube(3, 8)
    phi = GaugeTransform.identity(g)
    with pytest.raises(InconclusiveDegree):
        # every simplex maps to a single point, which is the chosen value
        degree_oracle(phi, regular_value=np.eye(2))


def test_gauge_shift_law(rng):
    g = TorusGrid.cube(3, 32)
    A = random_form(g, 1, SU2, rng, 1, 0.5)
    phi = make_degree_map(DegreeMapSpec(1, radius=0.45), g)
    assert cs_shift_residual(A, phi, winding=degree_oracle(phi)) < 2e-2
    # with the discrete winding number the shift law is tighter
    assert cs_shift_residual(A, phi) < cs_shift_residual(A, phi, winding=1) + 1e-12


def test_small_gauge_keeps_cs(rng):
    g = TorusGrid.cube(3, 24, "spectral")
    A = random_form(g, 1, SU2, rng, 1, 0.5)
    phi = GaugeTransform.exp(random_form(g, 0, SU2, rng, 1, 0.3))
    assert abs(winding_number(phi)) < 1e-6
    assert abs(cs_action(gauge_act(phi, A)) - cs_action(A)) < 1e-6


def test_current_closed_for_stabilizer(rng):
    # A along a fixed generator T and X = T: d_A X = 0, so the current is closed
    g = TorusGrid.cube(3, 16)
    T = SU2.from_coords(np.array([0.3, -0.4, 0.5]))
    coef = random_form(g, 1, None, rng, 2).data
    A = LieValuedForm(g, 1, coef[..., None, None] * T, SU2)
    X = LieValuedForm(g, 0, np.broadcast_to(T, (1,) + g.sizes + (2, 2)).copy(), SU2)
    J = noether_current(A, X, get_polynomial("det_su2"))
    assert J.norm() > 1e-3
    assert current_closedness_residual(A, X) < 1e-12 * J.norm() * 16


def test_current_differential_identity(rng):
    # d c(F, X) = c(F, d_A X) up to the sign of the current
    g = TorusGrid.cube(3, 16, "spectral")
    A = random_form(g, 1, SU2, rng, 1, 0.5)
    X = random_form(g, 0, SU2, rng, 1)
    f = get_polynomial("det_su2")
    dJ = exterior_derivative(noether_current(A, X, f))
    expected = multilinear_wedge(f, curvature(A), infinitesimal_action(X, A)) * (-2.0)
    assert (dJ - expected).norm() < 1e-8 * expected.norm()


def test_horizontality_trivial_cases(rng):
    g = TorusGrid.cube(3, 8)
    A = random_form(g, 1, SU2, rng)
    val, scale = horizontality_residual(A, LieValuedForm.zeros(g, 0, SU2))
    assert val == 0.0 and scale == 0.0
    val, scale = horizontality_residual(LieValuedForm.zeros(g, 1, SU2), random_form(g, 0, SU2, rng))
    assert val == 0.0


def test_horizontality_spectral(rng):
    g = TorusGrid.cube(3, 16, "spectral")
    A = random_form(g, 1, SU2, rng, 2)
    X = random_form(g, 0, SU2, rng, 2)
    val, scale = horizontality_residual(A, X)
    assert val <= 1e-12 * scale
