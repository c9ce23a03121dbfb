import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from scarfdirac.core import ModelParams, QuantumNumbers, Symmetry, derived_coefficients
from scarfdirac.wavefunctions import (
    DomainError,
    NotBound,
    QuadratureConfig,
    SpinorState,
    SymmetryConstantPole,
    closed_form_component,
    closed_form_derivative,
    count_nodes,
    domain_length,
    lower_component,
    lower_component_paper_form,
    lower_component_via_relation,
    make_state,
    norm_integral,
    normalize,
    printed_form_deviation,
    paper_normalization_audit,
    r_of_z,
    sample,
    state_from_energy,
    upper_component,
    z_of_r,
)

TABLE = ModelParams()


def test_z_mapping_examples():
    alpha = 0.7
    assert z_of_r(math.pi / (4 * alpha), alpha) == pytest.approx(-1.0, rel=1e-15)
    assert z_of_r(0.3, 2.0) == pytest.approx(-math.tan(0.6) ** 2, rel=1e-15)
    assert z_of_r(0.3, 2.0) == pytest.approx(-0.468043, abs=1e-6)
    assert r_of_z(z_of_r(0.3, 2.0), 2.0) == pytest.approx(0.3, rel=1e-14)
    assert -1e-12 < z_of_r(1e-7, 1.0) < 0


@settings(max_examples=60)
@given(alpha=st.floats(1e-3, 5), frac=st.floats(1e-6, 1 - 1e-6))
def test_z_round_trip(alpha, frac):
    r = frac * domain_length(alpha)
    assert r_of_z(z_of_r(r, alpha), alpha) == pytest.approx(r, rel=1e-9)


def test_domain_errors():
    with pytest.raises(DomainError):
        z_of_r(0.0, 1.0)
    with pytest.raises(DomainError):
        z_of_r(domain_length(1.0), 1.0)
    with pytest.raises(DomainError):
        r_of_z(0.5, 1.0)


@pytest.mark.parametrize("n_r", range(6))
@pytest.mark.parametrize("D,alpha", [(3, 0.01), (5, 0.1), (4, 1e-3)])
def test_node_count_equals_radial_number(n_r, D, alpha):
    state = make_state(ModelParams(alpha=alpha), QuantumNumbers.from_radial(D, n_r), normalized=False)
    assert count_nodes(state) == n_r


def test_nodes_on_a_dense_grid_agree():
    state = make_state(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 2))
    r = np.linspace(1e-3, state.length - 1e-3, 200_001)
    F = upper_component(state, r) / state.phase
    signs = np.sign(F.real[np.abs(F) > 1e-300])
    assert np.count_nonzero(signs[1:] != signs[:-1]) == 2


@pytest.mark.parametrize("n_r,alpha", [(0, 0.01), (2, 0.1), (5, 1e-3), (3, 1e-4)])
def test_normalized_state_integrates_to_one(n_r, alpha):
    state = make_state(ModelParams(alpha=alpha), QuantumNumbers.from_radial(3, n_r))
    value, err = norm_integral(state)
    assert abs(value - 1) <= 1e-8
    assert err <= 1e-8


def test_norm_matches_scipy_quad():
    state = make_state(ModelParams(alpha=0.2), QuantumNumbers.from_radial(4, 1))
    ref, _ = quad(lambda r: abs(closed_form_component(state, r)) ** 2, 0, state.length, epsabs=1e-13, epsrel=1e-12, limit=400)
    assert ref == pytest.approx(1.0, abs=1e-9)


def test_normalization_is_projective():
    state = make_state(TABLE, QuantumNumbers.from_radial(3, 1), normalized=False)
    scaled = replace(state, log_norm=math.log(7.0))
    a, b = normalize(state), normalize(scaled)
    r = np.linspace(1, state.length - 1, 9)
    assert np.allclose(closed_form_component(a, r), closed_form_component(b, r), rtol=1e-14, atol=0)


def test_doubling_quadrature_order_is_stable():
    state = make_state(ModelParams(alpha=0.01), QuantumNumbers.from_radial(5, 2), normalized=False)
    a = normalize(state, QuadratureConfig(order=20))
    b = normalize(state, QuadratureConfig(order=40, initial_panels=128))
    assert abs(math.expm1(2 * (b.log_norm - a.log_norm))) < 1e-9


@pytest.mark.parametrize("n_r,alpha,D", [(0, 0.01, 3), (1, 0.1, 3), (3, 0.3, 5), (5, 1e-3, 4)])
def test_relation_matches_finite_differences(n_r, alpha, D):
    state = make_state(ModelParams(alpha=alpha), QuantumNumbers.from_radial(D, n_r))
    L = state.length
    h = 1e-6 * L
    r = np.linspace(0.02 * L, 0.98 * L, 50)
    F = closed_form_component(state, r)
    dF = (closed_form_component(state, r + h) - closed_form_component(state, r - h)) / (2 * h)
    X = state.params.coupling(state.E)
    G_fd = (dF + state.qn.kappa * F / r) / X
    G = lower_component_via_relation(state, r)
    scale = np.max(np.abs(G))
    assert np.max(np.abs(G - G_fd)) <= 1e-6 * scale


def test_analytic_derivative_matches_finite_differences():
    state = make_state(ModelParams(alpha=0.5), QuantumNumbers.from_radial(3, 3))
    r = np.linspace(0.1, state.length - 0.1, 25)
    h = 1e-6
    fd = (closed_form_component(state, r + h) - closed_form_component(state, r - h)) / (2 * h)
    d = closed_form_derivative(state, r)
    assert np.max(np.abs(d - fd)) <= 1e-7 * np.max(np.abs(d))


@pytest.mark.parametrize("n_r", [0, 2])
def test_small_r_exponent(n_r):
    state = make_state(ModelParams(alpha=0.2), QuantumNumbers.from_radial(3, n_r))
    r = np.array([1e-4, 2e-4]) * state.length
    F = np.abs(closed_form_component(state, r))
    slope = math.log(F[1] / F[0]) / math.log(2)
    assert slope == pytest.approx(state.small_r_exponent, rel=1e-2)


def test_small_r_power_law_of_partner():
    state = make_state(ModelParams(alpha=0.2), QuantumNumbers.from_radial(3, 0))
    r = np.array([1e-5, 2e-5]) * state.length
    G = np.abs(lower_component(state, r))
    slope = math.log(G[1] / G[0]) / math.log(2)
    assert slope == pytest.approx((state.lambda_cap - 1) / 2, rel=1e-2)


def test_endpoints_decay():
    state = make_state(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 1))
    L = state.length
    peak = np.max(np.abs(closed_form_component(state, np.linspace(0.01 * L, 0.99 * L, 1001))))
    assert abs(closed_form_component(state, 1e-6 * L)) < 1e-6 * peak
    assert abs(closed_form_component(state, L * (1 - 1e-6))) < 1e-6 * peak


def test_closed_form_solves_the_scarf_equation():
    p = ModelParams(alpha=0.1)
    qn = QuantumNumbers.from_radial(3, 1)
    state = make_state(p, qn)
    d = derived_coefficients(p, qn, state.E)
    L = state.length
    r = np.linspace(0.1 * L, 0.9 * L, 7)
    h = 1e-3
    F = closed_form_component(state, r)
    F2 = (closed_form_component(state, r + h) - 2 * F + closed_form_component(state, r - h)) / h**2
    V = p.alpha**2 * (d.gamma / np.cos(p.alpha * r) ** 2 + d.eta / np.sin(p.alpha * r) ** 2)
    lhs = -F2 + V * F - p.alpha**2 * state.nu**2 * F
    assert np.max(np.abs(lhs)) <= 1e-6 * np.max(np.abs(V * F))


def test_pseudospin_state_uses_lower_component():
    p = ModelParams(alpha=0.1, V0=3.0, S0=1.0, symmetry=Symmetry.PSEUDOSPIN)
    state = make_state(p, QuantumNumbers.from_radial(3, 1))
    r = np.linspace(1, state.length - 1, 11)
    assert np.array_equal(lower_component(state, r), closed_form_component(state, r))
    assert count_nodes(state) == 1
    F = upper_component(state, r)
    assert np.all(np.isfinite(F))
    assert norm_integral(state)[0] == pytest.approx(1.0, abs=1e-8)


def test_symmetry_constant_pole():
    p = ModelParams(alpha=0.1)
    qn = QuantumNumbers.from_radial(3, 0)
    state = state_from_energy(p, qn, 3.0408)
    pole = replace(state, E=p.C - p.M)
    with pytest.raises(SymmetryConstantPole):
        lower_component_via_relation(pole, 1.0)


def test_not_bound():
    with pytest.raises(NotBound):
        state_from_energy(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 0), 0.5)
    with pytest.raises(NotBound):
        SpinorState(TABLE, QuantumNumbers.from_radial(3, 0), E=3.0, nu=-1.0, lambda_cap=2.0)


def test_sample_rows():
    state = make_state(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 0))
    rows = sample(state, [1.0, 2.0])
    assert [s.r for s in rows] == [1.0, 2.0]
    assert rows[0].z == pytest.approx(-math.tan(0.1) ** 2)
    assert rows[1].F == closed_form_component(state, 2.0)


def test_printed_form_ground_state_has_single_term():
    state = make_state(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 0))
    r = np.linspace(1, 10, 5)
    full = lower_component_paper_form(state, r)
    assert np.all(np.isfinite(full))
    dev = printed_form_deviation(state)
    dev_no_k = printed_form_deviation(state, include_kappa_term=False)
    assert dev > 0 and dev_no_k > 0 and dev != dev_no_k


def test_normalization_audit_records_terms():
    state = make_state(ModelParams(alpha=0.1), QuantumNumbers.from_radial(3, 1))
    report = paper_normalization_audit(state)
    assert report.n_r == 1 and len(report.terms) == 4
    assert report.numeric_norm_log == state.log_norm
    for term in report.terms:
        assert "log_A" in term or "error_A" in term
        # Re(c'-a'-b') = p - nu < 0 for a bound state, so the printed Gauss sum diverges
        assert "error_B" in term and "DivergentSeries" in term["error_B"]
