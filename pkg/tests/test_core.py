import math

import pytest
from hypothesis import given, strategies as st

from scarfdirac.core import (
    ModelParams,
    ParameterError,
    QuantumNumbers,
    Symmetry,
    derived_coefficients,
    kappa_of,
)


def test_kappa_signs():
    assert kappa_of(0, 3, aligned=True) == -1.0
    assert kappa_of(0, 3, aligned=False) == 1.0
    assert kappa_of(2, 4, aligned=False) == 3.5


def test_kappa_rejects_bad_input():
    with pytest.raises(ParameterError):
        kappa_of(-1, 3, False)
    with pytest.raises(ParameterError):
        kappa_of(0, 1, False)


def test_alpha_must_be_positive():
    with pytest.raises(ParameterError):
        ModelParams(alpha=0.0)
    with pytest.raises(ParameterError):
        ModelParams(alpha=-1e-3)


def test_symmetry_coerced_from_string():
    assert ModelParams(symmetry="pseudospin").symmetry is Symmetry.PSEUDOSPIN


def test_radial_to_principal_mapping():
    qn = QuantumNumbers.from_radial(3, n_r=2, l=1)
    assert qn.n == 2 * 2 + 1 + 1
    assert QuantumNumbers.from_principal(3, 5).n_r == 2
    # even n at l = 0 has no integer radial number
    assert QuantumNumbers.from_principal(3, 2).n_r is None
    assert QuantumNumbers.from_principal(3, 4, l=1).n_r == 1


def test_label_k_matches_kappa_magnitude():
    qn = QuantumNumbers(D=5, n=1, l=2)
    assert qn.label_k == abs(qn.kappa) == 4.0


def test_spin_coefficients_for_table_state():
    p = ModelParams(alpha=0.01)
    qn = QuantumNumbers.from_radial(3, 0)
    E = 3.0408
    d = derived_coefficients(p, qn, E)
    assert d.gamma == 2.0  # kappa = 1
    assert d.eta == pytest.approx(2 * (1 + E - 1) / 1e-4, rel=1e-14)
    assert d.lambda_cap == pytest.approx(math.sqrt(1 + 4 * d.eta), rel=1e-14)
    assert d.epsilon_sq == pytest.approx((1 - E) * E / 1e-4, rel=1e-14)
    assert d.bound and d.nu == pytest.approx(math.sqrt(-d.epsilon_sq))


def test_pseudospin_coefficients():
    p = ModelParams(alpha=0.1, V0=3, S0=1, symmetry=Symmetry.PSEUDOSPIN)
    qn = QuantumNumbers.from_radial(4, 1)
    E = -1.2
    d = derived_coefficients(p, qn, E)
    k = qn.kappa
    assert d.gamma == pytest.approx(k * (k - 1))
    assert d.eta == pytest.approx(2 * (1 + 1.2 + 1) / 0.01)
    assert d.epsilon_sq == pytest.approx((1 - 1.2) * (1 + 1.2 + 1) / 0.01)


def test_non_normalizable_regime_gives_complex_lambda():
    p = ModelParams(alpha=1.0, V0=-1, S0=0)
    d = derived_coefficients(p, QuantumNumbers(D=3, n=1), E=1.0)
    assert d.eta < -0.25
    assert isinstance(d.lambda_cap, complex)
    assert not d.radicand_ok


def test_unbound_energy_gives_nan_nu():
    p = ModelParams(alpha=0.1)
    d = derived_coefficients(p, QuantumNumbers(D=3, n=1), E=0.5)
    assert not d.bound
    assert math.isnan(d.nu)


@given(
    E=st.floats(-5, 5),
    alpha=st.floats(1e-3, 1.0),
    V0=st.floats(-2, 2),
    S0=st.floats(-2, 2),
    spin=st.booleans(),
)
def test_lambda_squared_is_one_plus_four_eta(E, alpha, V0, S0, spin):
    p = ModelParams(V0=V0, S0=S0, alpha=alpha, symmetry=Symmetry.SPIN if spin else Symmetry.PSEUDOSPIN)
    d = derived_coefficients(p, QuantumNumbers(D=3, n=1), E)
    assert complex(d.lambda_cap) ** 2 == pytest.approx(1 + 4 * d.eta, rel=1e-12, abs=1e-12)
    assert d.bound == (d.epsilon_sq < 0)
