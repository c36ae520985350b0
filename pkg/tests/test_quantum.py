import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from multibell import catalog
from multibell.bell import mabk_function, to_probability_form
from multibell.quantum import (
    _Objective,
    coincidence_probability,
    coincidence_table,
    critical_visibility,
    ghz_state,
    measurement_unitary,
    optimize_phases,
    oracle_coincidence,
    oracle_distribution,
    quantum_value,
    verify_projector_identity,
    white_noise_value,
)
from multibell.symmetry import apply, random_transformation

cases = st.sampled_from([(2, 3), (3, 3), (2, 5), (3, 5), (2, 7), (2, 2), (4, 3)])


@settings(max_examples=80)
@given(cases, st.integers(0, 2**32 - 1))
def test_closed_form_matches_state_vector(case, seed):
    n, d = case
    rng = np.random.default_rng(seed)
    ph = rng.uniform(0, 2 * np.pi, size=(n, 2, d))
    s = int(rng.integers(2**n))
    closed = coincidence_table(ph)[s]
    oracle = oracle_coincidence(ghz_state(n, d), ph, s)
    np.testing.assert_allclose(closed, oracle, atol=1e-10)
    assert abs(closed.sum() - 1) < 1e-12
    assert coincidence_probability(ph, s, 1) == pytest.approx(closed[1], abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_measurement_unitary_is_unitary(d):
    U = measurement_unitary(np.random.default_rng(d).uniform(0, 6, d))
    np.testing.assert_allclose(U @ U.conj().T, np.eye(d), atol=1e-12)


def test_ghz_state_norm():
    psi = ghz_state(3, 5)
    assert np.linalg.norm(psi) == pytest.approx(1)
    assert np.count_nonzero(psi) == 5


def test_gradient_matches_finite_differences():
    f = catalog.function("I_3_3_1")
    obj = _Objective(to_probability_form(f).weight_array(), f.n, f.d)
    x = np.random.default_rng(1).uniform(0, 6, size=2 * f.n * (f.d - 1))
    _, g = obj(x)
    h = 1e-6
    fd = np.array([(obj(x + h * e)[0] - obj(x - h * e)[0]) / (2 * h) for e in np.eye(len(x))])
    np.testing.assert_allclose(g, fd, atol=1e-7)


def test_critical_visibility_formula():
    vc, violated = critical_visibility(1, 5 / 3, 0)
    assert vc == pytest.approx(0.6)
    assert violated
    assert critical_visibility(1, 0.9, 0) == (1.0, False)
    with pytest.raises(ZeroDivisionError):
        critical_visibility(1, 0.5, 0.5)


def test_white_noise_value_is_zero():
    assert white_noise_value(catalog.function("I_3_3_1")) == pytest.approx(0, abs=1e-15)


def _oracle_cglmp3_vc(starts=12, seed=7):
    """Nelder-Mead on the state-vector simulator; shares no code with the optimizer."""
    f = catalog.function("I_2_3")
    pf = to_probability_form(f)
    W = pf.weight_array()
    psi = ghz_state(2, 3)
    rng = np.random.default_rng(seed)

    def neg(x):
        ph = x.reshape(2, 2, 3)
        P = np.array([oracle_coincidence(psi, ph, s) for s in range(4)])
        return -float(np.sum(W * P))

    best = max(-minimize(neg, rng.uniform(0, 2 * np.pi, 12), method="Nelder-Mead",
                         options={"maxiter": 6000, "xatol": 1e-10, "fatol": 1e-12}).fun
               for _ in range(starts))
    return 1 / best


def test_cglmp3_vc_against_independent_oracle():
    oracle = _oracle_cglmp3_vc()
    assert oracle == pytest.approx(0.6962, abs=2e-3)
    rep = optimize_phases(catalog.function("I_2_3"), restarts=32)
    assert rep.vc == pytest.approx(oracle, abs=1e-4)
    # frozen value from the oracle run
    assert rep.vc == pytest.approx(0.696152, abs=1e-5)


@pytest.mark.parametrize("key,nl,vc", [
    ("I_3_3_1", 5 / 3, 0.6),
    ("I_4_3_1", 2.0, 0.5),
])
def test_robust_values(key, nl, vc):
    rep = optimize_phases(catalog.function(key), restarts=32)
    assert rep.nl_psi == pytest.approx(nl, abs=1e-6)
    assert rep.vc == pytest.approx(vc, abs=1e-4)
    assert quantum_value(catalog.function(key), rep.best_phases) == pytest.approx(rep.nl_psi, abs=1e-12)


def test_mabk3_visibility():
    rep = optimize_phases(mabk_function(3), restarts=32)
    assert rep.vc == pytest.approx(0.5, abs=1e-4)


def test_optimizer_is_deterministic():
    a = optimize_phases(catalog.function("I_2_3"), restarts=4, seed=3)
    b = optimize_phases(catalog.function("I_2_3"), restarts=4, seed=3)
    assert a.values == b.values
    np.testing.assert_array_equal(a.best_phases, b.best_phases)


def test_report_json():
    out = optimize_phases(catalog.function("I_2_3"), restarts=2).to_json()
    assert out["lhv"] == "1"
    assert len(out["best_phases"]) == 2


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_projector_identity(d):
    assert verify_projector_identity(d, trials=50, seed=d)


def test_projector_identity_needs_prime():
    with pytest.raises(ValueError):
        verify_projector_identity(4)


def test_restarts_validated():
    with pytest.raises(ValueError):
        optimize_phases(catalog.function("I_2_3"), restarts=0)


def test_zero_phases_two_qubits():
    assert coincidence_table(np.zeros((2, 2, 2)))[0, 0] == pytest.approx(1.0, abs=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_product_state_factorizes(seed):
    rng = np.random.default_rng(seed)
    n, d = 3, 3
    ph = rng.uniform(0, 2 * np.pi, size=(n, 2, d))
    s = int(rng.integers(2**n))
    psi = np.zeros(d**n, dtype=complex)
    psi[0] = 1
    joint = oracle_distribution(psi, ph, s)
    marginals = [joint.sum(axis=tuple(q for q in range(n) if q != p)) for p in range(n)]
    np.testing.assert_allclose(joint, np.einsum("i,j,k->ijk", *marginals), atol=1e-12)


def test_white_noise_residues_are_uniform():
    rng = np.random.default_rng(2)
    n, d = 2, 5
    ph = rng.uniform(0, 2 * np.pi, size=(n, 2, d))
    total = np.zeros(d)
    for k in range(d**n):
        basis = np.zeros(d**n, dtype=complex)
        basis[k] = 1
        total += oracle_coincidence(basis, ph, 3)
    np.testing.assert_allclose(total / d**n, 1 / d, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_phase_gauge_invariance(seed, c):
    rng = np.random.default_rng(seed)
    ph = rng.uniform(0, 2 * np.pi, size=(3, 2, 3))
    moved = ph.copy()
    moved[1, 0, :] += c
    np.testing.assert_allclose(coincidence_table(moved), coincidence_table(ph), atol=1e-12)


def test_optimum_is_symmetry_covariant():
    f = catalog.function("I_3_3_1")
    g = apply(random_transformation(3, 3, np.random.default_rng(11)), f)
    a = optimize_phases(f, restarts=16).nl_psi
    b = optimize_phases(g, restarts=16).nl_psi
    assert a == pytest.approx(b, abs=1e-7)


def test_noisy_value_threshold():
    f = catalog.function("I_4_3_1")
    rep = optimize_phases(f, restarts=16)
    v = rep.vc
    assert v * rep.nl_psi + (1 - v) * rep.nl_mix == pytest.approx(float(rep.lhv), abs=1e-12)
