import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multibell import catalog
from multibell.algebra import Coefficient
from multibell.bell import (
    BellFunction,
    ProbabilityForm,
    ProbabilityTable,
    cglmp_function,
    closed_form_restriction,
    evaluate,
    evaluate_deterministic,
    forms_equivalent,
    iterate,
    mabk_function,
    parse_probability_form,
    restrict,
    setting_bits,
    setting_index,
    setting_key,
    to_probability_form,
)
from multibell.catalog import form_function
from strategies import bell_functions

odd_primes = st.sampled_from([3, 5, 7])


def test_setting_keys():
    assert setting_key(5, 3) == "101"
    assert setting_bits(6, 3) == (1, 1, 0)
    assert setting_index("011") == 3


def test_chsh_shape():
    f = catalog.function("I_2_2")
    assert (f.n, f.d) == (2, 2)
    assert f == mabk_function(2)


@given(st.data(), odd_primes, st.integers(1, 2))
def test_iterate_restrict_round_trip(data, d, n):
    f00 = data.draw(bell_functions(n, d))
    f01 = data.draw(bell_functions(n, d))
    g = iterate(f00, f01)
    assert (g.n, g.d) == (n + 1, d)
    assert restrict(g, 0, 0) == f00
    assert restrict(g, 0, 1) == f01
    for l in range(d):
        assert restrict(g, 0, l) == closed_form_restriction(f00, f01, l)


@given(st.data(), odd_primes, st.integers(2, 3))
def test_iterate_is_inverse_of_restrictions(data, d, n):
    f = data.draw(bell_functions(n, d))
    assert iterate(restrict(f, 0, 0), restrict(f, 0, 1)) == f


def test_iterate_needs_prime_d():
    f = BellFunction.zero(1, 4)
    with pytest.raises(ValueError):
        iterate(f, f)


def test_iterate_shape_mismatch():
    with pytest.raises(ValueError):
        iterate(BellFunction.zero(2, 3), BellFunction.zero(1, 3))


def test_restrict_errors():
    with pytest.raises(ValueError):
        restrict(BellFunction.zero(1, 3), 0, 0)
    with pytest.raises(ValueError):
        restrict(BellFunction.zero(2, 3), 0, 3)


@given(bell_functions())
def test_json_round_trip(f):
    text = json.dumps(f.to_json())
    assert BellFunction.from_json(json.loads(text)) == f


def test_json_accepts_any_gauge():
    payload = {"n": 1, "d": 3, "coeffs": {"0": ["1", "2", "3"], "1": ["0", "0", "0"]}}
    shifted = {"n": 1, "d": 3, "coeffs": {"0": ["0", "1", "2"], "1": ["5", "5", "5"]}}
    assert BellFunction.from_json(payload) == BellFunction.from_json(shifted)


def test_json_rejects_bad_length():
    with pytest.raises(ValueError):
        BellFunction.from_json({"n": 1, "d": 3, "coeffs": {"0": ["1", "2"], "1": ["0", "0", "0"]}})


@given(bell_functions())
def test_probability_form_inverse(f):
    g, c = form_function(to_probability_form(f))
    assert g == f
    assert c == 0


@given(bell_functions(), st.data())
def test_deterministic_value_matches_form(f, data):
    strat = data.draw(st.lists(st.lists(st.integers(0, f.d - 1), min_size=2, max_size=2),
                               min_size=f.n, max_size=f.n))
    pf = to_probability_form(f)
    table = ProbabilityTable.deterministic(strat, f.d)
    assert evaluate(pf, table) == evaluate_deterministic(f, strat)


@given(bell_functions())
def test_white_noise_is_zero(f):
    # every full-correlated function vanishes on uniform noise
    assert evaluate(to_probability_form(f), ProbabilityTable.uniform(f.n, f.d)) == 0


@given(bell_functions(), st.integers(1, 5), st.integers(-3, 3))
def test_forms_equivalent_affine(f, k, c):
    pf = to_probability_form(f)
    scaled = ProbabilityForm(f.n, f.d, tuple(tuple(k * w for w in row) for row in pf.weights),
                             pf.constant + c)
    assert forms_equivalent(scaled, pf) in (Fraction(k), Fraction(1))


def test_probability_form_json_round_trip():
    pf = to_probability_form(catalog.function("I_3_3_1"))
    assert ProbabilityForm.from_json(json.loads(json.dumps(pf.to_json()))) == pf


def test_printed_b33_form():
    # the coincidence inequality printed next to I_3_3(1)
    text = ("1/2*[P(A0+B0+C0=0)-P(A0+B0+C1=2)+2P(A0+B1+C0=0)+P(A0+B1+C1=2)-P(A1+B0+C0=1)"
            "+P(A1+B0+C1=0)+P(A1+B1+C0=1)-P(A1+B1+C1=0)-1]")
    printed = parse_probability_form(text, 3, 3)
    pf = to_probability_form(catalog.function("I_3_3_1"))
    assert forms_equivalent(pf, printed) == 1


def test_parse_probability_form_errors():
    with pytest.raises(ValueError):
        parse_probability_form("P(A0+B0=1", 2, 3)
    with pytest.raises(ValueError):
        parse_probability_form("P(B0+A0=1)", 2, 3)
    with pytest.raises(ValueError):
        parse_probability_form("P(A0=1)", 2, 3)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_cglmp_relation(d):
    f = cglmp_function(d)
    assert forms_equivalent(to_probability_form(f), to_probability_form(catalog.function(f"I_2_{d}"))) is not None


@pytest.mark.parametrize("n", [3, 4])
def test_mabk_from_iteration(n):
    assert catalog.function(f"MABK_{n}") == mabk_function(n)


def test_deterministic_table_normalized():
    t = ProbabilityTable.deterministic(np.array([[0, 1], [2, 0]]), 3)
    assert t.is_normalized()
    with pytest.raises(ValueError):
        ProbabilityTable.deterministic(np.array([[0, 3], [2, 0]]), 3)


def test_coefficient_lookup_by_key():
    f = catalog.function("I_3_3_1")
    assert f["010"] == Coefficient.basis(0, 3, Fraction(2, 3))
