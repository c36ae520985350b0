import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multibell import catalog
from multibell.bell import BellFunction, evaluate_deterministic
from multibell.lhv import BudgetExceeded, lhv_bound, spectrum_matches, strategy_from_index
from multibell.search import StrategyTable
from strategies import bell_functions


def brute_force(f: BellFunction):
    vals = set()
    for digits in itertools.product(range(f.d), repeat=2 * f.n):
        vals.add(evaluate_deterministic(f, np.array(digits).reshape(f.n, 2)))
    return max(vals), tuple(sorted(vals))


def test_chsh_bound():
    rep = lhv_bound(catalog.function("I_2_2"))
    assert rep.bound == 1
    assert rep.spectrum == (-1, 1)
    assert rep.to_json()["bound"] == "1"


@pytest.mark.parametrize("key,spectrum", [
    ("I_2_5", (Fraction(-3, 2), Fraction(-1, 4), Fraction(1))),
    ("I_2_7", (Fraction(-4, 3), Fraction(-1, 6), Fraction(1))),
])
def test_two_party_spectra(key, spectrum):
    assert lhv_bound(catalog.function(key)).spectrum == spectrum
    assert spectrum_matches(catalog.function(key), spectrum)
    assert not spectrum_matches(catalog.function(key), spectrum[1:])


@settings(max_examples=25)
@given(bell_functions(n=2, d=3))
def test_matches_brute_force(f):
    bound, spectrum = brute_force(f)
    rep = lhv_bound(f)
    assert rep.bound == bound
    assert rep.spectrum == spectrum


@settings(max_examples=25)
@given(bell_functions(n=2, d=3))
def test_argmax_attains_bound(f):
    rep = lhv_bound(f)
    assert evaluate_deterministic(f, np.array(rep.argmax)) == rep.bound
    assert 1 <= rep.argmax_count <= rep.strategies


@given(st.integers(0, 3**6 - 1))
def test_strategy_decoding(idx):
    s = strategy_from_index(idx, 3, 3)
    digits = s.ravel().tolist()
    assert sum(x * 3 ** (5 - i) for i, x in enumerate(digits)) == idx


def test_budget():
    with pytest.raises(BudgetExceeded):
        lhv_bound(catalog.function("I_5_3_1"), budget=1000)


@pytest.mark.parametrize("key", ["I_3_3_1", "I_4_3_1", "I_3_5_1"])
def test_strategy_table_agrees(key):
    f = catalog.function(key)
    table = StrategyTable(f.n, f.d)
    rep = lhv_bound(f)
    assert table.bound(f) == rep.bound
    assert table.spectrum(f) == rep.spectrum


def test_bounds_are_one_for_robust_functions():
    for key in ("I_2_3", "I_3_3_1", "I_4_3_1", "I_2_5_2", "I_3_5_1", "I_2_7_3"):
        assert lhv_bound(catalog.function(key)).bound == 1, key
