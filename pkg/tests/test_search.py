import numpy as np
import pytest

from multibell import catalog
from multibell.bell import mabk_function
from multibell.search import SearchConfig, run_search, score, verify_candidate
from multibell.symmetry import apply, canonical_form, random_transformation


@pytest.fixture(scope="module")
def three_party():
    return run_search(SearchConfig("I_2_3", "I_2_3", 3))


def test_three_party_search(three_party):
    res = three_party
    assert res.candidates_evaluated == 54
    assert res.min_vc == pytest.approx(0.6, abs=1e-6)
    assert res.winner_count == 4
    assert res.raw_winner_count == 4
    found = {w.function.coeffs for w in res.winners}
    assert found == {catalog.function(f"I_3_3_{k}").coeffs for k in range(1, 5)}
    # the four winners form one equivalence class
    assert len({canonical_form(w.function).coeffs for w in res.winners}) == 1
    assert sum(res.histogram.values()) == 54


def test_search_is_deterministic(three_party):
    again = run_search(SearchConfig("I_2_3", "I_2_3", 3))
    assert again == three_party


def test_search_is_worker_count_independent(three_party):
    par = run_search(SearchConfig("I_2_3", "I_2_3", 3, workers=2))
    assert par == three_party


def test_winner_closure(three_party):
    rng = np.random.default_rng(0)
    for w in three_party.winners:
        g = apply(random_transformation(3, 3, rng), w.function)
        vc = score(g, w.lhv, 16, 1e-9, 1)[0]
        assert vc == pytest.approx(w.vc, abs=1e-6)


def test_result_json(three_party):
    out = three_party.to_json(with_functions=False)
    assert out["winners_dedup"] == 4
    assert "function" not in out["winners"][0]
    assert out["winners"][0]["lhv"] == "1"


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig("I_2_3", "I_2_3", 4)
    with pytest.raises(ValueError):
        SearchConfig("I_2_3", "I_2_3", 3, vc_tie_tolerance=0)
    with pytest.raises(ValueError):
        run_search(SearchConfig("I_2_3", "I_2_5", 3))


@pytest.mark.parametrize("key,spectrum,vc", [
    ("I_2_5_2", ("-3/2", "-1/4", "1"), 0.687157),
    ("I_2_7_3", ("-4/3", "-1/6", "1"), 0.683256),
])
def test_verify_candidate_passes(key, spectrum, vc):
    rep = verify_candidate(catalog.function(key), spectrum, vc, 1e-4)
    assert rep.ok, rep.to_json()


def test_verify_candidate_rejects_wrong_spectrum():
    rep = verify_candidate(mabk_function(2), ("-3/2", "-1/4", "1"), 1 / 2**0.5, 1e-4)
    assert not rep.spectrum_ok
    assert rep.vc_ok
    assert not rep.ok


def test_four_party_search():
    res = run_search(SearchConfig("I_3_3_3", "I_3_3_3", 3))
    assert res.candidates_evaluated == 648
    assert res.winner_count == 16
    assert res.min_vc == pytest.approx(0.5, abs=1e-6)
    found = {w.function.coeffs for w in res.winners}
    assert found == {catalog.function(f"I_4_3_{k}", corrected=True).coeffs for k in range(1, 17)}


@pytest.mark.slow
def test_table_one_zero_row():
    # seed I_4_3(3) against its own orbit: nothing reaches the five-party minimum
    res = run_search(SearchConfig("I_4_3_3", "I_4_3_3", 3))
    assert res.min_vc > 0.488756 + 1e-6
