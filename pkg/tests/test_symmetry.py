from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multibell import catalog
from multibell.symmetry import (
    BudgetExceeded,
    Transformation,
    apply,
    canonical_form,
    equivalent,
    find_transformation,
    generators,
    group_order,
    invariant_certificate,
    orbit,
    parse_recipe,
    random_transformation,
)
from strategies import bell_functions

seeds = st.integers(0, 2**32 - 1)


def bfs_orbit(f):
    """Closure under the generators, independent of the vectorized enumeration."""
    gens = generators(f.n, f.d)
    seen = {f.coeffs}
    todo = deque([f])
    while todo:
        g = todo.popleft()
        for t in gens:
            h = apply(t, g)
            if h.coeffs not in seen:
                seen.add(h.coeffs)
                todo.append(h)
    return len(seen)


@settings(max_examples=40)
@given(bell_functions(), seeds, seeds)
def test_action_is_a_group_action(f, s1, s2):
    rng = np.random.default_rng(s1 ^ s2)
    g = random_transformation(f.n, f.d, rng)
    h = random_transformation(f.n, f.d, rng)
    assert apply(g @ h, f) == apply(g, apply(h, f))
    assert apply(g.inverse(), apply(g, f)) == f
    assert apply(Transformation.identity(f.n, f.d), f) == f


@settings(max_examples=25)
@given(bell_functions(n=2, d=3), seeds)
def test_canonical_form_is_invariant(f, seed):
    g = random_transformation(f.n, f.d, np.random.default_rng(seed))
    assert canonical_form(apply(g, f)) == canonical_form(f)
    assert invariant_certificate(apply(g, f)) == invariant_certificate(f)


@settings(max_examples=25)
@given(bell_functions(n=2, d=3), seeds)
def test_find_transformation(f, seed):
    g = apply(random_transformation(f.n, f.d, np.random.default_rng(seed)), f)
    t = find_transformation(f, g)
    assert t is not None and apply(t, f) == g


def test_shift_kernel():
    # equal and opposite shifts on both settings of two parties cancel
    f = catalog.function("I_3_3_1")
    t = Transformation.make(3, shift=[[1, 1], [2, 2], [0, 0]])
    assert apply(t, f) == f


@pytest.mark.parametrize("key,size", [
    ("I_2_3", 54), ("I_3_3_1", 648), ("I_2_5", 250), ("I_3_5_1", 1250), ("I_4_3_2", 11664),
])
def test_orbit_sizes(key, size):
    f = catalog.function(key)
    rep = orbit(f)
    assert rep.size == size
    assert rep.size * rep.stabilizer_order == group_order(f.n, f.d)


@pytest.mark.parametrize("key,size", [("I_2_3", 54), ("I_3_3_1", 648)])
def test_orbit_sizes_by_bfs(key, size):
    assert bfs_orbit(catalog.function(key)) == size


def test_orbit_members_are_distinct():
    rep = orbit(catalog.function("I_2_3"), representatives=True)
    assert len({f.coeffs for f in rep.representatives}) == 54


def test_orbit_budget():
    with pytest.raises(BudgetExceeded):
        orbit(catalog.function("I_4_3_1"), budget=100)


def test_recipe_example():
    src = catalog.function("I_3_3_1")
    rule = catalog.get("I_3_3_2").recipes[0].rule
    assert apply(parse_recipe(rule, 3, 3), src) == catalog.function("I_3_3_2")


def test_recipe_latex_spelling():
    a = parse_recipe(r"/.\{a_1\rightarrow {\rm Mod}[a_1+2,3], B_0\leftrightarrow B_1\}", 2, 3)
    b = parse_recipe("{a_1->Mod[a_1+2,3], B_0<->B_1}", 2, 3)
    assert a == b
    assert a.shift[0] == (0, 2) and a.swap == (False, True)


def test_recipe_identity():
    assert parse_recipe("{}", 3, 3) == Transformation.identity(3, 3)


def test_recipe_party_map_labels():
    t = parse_recipe("{ABCD->CBAD, b_1->Mod[b_1+2,3]}", 4, 3)
    assert t.perm == (2, 1, 0, 3)
    old = parse_recipe("{ABCD->CBAD, b_1->Mod[b_1+2,3]}", 4, 3, labels="old")
    assert old.shift[1] == (0, 2)


@pytest.mark.parametrize("bad", ["{a_1->Mod[a_1+2,5]}", "{q_1->Mod[q_1+1,3]}", "{A_0<->B_1}", "{ABC->ABD}"])
def test_recipe_errors(bad):
    with pytest.raises(ValueError):
        parse_recipe(bad, 3, 3)


def test_transformation_json_round_trip():
    t = random_transformation(4, 3, np.random.default_rng(5))
    assert Transformation.from_json(t.to_json(), 3) == t


def test_equivalence_queries():
    assert equivalent(catalog.function("I_3_3_1"), catalog.function("I_3_3_2")) == "equivalent"
    assert equivalent(catalog.function("I_4_3_1"), catalog.function("I_4_3_2")) == "inequivalent"
    assert equivalent(catalog.function("I_3_3_1"), catalog.function("I_3_3_2"), budget=10) == "unknown"


def test_robust_four_party_functions_are_inequivalent():
    fs = [catalog.function(f"I_4_3_{k}", corrected=True) for k in range(1, 5)]
    assert len({canonical_form(f).coeffs for f in fs}) == 4


def test_five_party_certificates_differ():
    f1 = catalog.function("I_5_3_1")
    f2 = catalog.function("I_5_3_2")
    assert invariant_certificate(f1) != invariant_certificate(f2)
