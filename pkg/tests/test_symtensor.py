import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from closure14.symtensor import (RankError, SymTensor, canonical_keys, contract, outer, sym_delta,
                                 symmetrize)

from oracles import brute_sym_delta

small = st.integers(-3, 3)
vec3 = st.tuples(small, small, small)


def test_sym_delta_rank_two_is_identity():
    d = sym_delta(1)
    assert d[(1, 1)] == 1 and d[(1, 2)] == 0


def test_sym_delta_component_1122():
    assert sym_delta(2)[(1, 1, 2, 2)] == Fraction(1, 3)


def test_sym_delta_full_contraction_is_square_norm():
    v = (1, 2, 3)
    assert contract(sym_delta(2), [v] * 4)[()] == 196


@pytest.mark.parametrize("n", [0, -1])
def test_sym_delta_rejects_nonpositive_order(n):
    with pytest.raises(RankError):
        sym_delta(n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sym_delta_recursion_matches_permutation_average(n):
    d = sym_delta(n)
    for key in canonical_keys(2 * n):
        assert d[key] == brute_sym_delta(n, key)


@pytest.mark.parametrize("r", [0, 2, 4])
@given(lam=vec3)
def test_contraction_identity_for_even_r(r, lam):
    lam = np.array([Fraction(x) for x in lam], dtype=object)
    got = contract(sym_delta((r + 2) // 2), [lam] * r)
    ll = lam @ lam
    for a, k in itertools.product(range(3), repeat=2):
        rhs = (int(a == k) * ll ** (r // 2)
               + (r * lam[a] * lam[k] * ll ** ((r - 2) // 2) if r else 0)) / Fraction(r + 1)
        assert got[(a + 1, k + 1)] == rhs


def test_contraction_r2_example():
    got = contract(sym_delta(2), [(1, 2, 3), (1, 2, 3)])
    assert got[(1, 1)] == Fraction(16, 3)


@given(v=vec3, n=st.integers(1, 3))
def test_full_contraction_gives_power_of_norm(v, n):
    assert contract(sym_delta(n), [v] * (2 * n))[()] == sum(x * x for x in v) ** n


def test_contract_with_identity_matrices():
    assert contract(sym_delta(2), [np.eye(3, dtype=int)] * 2)[()] == 5


def test_contract_vector_dot():
    assert contract(sym_delta(1), [(1, 2, 3), (1, 2, 3)])[()] == 14


def test_contract_slot_overflow():
    with pytest.raises(RankError):
        contract(sym_delta(1), [(1, 0, 0)] * 3)


@given(u=vec3, w=vec3)
def test_contract_argument_order_is_irrelevant(u, w):
    M = np.array([[1, 2, 0], [2, -1, 3], [0, 3, 2]])
    t = sym_delta(3)
    assert contract(t, [u, M, w]) == contract(t, [w, u, M])


def test_symmetrize_two_index_average():
    assert symmetrize({(1, 2): 2, (2, 1): 0}, 2)[(1, 2)] == 1


def test_symmetrize_single_rank3_entry():
    s = symmetrize({(1, 2, 3): 6}, 3)
    assert all(s[p] == 1 for p in itertools.permutations((1, 2, 3)))


def test_symmetrize_shape_error():
    with pytest.raises(RankError):
        symmetrize({(1, 2): 1, (1,): 1}, 2)


@given(st.dictionaries(st.tuples(*[st.sampled_from((1, 2, 3))] * 3), small, max_size=6))
def test_symmetrize_is_idempotent(raw):
    s = symmetrize(raw, 3)
    assert symmetrize({k: s[k] for k in itertools.product((1, 2, 3), repeat=3)}, 3) == s


def test_outer_examples():
    assert outer(SymTensor(0, {(): 2}), SymTensor(0, {(): 3}))[()] == 6
    e1 = SymTensor(1, {(1,): 1})
    vv = outer(e1, e1)
    assert vv[(1, 1)] == 1 and vv[(1, 2)] == 0 and vv[(2, 2)] == 0
    assert outer(sym_delta(1), SymTensor(1, {(2,): 1}))[(1, 1, 2)] == Fraction(1, 3)


def test_lookup_is_order_independent():
    t = SymTensor(2, {(2, 1): 5})
    assert t[(1, 2)] == t[(2, 1)] == 5


def test_json_round_trip():
    t = sym_delta(2)
    assert SymTensor.from_json(t.to_json()) == t


def test_float_mode_tag():
    t = sym_delta(1).to_float()
    assert t.mode == "float" and t[(1, 1)] == 1.0
