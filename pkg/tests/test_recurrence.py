import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from closure14.recurrence import (NORMALIZATIONS, NormalizationError, ThetaTable, close_table,
                                  reduce_p, structural_relations, verify_table)
from closure14.ring import LambdaScalar
from closure14.series import ParityError

keys = st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6),
                 st.integers(0, 6)).filter(lambda k: (k[0] + k[2]) % 2 == 0)


def random_zero_seeds(order: int, rng: random.Random) -> dict:
    """Admissible seeds: a random subset of keys, each at its forced value (zero).

    Some keys are given in unfolded form ``(p+2, q-1, r, s-1)``.
    """
    ks = close_table({}, order).table.canonical_keys()
    seeds = {}
    for p, q, r, s in rng.sample(ks, rng.randint(1, len(ks) // 3)):
        if q >= 1 and s >= 1 and rng.random() < 0.5:
            seeds[(p + 2, q - 1, r, s - 1)] = 0
        else:
            seeds[(p, q, r, s)] = 0
    return seeds


def test_reduce_p_examples():
    assert reduce_p((2, 0, 0, 0)) == (0, 1, 0, 1)
    assert reduce_p((3, 1, 1, 2)) == (1, 2, 1, 3)
    assert reduce_p((0, 5, 2, 7)) == (0, 5, 2, 7)


@given(keys)
def test_reduce_p_idempotent_and_invariants(k):
    red = reduce_p(k)
    assert reduce_p(red) == red
    assert red[0] in (0, 1) and red[0] == k[0] % 2
    assert red[0] + 2 * red[3] == k[0] + 2 * k[3]
    assert red[1] - red[3] == k[1] - k[3]


def test_empty_seeds_give_zero_table():
    res = close_table({}, 5)
    assert res.consistent and not res.undetermined
    assert all(v.is_zero() for v in res.table.entries.values())
    assert verify_table(res.table) == []


def test_zero_table_verifies():
    assert verify_table(ThetaTable(4)) == []


def test_derivative_propagation_from_seed():
    # theta_{0,0,2,2} is the lam-derivative of theta_{1,0,1,1}
    res = close_table({(1, 0, 1, 1): 1}, 4)
    assert res.table.get((0, 0, 2, 2)).is_zero()


@pytest.mark.parametrize("seed", [(1, 0, 1, 1), (0, 0, 2, 1), (0, 1, 2, 2), (1, 2, 1, 3)])
def test_nonzero_seed_is_reported_inconsistent(seed):
    # the full relation system forces theta to vanish identically
    res = close_table({seed: LambdaScalar.lam_power(-1, 3)}, 5)
    assert not res.consistent
    assert {v.relation for v in res.conflicts} <= {"lam_shift", "galilean", "duplicate_seed"}


@pytest.mark.parametrize("key,name", [((0, 1, 2, 0), "even_s0_zero"),
                                      ((0, 0, 0, 3), "equilibrium_zero"),
                                      ((1, 1, 1, 0), "odd_s0_zero")])
def test_seed_against_normalization_raises(key, name):
    with pytest.raises(NormalizationError, match=name):
        close_table({key: 1}, 4)


@pytest.mark.parametrize("key,name", [((0, 1, 2, 0), "even_s0_zero"),
                                      ((0, 0, 0, 2), "equilibrium_zero"),
                                      ((1, 0, 1, 0), "odd_s0_zero")])
def test_injected_violation_detected(key, name):
    t = close_table({}, 5).table
    entries = dict(t.entries)
    entries[key] = LambdaScalar.const(1)
    found = {v.relation for v in verify_table(ThetaTable(5, t.max_s, entries))}
    assert name in found


def test_injected_relation_violation_detected():
    t = close_table({}, 4).table
    entries = dict(t.entries)
    entries[(1, 1, 1, 2)] = LambdaScalar.lam_power(2)
    found = {v.relation for v in verify_table(ThetaTable(4, t.max_s, entries))}
    assert found & {"lam_shift", "galilean", "mat_shift"}


@pytest.mark.parametrize("trial", range(10))
def test_round_trip_random_admissible_seeds(trial):
    rng = random.Random(trial)
    order = rng.randint(2, 6)
    res = close_table(random_zero_seeds(order, rng), order)
    assert res.consistent and not res.undetermined
    assert verify_table(res.table) == []


def test_structural_relations_reach_p5():
    rels = structural_relations(5, 3)
    assert max(k[0] for r in rels for k in r.keys()) >= 5


def test_parity_enforced():
    with pytest.raises(ParityError):
        ThetaTable(3, None, {(1, 0, 0, 1): LambdaScalar.const(1)})


def test_json_round_trip():
    t = ThetaTable(3, None, {(0, 1, 2, 1): LambdaScalar.lam_power(-1, Fraction(-3, 2))})
    assert ThetaTable.from_json(t.to_json()) == t


def test_normalization_names():
    assert NORMALIZATIONS == ("even_s0_zero", "equilibrium_zero", "odd_s0_zero")
