import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from closure14.galilean import (F0, FM, FV, G0, GV, LABELS, PAIR_INDEX, VacuumError, build_X,
                                finite_difference_derivatives, galilean_residual, identity14,
                                multiplier_derivatives, multipliers_from_vector,
                                multipliers_to_vector, transform_multipliers,
                                transform_multipliers_matrix, transform_state, velocity)
from closure14.series import (MomentSeries, Multipliers, OrderError, make_delta_term, random_points,
                              random_rational_points)
from closure14.solutions import build_DeltaH, build_H1

from params import random_params

F = Fraction
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=7)
velocities = st.lists(rationals, min_size=3, max_size=3)


def _rand_velocities(n, seed):
    rng = random.Random(seed)
    return [[F(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(3)] for _ in range(n)]


def _sym_tensor(rng):
    M = [[None] * 3 for _ in range(3)]
    for a in range(3):
        for b in range(a, 3):
            M[a][b] = M[b][a] = F(rng.randint(-5, 5), rng.randint(1, 4))
    return M


def test_zero_velocity_is_identity():
    assert (build_X([0, 0, 0]) == identity14()).all()


def test_published_entries():
    X = build_X([1, 0, 0])
    assert X[G0, F0] == 1
    assert X[GV + 0, FV + 0] == 3
    X = build_X([1, 2, 0])
    assert X[FM + PAIR_INDEX[(0, 0)], F0] == 1
    assert X[FM + PAIR_INDEX[(0, 1)], F0] == 2


def test_block_lower_triangular():
    X = build_X([F(1, 2), -1, 3])
    blocks = [range(0, 1), range(1, 4), range(4, 10), range(10, 11), range(11, 14)]
    # within the F family and within the G family, rows only see lower blocks
    for bi, rows in enumerate(blocks[:3]):
        for cols in blocks[bi + 1:]:
            assert all(X[r, c] == 0 for r in rows for c in cols)
    assert all(X[G0, c] == 0 for c in range(FM, FM + 6))
    assert all(X[G0, c] == 0 for c in range(GV, GV + 3))


@pytest.mark.parametrize("v", _rand_velocities(20, 1))
def test_inverse_is_negated_velocity(v):
    assert (build_X([-x for x in v]).dot(build_X(v)) == identity14()).all()


@pytest.mark.parametrize("u,w", list(zip(_rand_velocities(20, 2), _rand_velocities(20, 3))))
def test_composition(u, w):
    assert (build_X(u).dot(build_X(w)) == build_X([a + b for a, b in zip(u, w)])).all()


def test_matrix_matches_tensor_law():
    # mass, momentum, stress and energy moments of one particle with velocity c
    # boost by adding v to c; with weight m the packed moments are polynomial in c.
    def moments(c):
        c2 = sum(x * x for x in c)
        s = [F(1), *c] + [c[a] * c[b] for a, b in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]]
        return np.array(s + [c2] + [c2 * x for x in c], dtype=object)

    c = [F(1, 3), F(-2), F(5, 4)]
    v = [F(2, 3), F(1, 2), F(-1)]
    assert (build_X(v).dot(moments(c)) == moments([a + b for a, b in zip(c, v)])).all()


@given(velocities, st.lists(rationals, min_size=14, max_size=14))
def test_state_round_trip(v, s):
    flux = [[x * (k + 1) for x in s] for k in range(3)]
    Fa, Fk = transform_state(s, flux, v)
    back, back_k = transform_state(Fa, Fk, [-x for x in v])
    assert list(back) == s
    assert [list(f) for f in back_k] == flux


@given(velocities, velocities, st.lists(rationals, min_size=14, max_size=14))
def test_state_composition(u, w, s):
    flux = [[x - k for x in s] for k in range(3)]
    a, ak = transform_state(*transform_state(s, flux, u), w)
    b, bk = transform_state(s, flux, [x + y for x, y in zip(u, w)])
    assert (a == b).all() and all((x == y).all() for x, y in zip(ak, bk))


def test_zero_velocity_state_identity():
    s = list(range(14))
    Fa, Fk = transform_state(s, [s, s, s], [0, 0, 0])
    assert list(Fa) == s


def test_velocity_and_vacuum():
    s = [F(2), F(1), F(4), F(-2)] + [0] * 10
    assert velocity(s) == [F(1, 2), F(2), F(-1)]
    with pytest.raises(VacuumError):
        velocity([0] * 14)


# -- multipliers ----------------------------------------------------------------------


def _rand_multipliers(n, seed):
    rng = random.Random(seed)
    r = lambda: F(rng.randint(-7, 7), rng.randint(1, 5))  # noqa: E731
    return [Multipliers(r(), r(), (r(), r(), r()), tuple(map(tuple, _sym_tensor(rng))),
                        (r(), r(), r())) for _ in range(n)]


def test_published_multiplier_example():
    m = Multipliers(F(0), F(1), (0, 0, 0), ((0,) * 3,) * 3, (F(0), F(1), F(0)))
    a = transform_multipliers(m, [1, 0, 0])
    assert a.mu_mat[0][1] == a.mu_mat[1][0] == -1
    assert a.lam_vec == m.lam_vec


@pytest.mark.parametrize("m,v", list(zip(_rand_multipliers(20, 4), _rand_velocities(20, 5))))
def test_explicit_law_equals_matrix_law(m, v):
    a, b = transform_multipliers(m, v), transform_multipliers_matrix(m, v)
    assert multipliers_to_vector(a) == multipliers_to_vector(b)
    assert a.lam_vec == m.lam_vec


def test_multiplier_zero_velocity_and_vector_round_trip():
    m = _rand_multipliers(1, 6)[0]
    assert multipliers_to_vector(transform_multipliers(m, [0, 0, 0])) == multipliers_to_vector(m)
    assert multipliers_to_vector(multipliers_from_vector(multipliers_to_vector(m))) == \
        multipliers_to_vector(m)


def test_pairing_is_invariant():
    # mu_A F^A is unchanged under a boost of both state and multipliers
    m = _rand_multipliers(1, 7)[0]
    v = [F(1, 2), F(-1, 3), F(2)]
    s = np.array([F(k + 1, 3) for k in range(14)], dtype=object)
    weights = [1, 1, 1, 1, 1, 2, 2, 1, 2, 1, 1, 1, 1, 1]
    x_r = np.array(multipliers_to_vector(m), dtype=object)
    x_a = np.array(multipliers_to_vector(transform_multipliers(m, v)), dtype=object)
    s_a = build_X(v).dot(s)
    assert sum(w * a * b for w, a, b in zip(weights, x_r, s)) == \
        sum(w * a * b for w, a, b in zip(weights, x_a, s_a))


@pytest.mark.parametrize("seed", range(5))
def test_derivatives_match_finite_differences(seed):
    m_r = _rand_multipliers(1, 10 + seed)[0]
    for v in ([0, 0, 0], [float(x) for x in _rand_velocities(1, 20 + seed)[0]]):
        closed = multiplier_derivatives(transform_multipliers(m_r.as_float(), v))
        fd = finite_difference_derivatives(m_r, v, step=1e-5)
        for k in closed:
            scale = max(1.0, float(np.max(np.abs(closed[k]))))
            assert np.max(np.abs(closed[k] - fd[k])) / scale <= 1e-6, k


# -- invariance residual ----------------------------------------------------------------


def test_zero_series_residual():
    r_i, r_ki = galilean_residual(MomentSeries.zero(0, 6), random_rational_points(1, 0)[0])
    assert all(x == 0 for x in np.ravel(r_i)) and all(x == 0 for x in np.ravel(r_ki))


def test_particular_potential_residual_float():
    H = build_H1(5)
    worst = 0.0
    for pt in random_points(50, seed=11):
        r_i, r_ki = galilean_residual(H, pt)
        worst = max(worst, float(np.max(np.abs(r_i))), float(np.max(np.abs(r_ki))))
    assert worst <= 1e-9


def test_full_potential_residual_exact():
    H = build_H1(6) + build_DeltaH(random_params(2), 6)
    for pt in random_rational_points(3, seed=12):
        r_i, r_ki = galilean_residual(H, pt)
        assert all(x == 0 for x in np.ravel(r_i)) and all(x == 0 for x in np.ravel(r_ki))


def test_wrong_series_residual():
    # H = mu_i mu_i: h' = 0 so the scalar part vanishes; h'^k = 2 mu_k gives
    # r^{ki} = 4 mu^{ki} + 4 lam delta^{ki}
    H = make_delta_term(2, 0, 0, 0, 1, max_order=4)
    pt = random_rational_points(1, seed=13)[0]
    r_i, r_ki = galilean_residual(H, pt, order=2)
    assert all(x == 0 for x in np.ravel(r_i))
    want = 4 * np.array(pt.mu_mat, dtype=object) + 4 * pt.lam * np.eye(3, dtype=int).astype(object)
    assert (np.asarray(r_ki) == want).all()


def test_residual_needs_headroom():
    with pytest.raises(OrderError):
        galilean_residual(build_H1(3), random_rational_points(1, 0)[0], order=2)


def test_labels():
    assert len(LABELS) == 14 and LABELS[G0] == "G"
