import math
from fractions import Fraction

import numpy as np
import pytest

from closure14.ring import LambdaScalar, PolynomialFamily
from closure14.series import MomentSeries, Multipliers, OrderError, random_rational_points
from closure14.solutions import (AdmissibilityError, InvariantFunction, SolutionParams,
                                 build_DeltaH, build_H, build_H1, build_Hstar0, build_ttHk,
                                 double_factorial)
from closure14.verify import HeadroomError, verify_potential

from params import random_params

F = Fraction
REAL = PolynomialFamily()


def mono(**kw):
    names = ["mu", "m1", "m2", "m3", "m11", "m12", "m13", "m22", "m23", "m33", "l1", "l2", "l3"]
    return tuple(kw.get(n, 0) for n in names)


def at(lam=2, lv=(0, 0, 0), M=((0, 0, 0), (0, 0, 0), (0, 0, 0)), mv=(0, 0, 0), mu=0):
    return Multipliers(F(mu), F(lam), tuple(map(F, mv)), tuple(tuple(map(F, r)) for r in M),
                       tuple(map(F, lv)))


def test_double_factorial():
    assert [double_factorial(n) for n in (-1, 0, 1, 3, 5, 6)] == [1, 1, 1, 3, 15, 48]


def test_H1_equilibrium_part_is_psi0():
    g = build_H1(3).grade(0)
    assert len(g) == 1 and g.coefficient((), mono()) == LambdaScalar.psi(0)


def test_H1_trace_coefficient():
    c = build_H1(3).coefficient((), mono(m11=1))
    assert c == LambdaScalar.psi(0, e=-1, c=F(-1, 2))


def test_H1_mu_vec_lam_vec_coefficient():
    c = build_H1(3).coefficient((), mono(m1=1, l1=1))
    want = LambdaScalar.psi(0, e=-2, c=F(1, 2)) + LambdaScalar.psi(0, 1, e=-1, c=F(-1, 2))
    assert c == want


def test_zero_params_give_zero_series():
    P = SolutionParams()
    assert build_Hstar0(P, 4).is_zero()
    assert build_ttHk(P, 4).is_zero()
    assert build_DeltaH(P, 4).is_zero()


@pytest.mark.parametrize("seed", range(5))
def test_Hstar0_vanishes_at_equilibrium(seed):
    H = build_Hstar0(random_params(seed), 4)
    assert H.evaluate_exact(at(lam=F(3, 2), mu=1), REAL) == 0


def test_Hstar0_single_psi_constant():
    H = build_Hstar0(SolutionParams(psi_const={0: 2}), 4)
    assert H.evaluate_exact(at(lv=(1, 0, 0)), REAL) == 1


def test_ttHk_with_F_equal_G1():
    P = SolutionParams(F=InvariantFunction.from_json("G1"))
    p = at(lv=(1, F(1, 2), -1), M=((1, 2, 0), (2, -1, F(1, 3)), (0, F(1, 3), 2)))
    got = build_ttHk(P, 6).evaluate_exact(p, REAL)
    l = np.array(p.lam_vec, dtype=object)
    M = np.array(p.mu_mat, dtype=object)
    G1 = (l @ l) * np.trace(M) - l @ M @ l
    assert list(got) == list(l * G1)


def test_ttHk_beta1_at_sample_point(sample_point):
    # -(5/4)[4*1*1 + 1*(1*1 + 2*1)] from the beta_1 bracket, plus
    # 5 * d/dlam_1 [G0 (lam mll - lam^2 G0)] = 5 * (2*1*(2 - 4) + 1*(4 - 8)) = -40
    got = build_ttHk(SolutionParams(beta={1: 1}), 6).evaluate_exact(sample_point, REAL)
    assert list(got) == [F(-35, 4) - 40, 0, 0]


@pytest.mark.parametrize("seed", range(4))
def test_DeltaH_vanishes_at_equilibrium(seed):
    H = build_DeltaH(random_params(seed), 4)
    assert H.evaluate_exact(at(lam=F(5, 4), mu=F(1, 2)), REAL) == 0


@pytest.mark.parametrize("seed", range(6))
def test_property_one_mu_degree(seed):
    H = build_DeltaH(random_params(seed, with_ttH0=True), 4)
    for n in range(1, 5):
        assert H.grade(n).mu_degree() <= n - 1


def test_beta0_not_admissible():
    with pytest.raises(AdmissibilityError):
        SolutionParams(beta={0: 1})


def test_psi_const_odd_index_rejected():
    with pytest.raises(AdmissibilityError):
        SolutionParams(psi_const={1: 1})


def test_ttH0_must_avoid_mu_vec():
    from closure14.series import make_delta_term
    with pytest.raises(AdmissibilityError):
        SolutionParams(ttH0=make_delta_term(2, 0, 0, 0, 1))


@pytest.mark.parametrize("seed", range(3))
def test_params_json_round_trip(seed):
    P = random_params(seed, with_ttH0=True)
    Q = SolutionParams.from_json(P.to_json())
    assert Q.to_json() == P.to_json()
    assert build_DeltaH(Q, 3) == build_DeltaH(P, 3)


def test_invariant_function_gradient():
    f = InvariantFunction.from_json("G1^2")
    assert f.value(2, 3, 5) == 9
    assert tuple(f.grad(2, 3, 5)) == (0, 6, 0)


# -- residual verification ----------------------------------------------------------


def test_H1_core_conditions_float_and_exact():
    for r in verify_potential(build_H1(5), "core", 3, points=30, symbolic=True):
        assert r.passed and r.exact_zero and r.rational_zero, r.condition


def test_wrong_series_fails_core():
    mv = MomentSeries.mu_vec()
    H = mv.outer(mv).contract(0, 1)
    reps = {r.condition: r for r in verify_potential(H, "core", 1, points=20, symbolic=False)}
    # d2H/dmu dmu_ij = 0 while d2H/dmu_i dmu_j = 2 delta_ij: relative residual 1 at every point
    assert reps["mixed_mu_mat"].max_residual == pytest.approx(1.0)
    assert not reps["mixed_mu_mat"].passed


@pytest.mark.parametrize("seed", range(10))
def test_Hstar0_conditions_random_params(seed):
    P = random_params(seed)
    for r in verify_potential(build_Hstar0(P, 5), "hstar0", 3, points=20, symbolic=True):
        assert r.passed and r.exact_zero, r.condition


@pytest.mark.parametrize("seed", range(5))
def test_ttHk_vector_conditions_random_params(seed):
    P = random_params(seed)
    n = 3
    reps = verify_potential(build_ttHk(P, n + 2), "vector", n, points=20,
                            companion=build_Hstar0(P, n + 2), symbolic=True)
    for r in reps:
        assert r.passed and r.exact_zero, r.condition


def test_injected_beta0_breaks_vector_conditions():
    P = SolutionParams(beta={1: 1})
    n = 3
    reps = verify_potential(build_ttHk(P, n + 2, inject_beta0=1), "vector", n, points=20,
                            companion=build_Hstar0(P, n + 2, inject_beta0=1), symbolic=False)
    assert not all(r.passed for r in reps)


@pytest.mark.parametrize("seed", range(3))
def test_full_potential_core_conditions(seed):
    H = build_H(random_params(seed, with_ttH0=True), 5)
    for r in verify_potential(H, "core", 3, points=20, symbolic=True, spot_points=1):
        assert r.passed and r.exact_zero and r.rational_zero, r.condition


def test_headroom_error():
    with pytest.raises(HeadroomError):
        verify_potential(build_H1(3), "core", 2)
    assert issubclass(HeadroomError, OrderError)
