import itertools
from fractions import Fraction

import numpy as np
import pytest

from closure14.closure import (Beta0Ansatz, antisym_ki, antisym_profile, check_beta0, delta_flux,
                               flux_tensors)
from closure14.ring import ExpFamily, PolynomialFamily
from closure14.series import MomentSeries, Multipliers, make_delta_term, random_points, \
    random_rational_points
from closure14.solutions import InvariantFunction, SolutionParams, build_DeltaH, build_H, build_H1

from oracles import dense_sym_delta, eye_frac
from params import random_params

F = Fraction
REAL = PolynomialFamily()


def _max(a):
    return max(abs(x) for x in np.asarray(a).ravel())


def test_zero_potential_gives_zero_fluxes(sample_point):
    T = flux_tensors(MomentSeries.zero(0, 10), 3, sample_point)
    assert all(_max(a) == 0 for a in T.F_kij + T.G_ki)
    assert T.h_prime == 0 and T.relation_residual == 0


def test_H1_fluxes_symmetric_through_order_two():
    for pt in random_rational_points(3, seed=4):
        for n, aF, aG in antisym_profile(flux_tensors(build_H1(4), 2, pt)):
            assert aF == 0 and aG == 0


def test_single_term_flux_matches_permutation_oracle():
    c = F(3, 7)
    H = make_delta_term(2, 1, 0, 0, c)
    pt = Multipliers(F(0), F(1), (F(1), F(-2), F(1, 2)), ((0,) * 3,) * 3, (0, 0, 0))
    T = flux_tensors(H, 1, pt)
    D4 = dense_sym_delta(2)
    mv = np.array(pt.mu_vec, dtype=object)
    want = 2 * c * np.einsum("kaij,a->kij", D4, mv)
    total = T.F_kij[0] + T.F_kij[1]
    assert (total == want).all()


def test_flux_is_symmetric_in_last_pair():
    T = flux_tensors(build_H(random_params(3), 5), 3, random_rational_points(1, seed=2)[0])
    for a in T.F_kij:
        assert (a == np.swapaxes(a, 1, 2)).all()


@pytest.mark.parametrize("seed", range(3))
def test_density_flux_relation_holds_exactly(seed):
    T = flux_tensors(build_H(random_params(seed), 5), 3, random_rational_points(1, seed)[0])
    assert T.relation_residual == 0


def test_antisym_of_symmetric_input_is_zero():
    S = np.einsum("i,j,k->ijk", *[np.array([1.0, 2.0, 3.0])] * 3)
    assert np.max(np.abs(antisym_ki(S))) == 0


# -- closed-form remainders ---------------------------------------------------------


def test_delta_flux_zero_params(sample_point):
    dF, dG = delta_flux(SolutionParams(), sample_point)
    assert _max(dF) == 0 and _max(dG) == 0


def test_delta_flux_beta1_sample_point(sample_point):
    # -(5/4)*4*mll*S + 2*5*G0*lam*S - (5/4) lam^k (2 G0 M - 4 lam(Ml))^{ij}
    # = 15 S + (5/2) e1 e1 e1 with S^{kij} = delta^{k(i} lam^{j)}
    dF, _ = delta_flux(SolutionParams(beta={1: 1}), sample_point)
    assert dF[0, 0, 0] == F(35, 2)
    assert dF[1, 0, 1] == dF[1, 1, 0] == F(15, 2)
    assert dF[0, 1, 1] == 0
    assert antisym_ki(dF)[1, 0, 1] == F(15, 4)


def test_delta_flux_F_equal_G1():
    P = SolutionParams(F=InvariantFunction.from_json("G1"))
    pt = random_rational_points(1, seed=9)[0]
    dF, dG = delta_flux(P, pt)
    l = np.array(pt.lam_vec, dtype=object)
    want = np.einsum("k,ij->kij", l, (l @ l) * eye_frac() - np.outer(l, l))
    assert (dF == want).all()


@pytest.mark.parametrize("seed", range(4))
def test_closed_form_equals_series_route(seed):
    P = random_params(seed)
    pt = random_rational_points(1, seed + 20)[0]
    dF, dG = delta_flux(P, pt)
    parts = [delta_flux(P, pt, order=n) for n in range(9)]
    assert (sum(p[0] for p in parts) == dF).all()
    assert (sum(p[1] for p in parts) == dG).all()


@pytest.mark.parametrize("seed", range(4))
def test_remainder_carries_flux_antisymmetry_exact(seed):
    P = random_params(seed)
    pt = random_rational_points(1, seed + 40)[0]
    T = flux_tensors(build_DeltaH(P, 5), 3, pt)
    for n in range(4):
        dF, dG = delta_flux(P, pt, order=n)
        assert (antisym_ki(T.F_kij[n]) == antisym_ki(dF)).all()
        assert (antisym_ki(T.G_ki[n]) == antisym_ki(dG)).all()


def test_remainder_carries_flux_antisymmetry_float():
    P = random_params(7)
    H = build_DeltaH(P, 5)
    for pt in random_points(50, seed=8):
        T = flux_tensors(H, 3, pt, REAL)
        tF = sum(antisym_ki(a) for a in T.F_kij)
        tG = sum(antisym_ki(a) for a in T.G_ki)
        parts = [delta_flux(P, pt, order=n) for n in range(4)]
        dF = sum(antisym_ki(p[0]) for p in parts)
        dG = sum(antisym_ki(p[1]) for p in parts)
        assert np.max(np.abs(tF - dF)) <= 1e-9
        assert np.max(np.abs(tG - dG)) <= 1e-9


# -- beta_0 obstruction ---------------------------------------------------------------


@pytest.mark.parametrize("degree", range(5))
def test_beta0_zero_is_solvable(degree):
    rep = check_beta0(Beta0Ansatz(beta0=0, degree=degree))
    assert rep.solvable and rep.f1_f2_vanish and rep.f7_relation_holds


@pytest.mark.parametrize("degree", range(5))
@pytest.mark.parametrize("beta0", [1, F(-2, 3)])
def test_beta0_nonzero_is_unsolvable(degree, beta0):
    rep = check_beta0(Beta0Ansatz(beta0=beta0, degree=degree))
    assert not rep.solvable and rep.particular is None


def test_zero_ansatz_has_zero_residual():
    rep = check_beta0(Beta0Ansatz())
    assert rep.residual_zero


def test_nullspace_member_has_zero_residual():
    rep = check_beta0(Beta0Ansatz(degree=2))
    for v in rep.nullspace:
        assert check_beta0(Beta0Ansatz(f=v, degree=2)).residual_zero


def test_ansatz_validation():
    with pytest.raises(ValueError):
        Beta0Ansatz(f=[[1]] * 7)
    with pytest.raises(ValueError):
        Beta0Ansatz(f=[[1, 1, 1]] + [[]] * 7, degree=1)


def test_closure_tensor_json_is_lexicographic(sample_point):
    T = flux_tensors(build_H1(3), 1, sample_point)
    d = T.to_json()
    flat = d["F_kij"][0]
    assert len(flat) == 27
    for pos, idx in enumerate(itertools.product(range(3), repeat=3)):
        assert flat[pos] == str(T.F_kij[0][idx])
