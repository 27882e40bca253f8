"""Galilean boosts of the 14-component state and of the Lagrange multipliers.

State vectors are packed as

    [F, F1, F2, F3, F11, F12, F13, F22, F23, F33, G, G1, G2, G3]

with the symmetric block stored once per unordered pair.  The boost matrix
``X(v)`` acts on packed state vectors; a column belonging to an off-diagonal
pair ``(a, b)`` collects both orderings, so ``X(v) @ state`` reproduces the
tensor transformation exactly.  Multipliers are covariant: with
``W = diag(1, 1, 1, 1, 1, 2, 2, 1, 2, 1, 1, 1, 1, 1)`` they transform by
``W mu_a = X(-v)^T W mu_r``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .ring import PolynomialFamily, PsiRealization
from .series import MomentSeries, Multipliers, OrderError
from .verify import NumericTerms, SymbolicTerms, galilean_recipes
from .packed import points_array

PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
PAIR_INDEX = {}
for _n, (_a, _b) in enumerate(PAIRS):
    PAIR_INDEX[(_a, _b)] = _n
    PAIR_INDEX[(_b, _a)] = _n
F0, FV, FM, G0, GV = 0, 1, 4, 10, 11
WEIGHTS = [1, 1, 1, 1] + [1 if a == b else 2 for a, b in PAIRS] + [1, 1, 1, 1]
LABELS = ["F", "F1", "F2", "F3", "F11", "F12", "F13", "F22", "F23", "F33", "G", "G1", "G2", "G3"]


class VacuumError(ValueError):
    """Velocity requested for a state with vanishing mass density."""


def _frac_vec(v: Sequence) -> list:
    if len(v) != 3:
        raise ValueError("velocity must have three components")
    return [x if isinstance(x, float) else Fraction(x) for x in v]


def build_X(v: Sequence) -> np.ndarray:
    """The 14x14 boost matrix (object array of Fractions for rational ``v``)."""
    v = _frac_vec(v)
    zero = v[0] * 0
    X = np.empty((14, 14), dtype=object)
    X.fill(zero)
    v2 = sum(x * x for x in v)
    d = lambda i, a: 1 if i == a else 0  # noqa: E731
    # F row
    X[F0, F0] = zero + 1
    for i in range(3):
        X[FV + i, F0] = v[i]
        X[FV + i, FV + i] = zero + 1
    # symmetric block rows
    for n, (i, j) in enumerate(PAIRS):
        r = FM + n
        X[r, F0] = v[i] * v[j]
        for a in range(3):
            X[r, FV + a] = v[i] * d(j, a) + v[j] * d(i, a)
        # delta^i_(a delta^j_b), both orderings of the column pair collected
        X[r, r] = zero + 1
    # G row
    X[G0, F0] = v2
    for a in range(3):
        X[G0, FV + a] = 2 * v[a]
    X[G0, G0] = zero + 1
    # G_i rows
    for i in range(3):
        r = GV + i
        X[r, F0] = v2 * v[i]
        for a in range(3):
            X[r, FV + a] = v2 * d(i, a) + 2 * v[i] * v[a]
        for n, (a, b) in enumerate(PAIRS):
            # 2 delta^i_(a v_b) summed over the orderings of the pair
            val = d(i, a) * v[b] + d(i, b) * v[a]
            X[r, FM + n] = 2 * val if a != b else val
        X[r, G0] = v[i]
        X[r, r] = zero + 1
    return X


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.dot(A, B)


def identity14(exact: bool = True) -> np.ndarray:
    one = Fraction(1) if exact else 1.0
    I = np.empty((14, 14), dtype=object)
    I.fill(one * 0)
    for i in range(14):
        I[i, i] = one
    return I


def transform_state(state: Sequence, flux: Sequence[Sequence], v_tau: Sequence):
    """Boost a state and its three flux vectors.

    Returns ``(F_a, [F^1_a, F^2_a, F^3_a])`` with ``F_a = X(v) F_r`` and
    ``F^k_a = X(v) F^k_r + v^k F_a``.
    """
    X = build_X(v_tau)
    v = _frac_vec(v_tau)
    s = np.asarray(state, dtype=object)
    if s.shape != (14,) or len(flux) != 3:
        raise ValueError("state must have 14 components and flux three such vectors")
    Fa = X.dot(s)
    Fk = [X.dot(np.asarray(flux[k], dtype=object)) + v[k] * Fa for k in range(3)]
    return Fa, Fk


def velocity(state: Sequence) -> list:
    """``v^i = F^i / F``."""
    F = state[F0]
    if F == 0:
        raise VacuumError("mass density F vanishes; velocity undefined")
    return [state[FV + i] / F for i in range(3)]


# ---------------------------------------------------------------------------
# multipliers


def multipliers_to_vector(m: Multipliers) -> list:
    """Packed covariant 14-vector ``[mu, mu_i, mu_ij (pairs), lam, lam_i]``."""
    M = m.mu_mat
    return [m.mu, *m.mu_vec, *(M[a][b] for a, b in PAIRS), m.lam, *m.lam_vec]


def multipliers_from_vector(x: Sequence) -> Multipliers:
    M = [[None] * 3 for _ in range(3)]
    for n, (a, b) in enumerate(PAIRS):
        M[a][b] = M[b][a] = x[FM + n]
    return Multipliers(x[F0], x[G0], tuple(x[FV:FV + 3]), tuple(tuple(r) for r in M),
                       tuple(x[GV:GV + 3]))


def transform_multipliers(m: Multipliers, v_tau: Sequence) -> Multipliers:
    """Relative-frame multipliers to absolute-frame ones by the explicit formulas."""
    v = _frac_vec(v_tau)
    mu, lam = m.mu, m.lam
    mv, M, lv = list(m.mu_vec), [list(r) for r in m.mu_mat], list(m.lam_vec)
    v2 = sum(x * x for x in v)
    mv_v = sum(mv[i] * v[i] for i in range(3))
    lv_v = sum(lv[i] * v[i] for i in range(3))
    vMv = sum(M[i][j] * v[i] * v[j] for i in range(3) for j in range(3))
    mu_a = mu - mv_v + vMv + lam * v2 - lv_v * v2
    mv_a = tuple(mv[h] - 2 * sum(M[i][h] * v[i] for i in range(3)) - 2 * lam * v[h]
                 + lv[h] * v2 + 2 * lv_v * v[h] for h in range(3))
    M_a = tuple(tuple(M[h][k] - (lv[h] * v[k] + lv[k] * v[h]) for k in range(3)) for h in range(3))
    lam_a = lam - lv_v
    return Multipliers(mu_a, lam_a, mv_a, M_a, tuple(lv))


def transform_multipliers_matrix(m: Multipliers, v_tau: Sequence) -> Multipliers:
    """Same transformation through the boost matrix: ``W mu_a = X(-v)^T W mu_r``."""
    Xm = build_X([-x for x in _frac_vec(v_tau)])
    x = np.array(multipliers_to_vector(m), dtype=object)
    w = np.array(WEIGHTS, dtype=object)
    y = Xm.T.dot(w * x)
    out = [y[n] / WEIGHTS[n] if WEIGHTS[n] != 1 else y[n] for n in range(14)]
    return multipliers_from_vector(out)


def multiplier_derivatives(m: Multipliers) -> dict:
    """Closed-form derivatives of the absolute multipliers by the boost velocity.

    Keys ``mu`` (shape ``(3,)`` over ``i``), ``mu_vec`` (``[h, i]``),
    ``mu_mat`` (``[h, k, i]``), ``lam`` (``[i]``) and ``lam_vec`` (``[h, i]``).
    """
    lam = float(m.lam)
    mv = np.array(m.mu_vec, dtype=float)
    M = np.array(m.mu_mat, dtype=float)
    lv = np.array(m.lam_vec, dtype=float)
    I = np.eye(3)
    return {
        "mu": -mv,
        "mu_vec": -2 * M - 2 * lam * I,
        "mu_mat": -(np.einsum("h,ki->hki", lv, I) + np.einsum("k,hi->hki", lv, I)),
        "lam": -lv,
        "lam_vec": np.zeros((3, 3)),
    }


def _as_blocks(m: Multipliers) -> dict:
    return {"mu": float(m.mu), "mu_vec": np.array(m.mu_vec, dtype=float),
            "mu_mat": np.array(m.mu_mat, dtype=float), "lam": float(m.lam),
            "lam_vec": np.array(m.lam_vec, dtype=float)}


def finite_difference_derivatives(m_r: Multipliers, v_tau: Sequence, step: float = 1e-6) -> dict:
    """Central differences of :func:`transform_multipliers` in the boost velocity."""
    v = np.array(v_tau, dtype=float)
    cols = {k: [] for k in ("mu", "mu_vec", "mu_mat", "lam", "lam_vec")}
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        plus = _as_blocks(transform_multipliers(m_r.as_float(), tuple(v + e)))
        minus = _as_blocks(transform_multipliers(m_r.as_float(), tuple(v - e)))
        for k in cols:
            cols[k].append((np.asarray(plus[k]) - np.asarray(minus[k])) / (2 * step))
    return {k: np.moveaxis(np.array(c), 0, -1) for k, c in cols.items()}


# ---------------------------------------------------------------------------
# invariance residual of a potential


def galilean_residual(H: MomentSeries, at: Multipliers, real: Optional[PsiRealization] = None,
                      order: Optional[int] = None):
    """Both invariance expressions on ``h' = dH/dmu`` and ``h'^k = dH/dmu_k`` at ``at``.

    Returns ``(r_i, r_ki)``.  The series is truncated at ``order`` (default
    ``H.max_order - 2``); exact at rational points, float otherwise.
    """
    order = H.max_order - 2 if order is None else order
    if order < 0 or H.max_order < order + 2:
        raise OrderError("the invariance residual needs two orders of headroom")
    recipes = galilean_recipes()
    if at.exact:
        real = real or PolynomialFamily()
        sym = SymbolicTerms({"S": H}, order)
        out = []
        for name in ("scalar_invariance", "vector_invariance"):
            total = None
            for t in recipes[name]:
                s = sym.series(t).truncate(order)
                val = np.asarray(s.evaluate_exact(at, real), dtype=object)
                total = val if total is None else total + val
            out.append(total)
        return out[0], out[1]
    from .ring import ExpFamily
    real = real or ExpFamily()
    num = NumericTerms({"S": H}, order, points_array([at]), real)
    out = []
    for name in ("scalar_invariance", "vector_invariance"):
        vals = sum(num.graded(t).sum(axis=0) for t in recipes[name])
        out.append(vals[0])
    return out[0], out[1]


def matrix_to_json(X: np.ndarray) -> list:
    return [[str(Fraction(x)) if not isinstance(x, float) else repr(x) for x in row] for row in X]
