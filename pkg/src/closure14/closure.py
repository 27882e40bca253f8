"""Closure fluxes, their antisymmetric parts, and the beta_0 obstruction.

The highest fluxes are second derivatives of the potential ``H``:

    F^{kij} = d^2 H / d mu_k d mu_ij ,   G^{ki} = d^2 H / d mu_k d lam_i .

:func:`flux_tensors` extracts them order by order; :func:`antisym_profile`
measures the part antisymmetric in ``(k, i)``.  :func:`delta_flux` gives the
closed-form non-symmetric remainders of the correction potential, which must
carry that whole antisymmetric part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .ring import PolynomialFamily, PsiRealization
from .series import EXACT, MomentSeries, Multipliers, OrderError, sum_series
from .solutions import Blocks, InvariantFunction, SolutionParams, blocks
from .thermo import GridError, ThermoTable, read_thermo_csv, verify_integration_constant

__all__ = [
    "ClosureTensors", "flux_tensors", "antisym_profile", "antisym_ki", "delta_flux_series",
    "delta_flux", "Beta0Ansatz", "Beta0Report", "check_beta0", "ThermoTable", "GridError",
    "read_thermo_csv", "verify_integration_constant",
]


# ---------------------------------------------------------------------------
# flux extraction


@dataclass
class ClosureTensors:
    """Fluxes split by deviation order at one point.

    ``F_kij[n]`` has shape ``(3, 3, 3)`` indexed ``[k, i, j]`` and ``G_ki[n]``
    shape ``(3, 3)``.  Arrays hold ``Fraction`` objects at rational points and
    floats otherwise.  ``h_prime`` and ``h_prime_k`` are ``dH/dmu`` and
    ``dH/dmu_k`` through the same order; ``relation_residual`` is the largest
    entry of ``d h'/d mu_i - d h'^i / d mu``.
    """

    F_kij: list
    G_ki: list
    h_prime: object
    h_prime_k: np.ndarray
    relation_residual: object

    def to_json(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        def dense(a):
            a = np.asarray(a, dtype=object)
            return [enc(a[idx]) for idx in itertools.product(range(3), repeat=a.ndim)]

        return {"index_order": "lexicographic (1,1,1),(1,1,2),...",
                "F_kij": [dense(a) for a in self.F_kij], "G_ki": [dense(a) for a in self.G_ki],
                "h_prime": enc(self.h_prime), "h_prime_k": dense(self.h_prime_k),
                "relation_residual": enc(self.relation_residual)}


def _flux_series(H: MomentSeries, order: int):
    if H.max_order < order + 2:
        raise OrderError(f"potential exact through {H.max_order}; fluxes through order {order} "
                         f"need {order + 2}")
    Hk = H.d_mu_vec()
    return Hk.d_mu_mat(), Hk.d_lam_vec(), H.d_mu(), Hk


def _zero_like(rank: int, exact: bool):
    if exact:
        arr = np.empty((3,) * rank, dtype=object)
        arr.fill(Fraction(0))
        return arr
    return np.zeros((3,) * rank)


def _graded_values(s: MomentSeries, order: int, at: Multipliers, real: PsiRealization) -> list:
    out = []
    for n in range(order + 1):
        g = s.grade(n)
        if g.is_zero():
            out.append(_zero_like(s.free_rank, at.exact))
        else:
            out.append(np.asarray(g.evaluate(at, real)))
    return out


def _total(s: MomentSeries, order: int, at: Multipliers, real: PsiRealization):
    t = s.truncate(order)
    if t.is_zero():
        return Fraction(0) if at.exact and not s.free_rank else _zero_like(s.free_rank, at.exact) \
            if s.free_rank else 0.0
    return t.evaluate(at, real)


def flux_tensors(H: MomentSeries, order: int, at: Multipliers,
                 real: Optional[PsiRealization] = None) -> ClosureTensors:
    """Graded ``F^{kij}`` and ``G^{ki}`` of ``H`` at ``at`` for orders ``0..order``."""
    real = real or PolynomialFamily()
    F, G, h, hk = _flux_series(H, order)
    rel = h.d_mu_vec() - hk.d_mu()
    rel_vals = np.asarray(_total(rel, order, at, real), dtype=object).ravel()
    rel_max = max((abs(x) for x in rel_vals), default=0)
    return ClosureTensors(_graded_values(F, order, at, real), _graded_values(G, order, at, real),
                          _total(h, order, at, real), np.asarray(_total(hk, order, at, real)),
                          rel_max)


def antisym_ki(T: np.ndarray) -> np.ndarray:
    """Part of ``T`` antisymmetric in its first two indices."""
    T = np.asarray(T)
    return (T - np.swapaxes(T, 0, 1)) / 2 if T.dtype != object else \
        (T - np.swapaxes(T, 0, 1)) * Fraction(1, 2)


def _max_abs(a: np.ndarray):
    return max((abs(x) for x in np.asarray(a).ravel()), default=0)


def antisym_profile(T: ClosureTensors, max_order: Optional[int] = None) -> list[tuple]:
    """``(n, |antisym F|_max, |antisym G|_max)`` for every order ``n``."""
    top = len(T.F_kij) - 1 if max_order is None else min(max_order, len(T.F_kij) - 1)
    return [(n, _max_abs(antisym_ki(T.F_kij[n])), _max_abs(antisym_ki(T.G_ki[n])))
            for n in range(top + 1)]


# ---------------------------------------------------------------------------
# closed-form remainders of the correction potential


def _beta_weights(params: SolutionParams):
    return [(r, b, Fraction(2 * r + 3, math.factorial(r))) for r, b in sorted(params.beta.items())]


def _sym_pair(a: MomentSeries, b: MomentSeries, n: int) -> MomentSeries:
    """``a^(i b^j)`` as a rank-2 series."""
    return (a.outer(b, n) + b.outer(a, n)) * Fraction(1, 2)


def delta_flux_series(params: SolutionParams, max_order: int) -> tuple[MomentSeries, MomentSeries]:
    """The non-symmetric remainders ``(dF^{kij}, dG^{ki})`` as series (polynomial ``F`` only)."""
    n = max_order
    B: Blocks = blocks(n + 1)
    lv, M, G0 = B.lv, B.M, B.G0
    kron = MomentSeries.kronecker()
    d_l = (kron.outer(lv, n) + kron.outer(lv, n).permute([0, 2, 1])) * Fraction(1, 2)  # delta^{k(i} lam^{j)}
    Fs = B.F_series(params.F)
    dF_parts = [lv.outer(Fs.d_mu_mat(), n)]
    dG_parts = []
    F1 = B.F_series(params.F.partial(1))
    F2 = B.F_series(params.F.partial(2))
    dG_parts.append(lv.outer(F1.outer(B.G1.d_lam_vec(), n) + F2.outer(B.G2.d_lam_vec(), n), n))
    b1 = params.beta.get(1, Fraction(0))
    if b1:
        inner = (d_l.outer(B.mll, n) * 4
                 + lv.outer(M.outer(G0, n) * 2 - _sym_pair(lv, B.Ml, n) * 4, n))
        dF_parts.append(inner * (Fraction(-5, 4) * b1))
        dG_parts.append(lv.outer(B.MMl, n) * (-5 * b1))
    lam = MomentSeries.lam()
    for r, b, w in _beta_weights(params):
        dF_parts.append(d_l.outer(B.G0_pow(r), n).outer(lam, n) * (2 * w * b))
        dG_parts.append(lv.outer(B.mv, n).outer(B.G0_pow(r), n) * (w * b))
        if r >= 2:
            dF_parts.append(d_l.outer(B.mll.outer(B.G0_pow(r - 1), n), n) * (-w * b))
            dG_parts.append(B.Ml.outer(lv, n).outer(
                B.mll.outer(B.G0_pow(r - 2), n), n) * (-2 * w * (r - 1) * b))
            dG_parts.append(lv.outer(B.Ml, n).outer(B.mll.outer(B.G0_pow(r - 2), n), n)
                            * (-(2 * r - 3) * w * b))
            dG_parts.append(lv.outer(B.MMl, n).outer(B.G0_pow(r - 1), n) * (-2 * w * b))
    dF = sum_series([p.truncate(n) for p in dF_parts], 3, n)
    dG = sum_series([p.truncate(n) for p in dG_parts], 2, n)
    return dF, dG


def _point_blocks(at: Multipliers):
    conv = (lambda x: Fraction(x)) if at.exact else float  # noqa: E731
    dtype = object if at.exact else float
    lam = conv(at.lam)
    l = np.array([conv(x) for x in at.lam_vec], dtype=dtype)
    mv = np.array([conv(x) for x in at.mu_vec], dtype=dtype)
    M = np.array([[conv(x) for x in r] for r in at.mu_mat], dtype=dtype)
    return lam, l, mv, M


def delta_flux(params: SolutionParams, at: Multipliers, order: Optional[int] = None):
    """``(dF^{kij}, dG^{ki})`` evaluated at ``at``.

    With ``order`` given (polynomial ``F`` only) the result is the part of
    deviation order ``order`` exactly; without it the closed forms are
    evaluated in full, using the gradient handles of ``F``.
    """
    if order is not None:
        dF, dG = delta_flux_series(params, order)
        real = PolynomialFamily()
        vals = []
        for s, rank in ((dF, 3), (dG, 2)):
            g = s.grade(order)
            vals.append(_zero_like(rank, at.exact) if g.is_zero() else np.asarray(g.evaluate(at, real)))
        return vals[0], vals[1]
    lam, l, mv, M = _point_blocks(at)
    k = (lambda x: Fraction(x)) if at.exact else float  # noqa: E731
    eye = np.eye(3, dtype=int) * k(1)
    half = k(Fraction(1, 2))
    G0 = l @ l
    tr = np.trace(M)
    Ml = M @ l
    MMl = M @ Ml
    mll = l @ Ml
    mm = np.sum(M * M)
    G1 = G0 * tr - mll
    G2 = G0 * mm - 2 * (Ml @ Ml) + 2 * tr * mll - G0 * tr * tr
    _, F1, F2 = params.F.grad(G0, G1, G2)
    F1, F2 = k(F1), k(F2)
    dG1_dmu = G0 * eye - np.outer(l, l)
    dG2_dmu = (2 * G0 * M - 2 * (np.outer(Ml, l) + np.outer(l, Ml)) + 2 * mll * eye
               + 2 * tr * np.outer(l, l) - 2 * G0 * tr * eye)
    dG1_dl = 2 * tr * l - 2 * Ml
    dG2_dl = 2 * mm * l - 4 * MMl + 4 * tr * Ml - 2 * tr * tr * l
    d_l = (np.einsum("ki,j->kij", eye, l) + np.einsum("kj,i->kij", eye, l)) * half
    dF = np.einsum("k,ij->kij", l, F1 * dG1_dmu + F2 * dG2_dmu)
    dG = np.einsum("k,i->ki", l, F1 * dG1_dl + F2 * dG2_dl)
    b1 = k(params.beta.get(1, 0))
    if b1:
        lMl = (np.outer(l, Ml) + np.outer(Ml, l)) * half
        dF = dF - k(Fraction(5, 4)) * b1 * (4 * mll * d_l
                                            + np.einsum("k,ij->kij", l, 2 * G0 * M - 4 * lMl))
        dG = dG - 5 * b1 * np.outer(l, MMl)
    for r, b, w in _beta_weights(params):
        c = k(w * b)
        dF = dF + 2 * c * G0**r * lam * d_l
        dG = dG + c * G0**r * np.outer(l, mv)
        if r >= 2:
            dF = dF - c * G0 ** (r - 1) * mll * d_l
            dG = dG - 2 * (r - 1) * c * G0 ** (r - 2) * mll * np.outer(Ml, l)
            dG = dG - (2 * r - 3) * c * G0 ** (r - 2) * mll * np.outer(l, Ml)
            dG = dG - 2 * c * G0 ** (r - 1) * np.outer(l, MMl)
    return dF, dG


# ---------------------------------------------------------------------------
# the beta_0 obstruction


@dataclass
class Beta0Ansatz:
    """Eight polynomials ``f_1..f_8`` in ``G0`` (coefficient lists, lowest first) and ``beta0``.

    They parametrize the part of the vector potential quadratic in ``mu_mat``:

        f1 mu.mu.lam + f2 tr(mu) mu.lam + f3 (lam.mu.lam) mu.lam
        + lam^k [f4 tr^2 + f5 (lam.mu.lam)^2 + f6 (lam.mu.lam) tr + f7 mu:mu + f8 |mu lam|^2]
    """

    f: list = field(default_factory=lambda: [[] for _ in range(8)])
    beta0: Fraction = Fraction(0)
    degree: int = 4

    def __post_init__(self):
        if len(self.f) != 8:
            raise ValueError("the ansatz has exactly eight functions")
        self.f = [[Fraction(c) for c in coeffs] for coeffs in self.f]
        self.beta0 = Fraction(self.beta0)
        if self.degree < 0:
            raise ValueError("degree bound must be non-negative")
        if any(len(c) > self.degree + 1 for c in self.f):
            raise ValueError("an ansatz polynomial exceeds the degree bound")


@dataclass
class Beta0Report:
    solvable: bool
    residual_zero: bool
    f1_f2_vanish: Optional[bool]
    f7_relation_holds: Optional[bool]
    particular: Optional[list]
    nullspace: list
    degree: int
    beta0: Fraction

    def to_json(self) -> dict:
        def enc(vec):
            return None if vec is None else [[str(c) for c in poly] for poly in vec]

        return {"solvable": self.solvable, "residual_zero": self.residual_zero,
                "f1_f2_vanish": self.f1_f2_vanish, "f7_relation_holds": self.f7_relation_holds,
                "particular": enc(self.particular), "nullspace": [enc(v) for v in self.nullspace],
                "degree": self.degree, "beta0": str(self.beta0)}


def _ansatz_structures(B: Blocks, n: int) -> list[MomentSeries]:
    lv = B.lv
    return [
        B.MMl,
        B.Ml.outer(B.tr, n),
        B.Ml.outer(B.mll, n),
        lv.outer(B.tr.outer(B.tr, n), n),
        lv.outer(B.mll.outer(B.mll, n), n),
        lv.outer(B.mll.outer(B.tr, n), n),
        lv.outer(B.mm, n),
        lv.outer(B.lmml, n),
    ]


def _obstruction_residual(H2: MomentSeries, B: Blocks, beta0: Fraction, n: int) -> MomentSeries:
    """``2 lam_j dH2^k/dmu_ij + 3 beta0 [delta^{ki} lam.mu.lam + 4 lam^(k (mu lam)^i)]``."""
    flux = H2.d_mu_mat().times_vec(2, "lam_vec") * 2
    source = (MomentSeries.kronecker().outer(B.mll, n) + _sym_pair(B.lv, B.Ml, n) * 4) * (3 * beta0)
    return (flux.truncate(n) + source.truncate(n))


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction], n_unknowns: int):
    """Gauss-Jordan over the rationals: ``(particular or None, nullspace basis)``."""
    A = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    row = 0
    for col in range(n_unknowns):
        pr = next((i for i in range(row, len(A)) if A[i][col] != 0), None)
        if pr is None:
            continue
        A[row], A[pr] = A[pr], A[row]
        inv = 1 / A[row][col]
        A[row] = [x * inv for x in A[row]]
        for i in range(len(A)):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[row])]
        pivots.append(col)
        row += 1
        if row == len(A):
            break
    if any(all(x == 0 for x in r[:-1]) and r[-1] != 0 for r in A):
        particular = None
    else:
        particular = [Fraction(0)] * n_unknowns
        for i, col in enumerate(pivots):
            particular[col] = A[i][-1]
    free = [c for c in range(n_unknowns) if c not in pivots]
    null = []
    for fc in free:
        v = [Fraction(0)] * n_unknowns
        v[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            v[col] = -A[i][fc]
        null.append(v)
    return particular, null


def check_beta0(a: Beta0Ansatz) -> Beta0Report:
    """Coefficient matching of the first-order vector-potential condition over the ansatz."""
    d = a.degree
    n = 2 * d + 5  # G0^d (order 2d) times the structures (order <= 5) after the derivative
    B = blocks(n)
    structs = _ansatz_structures(B, n)
    unknowns = [(i, e) for i in range(8) for e in range(d + 1)]
    columns = []
    for i, e in unknowns:
        H2 = B.G0_pow(e).outer(structs[i], n)
        columns.append(_obstruction_residual(H2, B, Fraction(0), n))
    const = _obstruction_residual(MomentSeries.zero(1, n), B, a.beta0, n)
    keys = sorted({k for s in columns + [const] for k, _ in s.items()})
    lookup = [dict(s.items()) for s in columns]
    cdict = dict(const.items())
    rows = [[col.get(k, Fraction(0)) for col in lookup] for k in keys]
    rhs = [-cdict.get(k, Fraction(0)) for k in keys]
    particular, null = _solve_exact(rows, rhs, len(unknowns))

    def as_polys(vec):
        return [[vec[i * (d + 1) + e] for e in range(d + 1)] for i in range(8)]

    given = [Fraction(0)] * len(unknowns)
    for i, coeffs in enumerate(a.f):
        for e, c in enumerate(coeffs):
            given[i * (d + 1) + e] = c
    res_given = [sum((r * x for r, x in zip(row, given)), Fraction(0)) - b for row, b in zip(rows, rhs)]
    residual_zero = all(x == 0 for x in res_given)

    f12 = f7 = None
    if particular is not None:
        vecs = [particular] + null
        f12 = all(v[i * (d + 1) + e] == 0 for v in vecs for i in (0, 1) for e in range(d + 1))

        def f7_defect(v):
            # 4 f7 - 2 f2 - 2 f3 G0 + 2 f8 G0, coefficient by coefficient in G0
            p = as_polys(v)
            out = []
            for e in range(d + 2):
                c = 4 * (p[6][e] if e <= d else 0) - 2 * (p[1][e] if e <= d else 0)
                if e >= 1:
                    c += -2 * p[2][e - 1] + 2 * p[7][e - 1]
                out.append(c)
            return out

        f7 = all(x == 0 for v in vecs for x in f7_defect(v))
    return Beta0Report(particular is not None, residual_zero, f12, f7,
                       as_polys(particular) if particular is not None else None,
                       [as_polys(v) for v in null], d, a.beta0)
