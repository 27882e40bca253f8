"""Residual checks of the differential conditions on potentials.

Every condition is a list of *terms* whose sum must vanish through the
requested deviation order.  A term is a recipe: a chain of derivatives of the
potential (or of a companion potential) followed by index operations such as
multiplying by ``mu_vec`` or contracting with ``mu_mat``.  Recipes are
realized two ways:

* numerically: derivatives of a float copy of the series are evaluated at
  seeded random points split by deviation order, the index operations act on
  the arrays, and everything beyond the requested order is dropped.  The
  cancellation is measured per point as ``|sum of terms| / max(1, max |term|)``;
* symbolically: the same chain on the exact series, whose sum must be empty,
  plus exact evaluation at a few rational points with the polynomial psi
  family.  This is slower and on by default only up to order 4.

Condition sets:

``core``      mixed-derivative symmetries and the Galilean flux condition on a
              potential, plus four consequences obtained by differentiating them.
``hstar0``    the five conditions on the scalar potential of
              :func:`closure14.solutions.build_Hstar0`.
``vector``    the two conditions tying the vector potential to the scalar one
              (``companion`` must hold the scalar potential).
``galilean``  the two invariance conditions on ``h' = dH/dmu`` and
              ``h'^k = dH/dmu_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .packed import PackedSeries, points_array
from .ring import LAM, ExpFamily, PolynomialFamily, PsiRealization
from .series import (MomentSeries, Multipliers, OrderError, random_points, random_rational_points,
                     sum_series)

CONDITION_SETS = ("core", "hstar0", "vector", "galilean")
SYMBOLIC_MAX_ORDER = 4
_DEVIATION_VARS = ("mu_vec", "mu_mat", "lam_vec")
_RAISING_OPS = ("mv", "lv", "mat", "vec")


class HeadroomError(OrderError):
    """The series is not exact far enough beyond the requested order."""


# ---------------------------------------------------------------------------
# term recipes


@dataclass(frozen=True)
class Term:
    """Derivative chain of a source potential followed by index operations."""

    path: tuple = ()
    source: str = "S"
    ops: tuple = ()
    zero_lam_vec: bool = False

    def _op(self, *op) -> "Term":
        return replace(self, ops=self.ops + (op,))

    def mv(self) -> "Term":
        """Outer product with ``mu_vec`` (new trailing slot)."""
        return self._op("mv")

    def lv(self) -> "Term":
        """Outer product with ``lam_vec`` (new trailing slot)."""
        return self._op("lv")

    def mat(self, slot: int) -> "Term":
        """Replace index ``a`` at ``slot`` by ``b`` with a factor ``mu_ab``."""
        return self._op("mat", slot)

    def vec(self, slot: int, var: str = "lam_vec") -> "Term":
        """Contract ``slot`` with ``mu_vec`` or ``lam_vec``."""
        return self._op("vec", slot, var)

    def lam(self, c=1) -> "Term":
        return self._op("lam", Fraction(c))

    def delta(self) -> "Term":
        """Outer product with the Kronecker delta (two new trailing slots)."""
        return self._op("delta")

    def perm(self, p: Sequence[int]) -> "Term":
        """Slot ``i`` of the result is slot ``p[i]`` of the input."""
        return self._op("perm", tuple(p))

    def __mul__(self, c) -> "Term":
        return self._op("scale", Fraction(c))

    def __neg__(self) -> "Term":
        return self * -1

    def at_zero_lam_vec(self) -> "Term":
        return replace(self, zero_lam_vec=True)

    def exact_through(self, source_order: int) -> int:
        lost = sum(1 for v in self.path if v in _DEVIATION_VARS)
        gained = sum(1 for op in self.ops if op[0] in _RAISING_OPS)
        return source_order - lost + gained


def D(*path: str) -> Term:
    return Term(tuple(path))


def C(*path: str) -> Term:
    """Derivative of the companion potential."""
    return Term(tuple(path), source="C")


def antisym_last_two(t: Term) -> list[Term]:
    return [t * Fraction(1, 2), t.perm([0, 2, 1]) * Fraction(-1, 2)]


def core_recipes() -> dict[str, list[Term]]:
    out = {}
    out["mixed_mu_mat"] = [D("mu", "mu_mat"), -D("mu_vec", "mu_vec")]
    out["mixed_lam_vec"] = [D("mu", "lam_vec"), -D("lam", "mu_vec")]
    out["galilean_flux"] = [
        D("mu", "mu_vec").mv(),
        D("mu", "mu_mat").mat(1) * 2,
        D("mu", "mu_mat").lam(2),
        D("mu_vec", "mu_mat").vec(2) * 2,
        D("mu", "lam_vec").lv(),
        D("mu").delta(),
    ]
    out["derived_mixed_third"] = [D("mu", "lam_vec", "mu_vec"), -D("mu", "lam", "mu_mat")]
    out["derived_flux_at_zero_lam_vec"] = [t.at_zero_lam_vec() for t in (
        D("mu", "mu_vec").mv(),
        D("mu", "mu_mat").mat(1) * 2,
        D("mu", "mu_mat").lam(2),
        D("mu").delta(),
    )]
    aki = [1, 2, 0]  # (a, k, i) -> (k, i, a)
    out["derived_flux_mu_vec"] = [
        D("mu", "mu_vec", "mu_vec").mv().perm([0, 2, 1]),
        D("mu", "mu_vec").delta().perm([0, 2, 1]),
        D("mu", "mu_vec").delta().perm(aki),
        D("mu", "mu_vec", "mu_mat").mat(2).perm(aki) * 2,
        D("mu", "mu_vec", "mu_mat").lam(2).perm(aki),
        D("mu", "mu_vec", "lam_vec").lv().perm(aki),
        D("mu", "mu_mat", "mu_mat").vec(1).perm([1, 0, 2]) * 2,
    ]
    out["derived_flux_lam"] = [
        D("mu", "lam", "mu_vec").mv(),
        D("mu", "lam", "mu_mat").mat(1) * 2,
        D("mu", "lam", "mu_mat").lam(2),
        D("mu", "mu_mat") * 2,
        D("mu", "lam", "lam_vec").lv(),
        D("mu", "lam").delta(),
        D("mu", "mu_mat", "lam_vec").vec(1).perm([1, 0]) * 2,
    ]
    return out


def hstar0_recipes() -> dict[str, list[Term]]:
    out = {}
    out["lam_mat_cross"] = [D("lam", "mu_mat")]
    out["equilibrium_flux"] = [t.at_zero_lam_vec() for t in (
        D("mu_mat").mat(1) * 2,
        D("mu_mat").lam(2),
        D().delta(),
    )]
    out["mat_mat_lam"] = [D("mu_mat", "mu_mat").vec(1) * 2]
    out["lam_derivative_flux"] = [
        D("mu_mat", "lam").mat(1) * 2,
        D("mu_mat", "lam").lam(2),
        D("mu_mat") * 2,
        D("lam_vec", "lam").lv(),
        D("lam").delta(),
        D("mu_mat", "lam_vec").vec(1).perm([1, 0]) * 2,
    ]
    aki = [1, 2, 0]
    raw = [
        D("mu_mat", "mu_mat").vec(1).mat(2).perm(aki) * 2,
        D("mu_mat", "mu_mat").vec(3).lam(2),
        D("mu_mat", "lam_vec").vec(1).lv().perm(aki),
        D("mu_mat").vec(1).delta().perm(aki),
    ]
    out["skew_integrability"] = [p for t in raw for p in antisym_last_two(t)]
    return out


def vector_recipes() -> dict[str, list[Term]]:
    """``D`` is the vector potential, ``C`` the companion scalar potential."""
    out = {}
    out["lam_vec_potential"] = [C("lam_vec"), -D("lam")]
    out["vector_flux"] = [
        C("mu_mat").mat(1) * 2,
        C("mu_mat").lam(2),
        C("lam_vec").lv(),
        C().delta(),
        D("mu_mat").vec(2) * 2,
    ]
    return out


def galilean_recipes() -> dict[str, list[Term]]:
    out = {}
    out["scalar_invariance"] = [
        D("mu", "mu").mv(),
        D("mu", "mu_vec").mat(0) * 2,
        D("mu", "mu_vec").lam(2),
        D("mu", "mu_mat").vec(0) * 2,
        D("mu", "lam").lv(),
    ]
    out["vector_invariance"] = [
        D("mu_vec", "mu").mv(),
        D("mu_vec", "mu_vec").mat(1) * 2,
        D("mu_vec", "mu_vec").lam(2),
        D("mu_vec", "mu_mat").vec(1) * 2,
        D("mu_vec", "lam").lv(),
        D("mu").delta(),
    ]
    return out


RECIPES = {"core": core_recipes, "hstar0": hstar0_recipes, "vector": vector_recipes,
           "galilean": galilean_recipes}


# ---------------------------------------------------------------------------
# symbolic realization


_MV = MomentSeries.mu_vec()
_LV = MomentSeries.lam_vec()


class SymbolicTerms:
    """Builds exact term series, memoizing derivative chains."""

    def __init__(self, sources: dict[str, MomentSeries], order: int):
        self.order = order
        self.cache = {(k, ()): s.truncate(order + 2) for k, s in sources.items()}

    def derivative(self, source: str, path: tuple) -> MomentSeries:
        key = (source, path)
        if key not in self.cache:
            taken = sum(1 for v in path if v in _DEVIATION_VARS)
            keep = max(self.order, self.order + 2 - taken)
            prev = self.derivative(source, path[:-1])
            self.cache[key] = prev.differentiate(path[-1]).truncate(keep)
        return self.cache[key]

    def series(self, t: Term) -> MomentSeries:
        s = self.derivative(t.source, t.path)
        for op in t.ops:
            kind = op[0]
            if kind == "mv":
                s = s.outer(_MV)
            elif kind == "lv":
                s = s.outer(_LV)
            elif kind == "mat":
                s = s.times_mat(op[1])
            elif kind == "vec":
                s = s.times_vec(op[1], op[2])
            elif kind == "lam":
                s = s * (LAM * op[1])
            elif kind == "delta":
                s = s.times_delta()
            elif kind == "perm":
                s = s.permute(op[1])
            elif kind == "scale":
                s = s * op[1]
        if t.zero_lam_vec:
            s = MomentSeries({k: v for k, v in s.items() if not any(k[1][10:13])}, s.free_rank,
                             s.max_order, _clean=True)
        return s


# ---------------------------------------------------------------------------
# numeric realization


class NumericTerms:
    """Evaluates term recipes at float points, truncated by deviation order."""

    def __init__(self, sources: dict[str, MomentSeries], order: int, pts: np.ndarray,
                 realization: PsiRealization):
        self.order = order
        self.realization = realization
        self.pts = pts
        self.zpts = pts.copy()
        self.zpts[:, 10:13] = 0.0
        self.packed = {(k, ()): PackedSeries.from_series(s).truncate(order + 2)
                       for k, s in sources.items()}
        self.values: dict = {}

    def derivative(self, source: str, path: tuple) -> PackedSeries:
        key = (source, path)
        if key not in self.packed:
            self.packed[key] = self.derivative(source, path[:-1]).differentiate(path[-1])
        return self.packed[key]

    def _base(self, t: Term) -> np.ndarray:
        key = (t.source, t.path, t.zero_lam_vec)
        if key not in self.values:
            pts = self.zpts if t.zero_lam_vec else self.pts
            self.values[key] = self.derivative(t.source, t.path).evaluate_graded(
                pts, self.realization, self.order)
        return self.values[key]

    def graded(self, t: Term) -> np.ndarray:
        """Shape ``(order + 1, P) + (3,) * rank``, entry ``g`` the order-``g`` part."""
        pts = self.zpts if t.zero_lam_vec else self.pts
        n = pts.shape[0]
        mv = pts[:, 1:4]
        lv = pts[:, 10:13]
        lam = pts[:, 13]
        m = pts[:, 4:10]
        M = np.stack([m[:, [0, 1, 2]], m[:, [1, 3, 4]], m[:, [2, 4, 5]]], axis=1)
        A = self._base(t)
        for op in t.ops:
            kind = op[0]
            rank = A.ndim - 2
            if kind in _RAISING_OPS:
                if kind == "mv":
                    B = A[..., None] * mv.reshape((n,) + (1,) * rank + (3,))
                elif kind == "lv":
                    B = A[..., None] * lv.reshape((n,) + (1,) * rank + (3,))
                elif kind == "mat":
                    ax = 2 + op[1]
                    B = np.moveaxis(np.einsum("gp...a,pab->gp...b", np.moveaxis(A, ax, -1), M), -1, ax)
                else:
                    v = mv if op[2] == "mu_vec" else lv
                    B = np.einsum("gp...a,pa->gp...", np.moveaxis(A, 2 + op[1], -1), v)
                A = np.concatenate([np.zeros_like(B[:1]), B[:-1]], axis=0)
            elif kind == "lam":
                A = A * (float(op[1]) * lam).reshape((1, n) + (1,) * rank)
            elif kind == "delta":
                A = A[..., None, None] * np.eye(3)
            elif kind == "perm":
                A = np.transpose(A, (0, 1) + tuple(2 + j for j in op[1]))
            elif kind == "scale":
                A = A * float(op[1])
        return A


# ---------------------------------------------------------------------------
# reports


@dataclass
class ConditionReport:
    condition: str
    max_residual: float
    worst_point: Optional[dict]
    passed: bool
    exact_zero: Optional[bool] = None
    rational_zero: Optional[bool] = None
    n_points: int = 0

    def to_json(self) -> dict:
        return {"condition": self.condition, "max_residual": self.max_residual,
                "worst_point": self.worst_point, "pass": self.passed,
                "exact_zero": self.exact_zero, "rational_zero": self.rational_zero,
                "points": self.n_points}


def relative_residual(values: Sequence[np.ndarray]) -> np.ndarray:
    """Per-point ``|sum| / max(1, max |term|)`` for term values of shape ``(P, ...)``."""
    total = np.sum(values, axis=0)
    axes = tuple(range(1, total.ndim))
    num = np.max(np.abs(total), axis=axes) if axes else np.abs(total)
    scale = np.max([np.max(np.abs(v), axis=axes) if axes else np.abs(v) for v in values], axis=0)
    return num / np.maximum(scale, 1.0)


def exact_residual(terms: Sequence[MomentSeries], at: Multipliers,
                   realization: PsiRealization = PolynomialFamily()):
    total = None
    for t in terms:
        v = t.evaluate_exact(at, realization)
        total = v if total is None else total + v
    if isinstance(total, np.ndarray):
        return max((abs(x) for x in total.flat), default=Fraction(0))
    return abs(total)


def check_condition(name: str, recipes: Sequence[Term], order: int,
                    numeric: Optional[NumericTerms], points: Sequence[Multipliers], tol: float,
                    symbolic: Optional[SymbolicTerms] = None,
                    spots: Sequence[Multipliers] = ()) -> ConditionReport:
    for t in recipes:
        if t.exact_through(order + 2) < order:
            raise HeadroomError(f"{name}: a term is exact only through order "
                                f"{t.exact_through(order + 2)} < {order}")
    max_res, worst = 0.0, None
    if numeric is not None and len(points):
        res = relative_residual([numeric.graded(t).sum(axis=0) for t in recipes])
        w = int(np.argmax(res))
        max_res, worst = float(res[w]), points[w].to_json()
    exact_zero = rational_zero = None
    if symbolic is not None:
        series = [symbolic.series(t) for t in recipes]
        short = [s.max_order for s in series if s.max_order < order]
        if short:
            raise HeadroomError(f"{name}: a term is exact only through order {min(short)} < {order}")
        series = [s.truncate(order) for s in series]
        exact_zero = sum_series(series, series[0].free_rank).is_zero()
        if spots:
            rational_zero = all(exact_residual(series, p) == 0 for p in spots)
    ok = max_res <= tol and exact_zero is not False and rational_zero is not False
    return ConditionReport(name, max_res, worst, ok, exact_zero, rational_zero, len(points))


def verify_potential(S: MomentSeries, conditions: str, order: int, points: int = 100,
                     tol: float = 1e-9, realization: Optional[PsiRealization] = None,
                     companion: Optional[MomentSeries] = None, rng_seed: int = 0,
                     spot_points: int = 2, symbolic: Optional[bool] = None) -> list[ConditionReport]:
    """Check one condition set on ``S`` through deviation order ``order``.

    ``symbolic`` defaults to ``order <= 4``; when on, the exact term sum and
    ``spot_points`` rational evaluations are checked as well.
    """
    if conditions not in CONDITION_SETS:
        raise ValueError(f"unknown condition set {conditions!r}")
    if order < 0:
        raise ValueError("order must be non-negative")
    if S.max_order < order + 2:
        raise HeadroomError(f"series exact through {S.max_order}; need {order + 2} for order {order}")
    sources = {"S": S}
    if conditions == "vector":
        if companion is None:
            raise ValueError("the vector conditions need the scalar potential as companion")
        if companion.max_order < order + 2:
            raise HeadroomError("companion series lacks headroom")
        sources["C"] = companion
    if symbolic is None:
        symbolic = order <= SYMBOLIC_MAX_ORDER
    realization = realization or ExpFamily()
    pts = random_points(points, rng_seed) if points else []
    numeric = NumericTerms(sources, order, points_array(pts), realization) if pts else None
    sym = SymbolicTerms(sources, order) if symbolic else None
    spots = random_rational_points(spot_points, rng_seed + 1) if symbolic and spot_points else []
    return [check_condition(name, recipes, order, numeric, pts, tol, sym, spots)
            for name, recipes in RECIPES[conditions]().items()]
