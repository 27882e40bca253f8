"""Truncated multivariate series in the Lagrange multipliers.

A :class:`MomentSeries` is a (possibly tensor valued) polynomial in the twelve
deviation components

    mu_vec = (mu_1, mu_2, mu_3), mu_mat = (mu_11, mu_12, mu_13, mu_22, mu_23, mu_33),
    lam_vec = (lam_1, lam_2, lam_3),

and in the scalar multiplier ``mu``, with coefficients in the ring of
:mod:`closure14.ring` (Laurent polynomials in the scalar multiplier ``lam``
times at most one ``psi`` symbol).  The *order* of a monomial is its total
degree in the deviation components; ``mu`` and ``lam`` do not count.

Free (tensor) indices are stored as ordered tuples over ``{1,2,3}``, so
non-symmetric tensors such as mixed second derivatives are represented
faithfully.  Derivatives with respect to the symmetric matrix ``mu_mat``
follow the symmetric convention
``d mu_hk / d mu_ij = (delta_hi delta_kj + delta_hj delta_ki) / 2``.

A series remembers the order ``max_order`` through which it is exact; every
operation propagates that bound and drops terms beyond it.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .ring import Basis, LambdaScalar, PsiProductError, PsiRealization, mul_basis
from .symtensor import AXES, RankError, delta_value

EXACT = 1_000_000  # max_order of a series that is an exact polynomial
N_VARS = 13  # mu power + 12 deviation components
MU = 0
MU_VEC = (1, 2, 3)
MU_MAT = {}
for _pos, (_a, _b) in enumerate([(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]):
    MU_MAT[(_a, _b)] = 4 + _pos
    MU_MAT[(_b, _a)] = 4 + _pos
LAM_VEC = (10, 11, 12)
VAR_NAMES = ("mu", "mu_1", "mu_2", "mu_3", "mu_11", "mu_12", "mu_13", "mu_22", "mu_23",
             "mu_33", "lam_1", "lam_2", "lam_3")
ZERO_MONO = (0,) * N_VARS

Key = tuple  # (free, mono, lam_exp, psi)


class ParityError(ValueError):
    """Raised when a delta structure would need an odd number of indices."""


class OrderError(ValueError):
    """Raised when a requested order exceeds what a series holds exactly."""


class SeriesError(ValueError):
    """Raised for malformed series operations."""


def mono_order(mono: Sequence[int]) -> int:
    return sum(mono) - mono[0]


def _bump(mono: tuple, var: int, by: int = 1) -> tuple:
    m = list(mono)
    m[var] += by
    return tuple(m)


# ---------------------------------------------------------------------------
# evaluation points


@dataclass(frozen=True)
class Multipliers:
    """A point in multiplier space."""

    mu: object = 0
    lam: object = 1
    mu_vec: tuple = (0, 0, 0)
    mu_mat: tuple = ((0, 0, 0), (0, 0, 0), (0, 0, 0))
    lam_vec: tuple = (0, 0, 0)

    def __post_init__(self):
        m = self.mu_mat
        if len(self.mu_vec) != 3 or len(self.lam_vec) != 3 or len(m) != 3:
            raise RankError("multiplier vectors must have three components")
        for i in range(3):
            for j in range(3):
                if m[i][j] != m[j][i]:
                    raise RankError("mu_mat must be symmetric")

    @property
    def exact(self) -> bool:
        vals = [self.mu, self.lam, *self.mu_vec, *self.lam_vec, *(x for r in self.mu_mat for x in r)]
        return not any(isinstance(v, float) for v in vals)

    def as_vector(self) -> list:
        m = self.mu_mat
        return [self.mu, *self.mu_vec, m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2],
                *self.lam_vec, self.lam]

    def as_float(self) -> "Multipliers":
        f = float
        return Multipliers(f(self.mu), f(self.lam), tuple(map(f, self.mu_vec)),
                           tuple(tuple(map(f, r)) for r in self.mu_mat), tuple(map(f, self.lam_vec)))

    def scaled(self, t) -> "Multipliers":
        """Same point with every deviation component multiplied by ``t``."""
        return Multipliers(self.mu, self.lam, tuple(t * x for x in self.mu_vec),
                           tuple(tuple(t * x for x in r) for r in self.mu_mat),
                           tuple(t * x for x in self.lam_vec))

    @classmethod
    def from_vector(cls, v: Sequence) -> "Multipliers":
        m = ((v[4], v[5], v[6]), (v[5], v[7], v[8]), (v[6], v[8], v[9]))
        return cls(v[0], v[13], tuple(v[1:4]), m, tuple(v[10:13]))

    def to_json(self) -> dict:
        conv = (lambda x: str(Fraction(x))) if self.exact else float
        return {"mu": conv(self.mu), "lam": conv(self.lam), "mu_vec": [conv(x) for x in self.mu_vec],
                "mu_mat": [[conv(x) for x in r] for r in self.mu_mat],
                "lam_vec": [conv(x) for x in self.lam_vec]}


def random_points(n: int, seed: int, deviation: float = 0.1, lam_range=(1.0, 2.0),
                  mu_range=(-0.5, 0.5)) -> list[Multipliers]:
    """Seeded random points: ``lam`` uniform in ``lam_range``, deviations in +-``deviation``."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n):
        mu = rng.uniform(*mu_range)
        lam = rng.uniform(*lam_range)
        mv = rng.uniform(-deviation, deviation, 3)
        lv = rng.uniform(-deviation, deviation, 3)
        a = rng.uniform(-deviation, deviation, 6)
        m = ((a[0], a[1], a[2]), (a[1], a[3], a[4]), (a[2], a[4], a[5]))
        pts.append(Multipliers(float(mu), float(lam), tuple(map(float, mv)),
                               tuple(tuple(map(float, r)) for r in m), tuple(map(float, lv))))
    return pts


def random_rational_points(n: int, seed: int, den: int = 20) -> list[Multipliers]:
    """Seeded random points with small rational coordinates (for exact checks)."""
    rng = np.random.default_rng(seed)

    def q(lo, hi):
        return Fraction(int(rng.integers(int(lo * den), int(hi * den) + 1)), den)

    pts = []
    for _ in range(n):
        a = [q(-0.1, 0.1) for _ in range(6)]
        m = ((a[0], a[1], a[2]), (a[1], a[3], a[4]), (a[2], a[4], a[5]))
        pts.append(Multipliers(q(-0.5, 0.5), q(1, 2), tuple(q(-0.1, 0.1) for _ in range(3)), m,
                               tuple(q(-0.1, 0.1) for _ in range(3))))
    return pts


# ---------------------------------------------------------------------------
# the series type


class MomentSeries:
    __slots__ = ("free_rank", "max_order", "_t", "_compiled")

    def __init__(self, terms: Optional[Mapping[Key, Fraction]] = None, free_rank: int = 0,
                 max_order: int = EXACT, _clean: bool = False):
        self.free_rank = free_rank
        self.max_order = max_order
        if _clean:
            self._t = dict(terms) if terms is not None else {}
        else:
            t: dict = {}
            for k, c in (terms or {}).items():
                if len(k[0]) != free_rank:
                    raise RankError(f"free index {k[0]} does not match rank {free_rank}")
                if mono_order(k[1]) > max_order:
                    continue
                c = Fraction(c)
                if c:
                    t[k] = t.get(k, 0) + c
            self._t = {k: v for k, v in t.items() if v}
        self._compiled = None

    # -- construction helpers ------------------------------------------------
    @classmethod
    def _build(cls, acc: dict, free_rank: int, max_order: int) -> "MomentSeries":
        return cls({k: v for k, v in acc.items() if v and mono_order(k[1]) <= max_order},
                   free_rank, max_order, _clean=True)

    @classmethod
    def zero(cls, free_rank: int = 0, max_order: int = EXACT) -> "MomentSeries":
        return cls({}, free_rank, max_order, _clean=True)

    @classmethod
    def scalar(cls, c: Union[int, Fraction, LambdaScalar], max_order: int = EXACT) -> "MomentSeries":
        c = c if isinstance(c, LambdaScalar) else LambdaScalar.const(c)
        return cls({((), ZERO_MONO, b[0], b[1]): v for b, v in c.items()}, 0, max_order, _clean=True)

    @classmethod
    def mu(cls) -> "MomentSeries":
        return cls({((), _bump(ZERO_MONO, MU), 0, None): Fraction(1)}, 0, EXACT, _clean=True)

    @classmethod
    def lam(cls) -> "MomentSeries":
        return cls({((), ZERO_MONO, 1, None): Fraction(1)}, 0, EXACT, _clean=True)

    @classmethod
    def mu_vec(cls) -> "MomentSeries":
        return cls({((a,), _bump(ZERO_MONO, MU_VEC[a - 1]), 0, None): Fraction(1) for a in AXES},
                   1, EXACT, _clean=True)

    @classmethod
    def lam_vec(cls) -> "MomentSeries":
        return cls({((a,), _bump(ZERO_MONO, LAM_VEC[a - 1]), 0, None): Fraction(1) for a in AXES},
                   1, EXACT, _clean=True)

    @classmethod
    def mu_mat(cls) -> "MomentSeries":
        return cls({((a, b), _bump(ZERO_MONO, MU_MAT[(a, b)]), 0, None): Fraction(1)
                    for a in AXES for b in AXES}, 2, EXACT, _clean=True)

    @classmethod
    def kronecker(cls) -> "MomentSeries":
        return cls({((a, a), ZERO_MONO, 0, None): Fraction(1) for a in AXES}, 2, EXACT, _clean=True)

    # -- inspection ------------------------------------------------------------
    def items(self):
        return self._t.items()

    def __len__(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def orders(self) -> list[int]:
        return sorted({mono_order(k[1]) for k in self._t})

    def low_order(self) -> int:
        return min((mono_order(k[1]) for k in self._t), default=self.max_order + 1)

    def has_psi(self) -> bool:
        return any(k[3] is not None for k in self._t)

    def coefficient(self, free: tuple, mono: tuple) -> LambdaScalar:
        return LambdaScalar({(k[2], k[3]): v for k, v in self._t.items()
                             if k[0] == free and k[1] == mono})

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentSeries):
            return NotImplemented
        return self.free_rank == other.free_rank and self._t == other._t

    def __repr__(self) -> str:
        return f"MomentSeries(rank={self.free_rank}, max_order={self.max_order}, terms={len(self._t)})"

    # -- linear structure -------------------------------------------------------
    def _check_rank(self, other: "MomentSeries"):
        if other.free_rank != self.free_rank:
            raise RankError(f"rank {self.free_rank} vs {other.free_rank}")

    def __add__(self, other: "MomentSeries") -> "MomentSeries":
        if other == 0:
            return self
        self._check_rank(other)
        mo = min(self.max_order, other.max_order)
        acc = dict(self._t)
        for k, v in other._t.items():
            acc[k] = acc.get(k, 0) + v
        return MomentSeries._build(acc, self.free_rank, mo)

    __radd__ = __add__

    def __neg__(self) -> "MomentSeries":
        return MomentSeries({k: -v for k, v in self._t.items()}, self.free_rank, self.max_order,
                            _clean=True)

    def __sub__(self, other: "MomentSeries") -> "MomentSeries":
        return self + (-other)

    def __mul__(self, other) -> "MomentSeries":
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return MomentSeries.zero(self.free_rank, self.max_order)
            return MomentSeries({k: v * other for k, v in self._t.items()}, self.free_rank,
                                self.max_order, _clean=True)
        if isinstance(other, LambdaScalar):
            return self.outer(MomentSeries.scalar(other))
        if isinstance(other, MomentSeries):
            return self.outer(other)
        return NotImplemented

    def __rmul__(self, other) -> "MomentSeries":
        if isinstance(other, (int, Fraction, LambdaScalar)):
            return self * other
        return NotImplemented

    def outer(self, other: "MomentSeries", max_order: Optional[int] = None) -> "MomentSeries":
        """Product with free indices concatenated (self's first)."""
        mo = min(self.max_order + other.low_order(), other.max_order + self.low_order())
        mo = min(mo, EXACT)
        if max_order is not None:
            mo = min(mo, max_order)
        acc: dict = defaultdict(Fraction)
        other_items = list(other._t.items())
        for (f1, m1, e1, p1), c1 in self._t.items():
            o1 = mono_order(m1)
            for (f2, m2, e2, p2), c2 in other_items:
                if o1 + mono_order(m2) > mo:
                    continue
                if p1 is not None and p2 is not None:
                    raise PsiProductError(f"psi{p1} * psi{p2}")
                m = tuple(a + b for a, b in zip(m1, m2))
                acc[(f1 + f2, m, e1 + e2, p1 if p1 is not None else p2)] += c1 * c2
        return MomentSeries._build(acc, self.free_rank + other.free_rank, mo)

    def power(self, n: int, max_order: Optional[int] = None) -> "MomentSeries":
        if self.free_rank:
            raise RankError("power of a tensor-valued series")
        out = MomentSeries.scalar(1)
        for _ in range(n):
            out = out.outer(self, max_order)
        return out

    # -- index manipulation -----------------------------------------------------
    def contract(self, a: int, b: int) -> "MomentSeries":
        """Trace over free slots ``a`` and ``b``."""
        if a == b or not (0 <= a < self.free_rank and 0 <= b < self.free_rank):
            raise RankError(f"cannot contract slots {a},{b} of rank {self.free_rank}")
        lo, hi = sorted((a, b))
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            if f[lo] == f[hi]:
                acc[(f[:lo] + f[lo + 1:hi] + f[hi + 1:], m, e, p)] += c
        return MomentSeries._build(acc, self.free_rank - 2, self.max_order)

    def permute(self, perm: Sequence[int]) -> "MomentSeries":
        """New series whose slot ``i`` is old slot ``perm[i]``."""
        if sorted(perm) != list(range(self.free_rank)):
            raise RankError(f"bad permutation {perm}")
        return MomentSeries({(tuple(k[0][j] for j in perm),) + k[1:]: v for k, v in self._t.items()},
                            self.free_rank, self.max_order, _clean=True)

    def component(self, free: tuple) -> "MomentSeries":
        return MomentSeries({((),) + k[1:]: v for k, v in self._t.items() if k[0] == tuple(free)},
                            0, self.max_order, _clean=True)

    def times_vec(self, slot: int, var: str) -> "MomentSeries":
        """Contract free ``slot`` with the variable vector ``mu_vec`` or ``lam_vec``."""
        pos = {"mu_vec": MU_VEC, "lam_vec": LAM_VEC}[var]
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            acc[(f[:slot] + f[slot + 1:], _bump(m, pos[f[slot] - 1]), e, p)] += c
        return MomentSeries._build(acc, self.free_rank - 1, self.max_order + 1)

    def times_mat(self, slot: int) -> "MomentSeries":
        """Replace free index ``a`` at ``slot`` by ``b`` with a factor ``mu_ab``."""
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            a = f[slot]
            for b in AXES:
                acc[(f[:slot] + (b,) + f[slot + 1:], _bump(m, MU_MAT[(a, b)]), e, p)] += c
        return MomentSeries._build(acc, self.free_rank, self.max_order + 1)

    def times_delta(self) -> "MomentSeries":
        """Outer product with the Kronecker delta (two new trailing slots)."""
        return self.outer(MomentSeries.kronecker())

    def times_mu(self) -> "MomentSeries":
        return MomentSeries({(k[0], _bump(k[1], MU), k[2], k[3]): v for k, v in self._t.items()},
                            self.free_rank, self.max_order, _clean=True)

    def times_lam(self, power: int = 1) -> "MomentSeries":
        return MomentSeries({(k[0], k[1], k[2] + power, k[3]): v for k, v in self._t.items()},
                            self.free_rank, self.max_order, _clean=True)

    # -- grading ------------------------------------------------------------------
    def grade(self, n: int) -> "MomentSeries":
        """Homogeneous part of deviation order ``n``."""
        if n > self.max_order:
            raise OrderError(f"order {n} exceeds exact order {self.max_order}")
        return MomentSeries({k: v for k, v in self._t.items() if mono_order(k[1]) == n},
                            self.free_rank, self.max_order, _clean=True)

    def truncate(self, n: int) -> "MomentSeries":
        return MomentSeries({k: v for k, v in self._t.items() if mono_order(k[1]) <= n},
                            self.free_rank, min(n, self.max_order), _clean=True)

    def mu_degree(self) -> float:
        """Highest power of ``mu``; ``inf`` if any coefficient carries a psi symbol."""
        if not self._t:
            return -math.inf
        if self.has_psi():
            return math.inf
        return max(k[1][MU] for k in self._t)

    # -- differentiation ------------------------------------------------------------
    def d_mu(self) -> "MomentSeries":
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            if m[MU]:
                acc[(f, _bump(m, MU, -1), e, p)] += c * m[MU]
            if p is not None:
                acc[(f, m, e, (p[0] - 1, p[1]))] += c
        return MomentSeries._build(acc, self.free_rank, self.max_order)

    def d_lam(self) -> "MomentSeries":
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            if e:
                acc[(f, m, e - 1, p)] += c * e
            if p is not None:
                acc[(f, m, e, (p[0], p[1] + 1))] += c
        return MomentSeries._build(acc, self.free_rank, self.max_order)

    def _d_vec(self, positions) -> "MomentSeries":
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            for a in AXES:
                j = positions[a - 1]
                if m[j]:
                    acc[(f + (a,), _bump(m, j, -1), e, p)] += c * m[j]
        return MomentSeries._build(acc, self.free_rank + 1, self.max_order - 1)

    def d_mu_vec(self) -> "MomentSeries":
        return self._d_vec(MU_VEC)

    def d_lam_vec(self) -> "MomentSeries":
        return self._d_vec(LAM_VEC)

    def d_mu_mat(self) -> "MomentSeries":
        half = Fraction(1, 2)
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            for a in AXES:
                for b in AXES:
                    j = MU_MAT[(a, b)]
                    if m[j]:
                        w = c * m[j] if a == b else c * m[j] * half
                        acc[(f + (a, b), _bump(m, j, -1), e, p)] += w
        return MomentSeries._build(acc, self.free_rank + 2, self.max_order - 1)

    def differentiate(self, var: str) -> "MomentSeries":
        """Derivative by ``mu``, ``lam``, ``mu_vec``, ``mu_mat`` or ``lam_vec``.

        Tensor variables open new trailing free indices.
        """
        try:
            fn = {"mu": self.d_mu, "lam": self.d_lam, "mu_vec": self.d_mu_vec,
                  "mu_mat": self.d_mu_mat, "lam_vec": self.d_lam_vec}[var]
        except KeyError:
            raise SeriesError(f"unknown variable {var!r}") from None
        return fn()

    # -- evaluation ---------------------------------------------------------------
    def _compile(self):
        if self._compiled is None:
            psis = sorted({k[3] for k in self._t if k[3] is not None})
            pidx = {p: i for i, p in enumerate(psis)}
            n = len(self._t)
            mono = np.zeros((n, N_VARS), dtype=np.int32)
            coef = np.zeros(n)
            lam_exp = np.zeros(n, dtype=np.int32)
            psi_col = np.full(n, -1, dtype=np.int32)
            out_col = np.zeros(n, dtype=np.int32)
            for t, ((f, m, e, p), c) in enumerate(self._t.items()):
                mono[t] = m
                coef[t] = float(c)
                lam_exp[t] = e
                if p is not None:
                    psi_col[t] = pidx[p]
                col = 0
                for a in f:
                    col = col * 3 + (a - 1)
                out_col[t] = col
            self._compiled = (mono, coef, lam_exp, psi_col, out_col, psis)
        return self._compiled

    def evaluate_many(self, points: Sequence[Multipliers], realization: PsiRealization) -> np.ndarray:
        """Float values at many points, shape ``(len(points),) + (3,)*free_rank``."""
        mono, coef, lam_exp, psi_col, out_col, psis = self._compile()
        pts = np.array([[float(x) for x in p.as_vector()] for p in points], dtype=float)
        pts = np.ascontiguousarray(pts.reshape(len(points), 14))
        psi_vals = np.array([[realization.value(n, k, pt[0], pt[13]) for (n, k) in psis]
                             for pt in pts], dtype=float).reshape(len(points), len(psis))
        out = kernels.eval_batch(mono, coef, lam_exp, psi_col, out_col, pts,
                                 np.ascontiguousarray(psi_vals), 3**self.free_rank)
        return out.reshape((len(points),) + (3,) * self.free_rank)

    def evaluate_exact(self, at: Multipliers, realization: PsiRealization):
        """Exact evaluation at a rational point (object array or Fraction)."""
        vec = [Fraction(x) for x in at.as_vector()]
        lam = vec[13]
        psi_cache: dict = {}
        out = np.empty((3,) * self.free_rank, dtype=object) if self.free_rank else None
        acc: dict = defaultdict(Fraction)
        for (f, m, e, p), c in self._t.items():
            v = c * lam**e
            for j, ex in enumerate(m):
                if ex:
                    v *= vec[j] ** ex
            if p is not None:
                if p not in psi_cache:
                    psi_cache[p] = Fraction(realization.value(p[0], p[1], vec[0], lam))
                v *= psi_cache[p]
            acc[f] += v
        if self.free_rank == 0:
            return acc.get((), Fraction(0))
        for idx in itertools.product(AXES, repeat=self.free_rank):
            out[tuple(i - 1 for i in idx)] = acc.get(idx, Fraction(0))
        return out

    def evaluate(self, at: Multipliers, realization: PsiRealization):
        """Value at one point: exact if every coordinate is rational, else float."""
        if at.exact:
            return self.evaluate_exact(at, realization)
        val = self.evaluate_many([at], realization)[0]
        return float(val) if self.free_rank == 0 else val

    # -- serialization ------------------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for (f, m, e, p), c in sorted(self._t.items(), key=lambda kv: (mono_order(kv[0][1]), kv[0][0], kv[0][1], kv[0][2], kv[0][3] or (0, 0))):
            terms.append({
                "p": sum(m[1:4]), "q": sum(m[4:10]), "r": sum(m[10:13]), "s": m[MU],
                "free": list(f),
                "structure": {"mu_vec": list(m[1:4]), "mu_mat": list(m[4:10]),
                              "lam_vec": list(m[10:13])},
                "coeff": LambdaScalar({(e, p): c}).to_json(),
            })
        return {"max_order": self.max_order, "free_rank": self.free_rank, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "MomentSeries":
        rank = int(data.get("free_rank", 0))
        acc: dict = defaultdict(Fraction)
        for t in data["terms"]:
            st = t["structure"]
            if st == "delta":
                raise SeriesError("delta-structured terms must be expanded with make_delta_term")
            m = (int(t["s"]), *map(int, st["mu_vec"]), *map(int, st["mu_mat"]), *map(int, st["lam_vec"]))
            if len(m) != N_VARS:
                raise SeriesError(f"bad structure exponents {st}")
            if (sum(m[1:4]), sum(m[4:10]), sum(m[10:13])) != (t["p"], t["q"], t["r"]):
                raise SeriesError(f"degrees {t['p'], t['q'], t['r']} disagree with structure {st}")
            coeff = LambdaScalar.from_json(t["coeff"])
            for (e, p), c in coeff.items():
                acc[(tuple(t["free"]), m, e, p)] += c
        return cls(acc, rank, int(data["max_order"]))


# ---------------------------------------------------------------------------
# delta structures


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(counts: Sequence[int]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


_PAIRS = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]


@lru_cache(maxsize=None)
def delta_polynomial(p: int, q: int, r: int, free: int = 0) -> dict:
    """Expand the symmetrized delta contracted with ``p`` copies of ``mu_vec``,
    ``q`` copies of ``mu_mat`` and ``r`` copies of ``lam_vec``.

    Returns ``{free_index_tuple: {mono: Fraction}}`` where the first ``free``
    indices of the delta are left open.  Matrix slots run over ordered pairs,
    so each off-diagonal component is counted twice.
    """
    if (free + p + r) % 2:
        raise ParityError(f"p+r+free = {p + r + free} is odd")
    out: dict = {}
    vec_p = [(c, _multinomial(c)) for c in _compositions(p, 3)]
    vec_r = [(c, _multinomial(c)) for c in _compositions(r, 3)]
    mat_q = []
    for c in _compositions(q, 6):
        w = _multinomial(c) * 2 ** (c[1] + c[2] + c[4])
        axis = [0, 0, 0]
        for (a, b), n in zip(_PAIRS, c):
            axis[a - 1] += n
            axis[b - 1] += n
        mat_q.append((c, w, axis))
    for fidx in itertools.product(AXES, repeat=free):
        base = [fidx.count(a) for a in AXES]
        poly: dict = {}
        for cp, wp in vec_p:
            for cq, wq, aq in mat_q:
                for cr, wr in vec_r:
                    counts = tuple(base[i] + cp[i] + aq[i] + cr[i] for i in range(3))
                    if any(x % 2 for x in counts):
                        continue
                    val = delta_value(counts)
                    if val:
                        mono = (0,) + cp + cq + cr
                        poly[mono] = poly.get(mono, 0) + val * wp * wq * wr
        if poly:
            out[fidx] = poly
    return out


def make_delta_term(p: int, q: int, r: int, s: int, coeff, free: int = 0,
                    max_order: int = EXACT) -> MomentSeries:
    """``coeff * mu**s * delta^(...) mu_i.. mu_hk.. lam_j..`` as a series.

    No factorial normalization is applied: fold any ``1/p!q!r!s!`` into
    ``coeff``.
    """
    if min(p, q, r, s, free) < 0:
        raise ValueError("negative degree")
    if (p + r + free) % 2:
        raise ParityError(f"p+r+free = {p + r + free} must be even")
    coeff = coeff if isinstance(coeff, LambdaScalar) else LambdaScalar.const(coeff)
    acc: dict = {}
    for fidx, poly in delta_polynomial(p, q, r, free).items():
        for mono, v in poly.items():
            m = (s,) + mono[1:]
            for (e, psi), c in coeff.items():
                acc[(fidx, m, e, psi)] = acc.get((fidx, m, e, psi), 0) + v * c
    return MomentSeries._build(acc, free, max_order)


def sum_series(parts: Iterable[MomentSeries], free_rank: int = 0,
               max_order: int = EXACT) -> MomentSeries:
    acc: dict = defaultdict(Fraction)
    mo = max_order
    for s in parts:
        if s.free_rank != free_rank:
            raise RankError(f"rank {s.free_rank} in a sum of rank {free_rank}")
        mo = min(mo, s.max_order)
        for k, v in s._t.items():
            acc[k] += v
    return MomentSeries._build(acc, free_rank, mo)
