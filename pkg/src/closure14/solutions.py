"""Builders for the particular potential and the general correction series.

* :func:`build_H1`   - the particular solution, an isotropic series whose
  coefficients are lam/mu derivatives of the equilibrium family ``psi_n``.
* :func:`build_Hstar0`, :func:`build_ttHk` - the scalar and vector potentials
  that carry the free data (``beta_r``, the integration constants
  ``psi_const`` and an arbitrary function ``F`` of three rotational
  invariants).
* :func:`build_DeltaH` - the general correction assembled from the above and
  a theta table.

The invariants used throughout are

    G0 = lam_vec . lam_vec
    G1 = G0 tr(mu_mat) - lam_vec . mu_mat . lam_vec
    G2 = G0 (mu_mat : mu_mat) - 2 |mu_mat lam_vec|^2
         + 2 tr(mu_mat) (lam_vec . mu_mat . lam_vec) - G0 tr(mu_mat)^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence

from .recurrence import ThetaTable, close_table
from .ring import LambdaScalar
from .series import EXACT, MomentSeries, make_delta_term, sum_series


class AdmissibilityError(ValueError):
    """Solution parameters outside the admissible set."""


def double_factorial(n: int) -> int:
    """``n!!`` with the convention ``(-1)!! = 1``."""
    if n < -1:
        raise ValueError(f"{n}!! is undefined")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


# ---------------------------------------------------------------------------
# functions of the invariants


@dataclass(frozen=True)
class InvariantFunction:
    """A function ``F(G0, G1, G2)`` supplied with its gradient.

    Polynomial functions (``poly`` given as ``{(a, b, c): coeff}`` for
    ``coeff * G0**a * G1**b * G2**c``) can also be expanded into series;
    callable-only functions can only be evaluated pointwise.
    """

    poly: Optional[Mapping[tuple, Fraction]] = None
    value_fn: Optional[Callable] = None
    grad_fn: Optional[Callable] = None

    @classmethod
    def polynomial(cls, terms: Mapping[tuple, object]) -> "InvariantFunction":
        clean = {tuple(int(x) for x in k): Fraction(v) for k, v in terms.items() if Fraction(v)}
        return cls(poly=clean)

    @classmethod
    def zero(cls) -> "InvariantFunction":
        return cls(poly={})

    @classmethod
    def callable(cls, value: Callable, grad: Callable) -> "InvariantFunction":
        return cls(value_fn=value, grad_fn=grad)

    def value(self, g0, g1, g2):
        if self.poly is None:
            return self.value_fn(g0, g1, g2)
        return sum((c * g0**a * g1**b * g2**d for (a, b, d), c in self.poly.items()), 0)

    def grad(self, g0, g1, g2) -> tuple:
        if self.poly is None:
            return tuple(self.grad_fn(g0, g1, g2))
        out = [0, 0, 0]
        for (a, b, d), c in self.poly.items():
            if a:
                out[0] += c * a * g0 ** (a - 1) * g1**b * g2**d
            if b:
                out[1] += c * b * g0**a * g1 ** (b - 1) * g2**d
            if d:
                out[2] += c * d * g0**a * g1**b * g2 ** (d - 1)
        return tuple(out)

    def partial(self, which: int) -> "InvariantFunction":
        """Polynomial partial derivative by ``G0``, ``G1`` or ``G2`` (``which`` = 0, 1, 2)."""
        if self.poly is None:
            raise TypeError("symbolic partials need a polynomial invariant function")
        out = {}
        for exps, c in self.poly.items():
            if exps[which]:
                lowered = list(exps)
                lowered[which] -= 1
                out[tuple(lowered)] = out.get(tuple(lowered), 0) + c * exps[which]
        return InvariantFunction.polynomial(out)

    def to_json(self) -> dict:
        if self.poly is None:
            raise ValueError("only polynomial functions serialize")
        return {"terms": [{"g0": a, "g1": b, "g2": d, "coef": str(c)}
                          for (a, b, d), c in sorted(self.poly.items())]}

    @classmethod
    def from_json(cls, data) -> "InvariantFunction":
        if isinstance(data, str):
            named = {"0": {}, "G0": {(1, 0, 0): 1}, "G1": {(0, 1, 0): 1}, "G2": {(0, 0, 1): 1},
                     "G1^2": {(0, 2, 0): 1}}
            if data not in named:
                raise ValueError(f"unknown named function {data!r}")
            return cls.polynomial(named[data])
        return cls.polynomial({(t.get("g0", 0), t.get("g1", 0), t.get("g2", 0)): Fraction(t["coef"])
                               for t in data["terms"]})


@dataclass
class SolutionParams:
    """Free data of the general correction.

    ``beta`` maps ``r >= 1`` to rationals; a nonzero ``beta[0]`` is not
    admissible.  ``psi_const`` maps even ``r >= 0`` to rationals.  ``theta``
    defaults to the closure of an empty seed set, ``ttH0`` (a scalar series in
    ``mu_mat``, ``lam`` and ``lam_vec``) to zero.
    """

    beta: dict = field(default_factory=dict)
    psi_const: dict = field(default_factory=dict)
    F: InvariantFunction = field(default_factory=InvariantFunction.zero)
    theta: Optional[ThetaTable] = None
    ttH0: Optional[MomentSeries] = None

    def __post_init__(self):
        self.beta = {int(r): Fraction(v) for r, v in self.beta.items() if Fraction(v)}
        self.psi_const = {int(r): Fraction(v) for r, v in self.psi_const.items() if Fraction(v)}
        if self.beta.get(0):
            raise AdmissibilityError("beta_0 must vanish; no vector potential exists otherwise")
        if any(r < 0 for r in self.beta):
            raise AdmissibilityError("beta indices start at 0")
        if any(r < 0 or r % 2 for r in self.psi_const):
            raise AdmissibilityError("psi_const is indexed by even r >= 0")
        if self.ttH0 is not None:
            if self.ttH0.free_rank:
                raise AdmissibilityError("ttH0 must be scalar")
            for (f, m, e, p), _ in self.ttH0.items():
                if m[0] or any(m[1:4]) or p is not None:
                    raise AdmissibilityError("ttH0 may depend on mu_mat, lam and lam_vec only")

    def theta_table(self, max_order: int) -> ThetaTable:
        if self.theta is not None:
            return self.theta
        return close_table({}, max_order).table

    def to_json(self) -> dict:
        out = {"beta": {str(r): str(v) for r, v in sorted(self.beta.items())},
               "psi_const": {str(r): str(v) for r, v in sorted(self.psi_const.items())},
               "F": self.F.to_json()}
        if self.theta is not None:
            out["theta"] = self.theta.to_json()
        if self.ttH0 is not None:
            out["ttH0"] = self.ttH0.to_json()
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SolutionParams":
        theta = ThetaTable.from_json(data["theta"]) if data.get("theta") else None
        tt = MomentSeries.from_json(data["ttH0"]) if data.get("ttH0") else None
        return cls(beta=dict(data.get("beta", {})), psi_const=dict(data.get("psi_const", {})),
                   F=InvariantFunction.from_json(data.get("F", "0")), theta=theta, ttH0=tt)


# ---------------------------------------------------------------------------
# invariant building blocks


class Blocks:
    """Polynomial building blocks truncated at a common order."""

    def __init__(self, max_order: int):
        self.n = max_order
        n = max_order
        self.lv = MomentSeries.lam_vec()
        self.mv = MomentSeries.mu_vec()
        self.M = MomentSeries.mu_mat()
        self.G0 = self.lv.outer(self.lv, n).contract(0, 1)
        self.tr = self.M.contract(0, 1)
        self.Ml = self.M.outer(self.lv, n).contract(1, 2)  # mu_kd lam_d
        self.mll = self.Ml.outer(self.lv, n).contract(0, 1)  # lam.mu.lam
        self.mm = self.M.outer(self.M, n).contract(0, 2).contract(0, 1)  # mu:mu
        self.lmml = self.Ml.outer(self.Ml, n).contract(0, 1)  # |mu lam|^2
        self.MMl = self.M.outer(self.Ml, n).contract(1, 2)  # mu_kc mu_cb lam_b
        self.G1 = self.G0.outer(self.tr, n) - self.mll
        self.G2 = (self.G0.outer(self.mm, n) - self.lmml * 2 + self.tr.outer(self.mll, n) * 2
                   - self.G0.outer(self.tr.outer(self.tr, n), n))
        self._g0pow = {0: MomentSeries.scalar(1)}

    def G0_pow(self, k: int) -> MomentSeries:
        if k not in self._g0pow:
            self._g0pow[k] = self.G0_pow(k - 1).outer(self.G0, self.n)
        return self._g0pow[k]

    def F_series(self, F: InvariantFunction) -> MomentSeries:
        if F.poly is None:
            raise TypeError("series construction needs a polynomial invariant function")
        parts = []
        for (a, b, d), c in F.poly.items():
            if 2 * a + 3 * b + 4 * d > self.n:
                continue
            t = self.G0_pow(a).outer(self.G1.power(b, self.n), self.n)
            t = t.outer(self.G2.power(d, self.n), self.n)
            parts.append(t * c)
        return sum_series(parts, 0, self.n)


@lru_cache(maxsize=8)
def blocks(max_order: int) -> Blocks:
    return Blocks(max_order)


def _betas(params: SolutionParams, inject_beta0, start: int = 0):
    """``(r, beta_r, (2r+3)/r!)`` for the nonzero betas with ``r >= start``.

    ``beta_0`` is only ever present when forcibly injected.
    """
    b = dict(params.beta)
    if inject_beta0 is not None:
        b[0] = Fraction(inject_beta0)
    return [(r, v, Fraction(2 * r + 3, math.factorial(r))) for r, v in sorted(b.items())
            if r >= start and v]


# ---------------------------------------------------------------------------
# builders


def build_H1(max_order: int) -> MomentSeries:
    """The particular potential through deviation order ``max_order``."""
    parts = []
    for p in range(max_order + 1):
        for q in range(max_order + 1 - p):
            for r in range(max_order + 1 - p - q):
                if (p + r) % 2:
                    continue
                m = (p + r) // 2
                e = q + m
                c = LambdaScalar.psi(m - p, 0, e=-e, c=Fraction(-1, 2) ** e)
                for _ in range(r):
                    c = c.d_lambda()
                norm = Fraction(double_factorial(p + 2 * q + r - 1),
                                math.factorial(p) * math.factorial(q) * math.factorial(r))
                parts.append(make_delta_term(p, q, r, 0, c * norm, max_order=max_order))
    return sum_series(parts, 0, max_order)


def build_Hstar0(params: SolutionParams, max_order: int, inject_beta0=None) -> MomentSeries:
    """Scalar potential in ``mu_mat``, ``lam`` and ``lam_vec``."""
    B = blocks(max_order)
    lam = LambdaScalar.lam_power(1)
    parts = []
    for r, c in params.psi_const.items():
        parts.append(make_delta_term(0, 0, r + 2, 0, c / math.factorial(r + 2), max_order=max_order))
    for r, b, w in _betas(params, inject_beta0):
        parts.append(B.G0_pow(r + 1) * (lam * (-2 * w * b)))
        parts.append(B.G0_pow(r).outer(B.mll, max_order) * (w * b))
    return sum_series(parts, 0, max_order)


def build_ttHk(params: SolutionParams, max_order: int, inject_beta0=None) -> MomentSeries:
    """Vector potential (one free index) paired with :func:`build_Hstar0`."""
    n = max_order
    B = blocks(n)
    lam = LambdaScalar.lam_power(1)
    beta1 = params.beta.get(1, Fraction(0))
    parts = [B.lv.outer(B.F_series(params.F), n)]
    if beta1:
        inner = B.mll.outer(B.Ml, n) * 4 + B.lv.outer(B.mm.outer(B.G0, n) + B.lmml * 2, n)
        parts.append(inner * (Fraction(-5, 4) * beta1))
    for r, c in params.psi_const.items():
        k = Fraction(1, math.factorial(r + 1)) * c
        parts.append(make_delta_term(0, 0, r + 1, 0, lam * k, free=1, max_order=n))
        parts.append(make_delta_term(0, 1, r + 1, 0, -k * Fraction(r + 3, 2 * (r + 2)),
                                     free=1, max_order=n))
    scalar = []
    B1 = blocks(n + 1)
    for r, b, w in _betas(params, inject_beta0):
        body = B1.mll * lam - B1.G0 * (lam * lam)
        scalar.append(B1.G0_pow(r).outer(body, n + 1) * (w * b))
    if scalar:
        parts.append(sum_series(scalar, 0, n + 1).d_lam_vec())
    for r, b, w in _betas(params, inject_beta0, start=2):
        parts.append(B.Ml.outer(B.mll.outer(B.G0_pow(r - 1), n), n) * (-w * b))
        parts.append(B.lv.outer(B.mll.outer(B.mll, n).outer(B.G0_pow(r - 2), n), n)
                     * (Fraction(-(2 * r - 3), 4) * w * b))
        parts.append(B.lv.outer(B.lmml.outer(B.G0_pow(r - 1), n), n) * (-w * b))
    return sum_series(parts, 1, n)


def build_DeltaH(params: SolutionParams, max_order: int, inject_beta0=None) -> MomentSeries:
    """General correction to the particular potential."""
    n = max_order
    B = blocks(n)
    theta = params.theta_table(n)
    parts = []
    for p in range(n + 1):
        for q in range(n + 1 - p):
            for r in range(n + 1 - p - q):
                if (p + r) % 2:
                    continue
                for s in range(theta.max_s + 1):
                    v = theta.get((p, q, r, s))
                    if v is None or v.is_zero():
                        continue
                    w = Fraction(1, math.factorial(p) * math.factorial(q) * math.factorial(r)
                                 * math.factorial(s + 1))
                    parts.append(make_delta_term(p, q, r, s + 1, v * w, max_order=n))
                if p + 2 + q + r <= n:
                    v = theta.get((p, q + 1, r, 0))
                    if v is not None and not v.is_zero():
                        w = Fraction(1, math.factorial(p + 2) * math.factorial(q) * math.factorial(r))
                        parts.append(make_delta_term(p + 2, q, r, 0, v * w, max_order=n))
    parts.append(build_Hstar0(params, n, inject_beta0).times_mu())
    ml = B.mv.outer(B.lv, n).contract(0, 1)
    ml2 = ml.outer(ml, n)
    for r, b, w in _betas(params, inject_beta0):
        parts.append(ml2.outer(B.G0_pow(r), n) * (w * b / 2))
    parts.append(B.mv.outer(build_ttHk(params, n, inject_beta0), n).contract(0, 1))
    if params.ttH0 is not None:
        parts.append(params.ttH0.truncate(n))
    return sum_series(parts, 0, n)


def build_H(params: SolutionParams, max_order: int) -> MomentSeries:
    return build_H1(max_order) + build_DeltaH(params, max_order)
