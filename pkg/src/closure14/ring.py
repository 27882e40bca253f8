"""Coefficient ring for the closure series.

Elements are finite sums of rational multiples of ``lam**e * psi`` where ``e``
is any integer and ``psi`` is either absent or a single symbol ``psi_n^(k)``:
the ``k``-th derivative in the scalar multiplier ``lam`` of the ``n``-th
function of the equilibrium family.  The family is tied together by
``d/dmu psi_n = psi_{n-1}``, with negative ``n`` standing for repeated
``mu``-derivatives of ``psi_0``.

Products of two ``psi`` symbols are outside the ring and raise
:class:`PsiProductError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Protocol, Union

Rational = Union[int, Fraction]
Psi = Optional[tuple[int, int]]  # (n, k) or None
Basis = tuple[int, Psi]  # (lam exponent, psi)


class PsiProductError(ArithmeticError):
    """Raised when a product would contain two psi symbols."""


class NotInvertibleError(ArithmeticError):
    """Raised when dividing by something that is not a psi-free monomial."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def mul_basis(a: Basis, b: Basis) -> Basis:
    if a[1] is not None and b[1] is not None:
        raise PsiProductError(f"psi{a[1]} * psi{b[1]}")
    return (a[0] + b[0], a[1] if a[1] is not None else b[1])


def d_mu_basis(b: Basis) -> Optional[Basis]:
    """mu-derivative of a basis element; None when it vanishes."""
    if b[1] is None:
        return None
    n, k = b[1]
    return (b[0], (n - 1, k))


def d_lambda_basis(b: Basis) -> list[tuple[Basis, int]]:
    """lam-derivative of a basis element as (basis, integer factor) pairs."""
    e, psi = b
    out: list[tuple[Basis, int]] = []
    if e != 0:
        out.append(((e - 1, psi), e))
    if psi is not None:
        out.append(((e, (psi[0], psi[1] + 1)), 1))
    return out


class LambdaScalar:
    """Immutable element of the coefficient ring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Basis, Rational]] = None):
        clean: dict[Basis, Fraction] = {}
        if terms:
            for b, c in terms.items():
                c = _as_fraction(c)
                if c:
                    clean[b] = clean.get(b, Fraction(0)) + c
                    if not clean[b]:
                        del clean[b]
        self._terms = clean
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Rational) -> "LambdaScalar":
        return cls({(0, None): c})

    @classmethod
    def lam_power(cls, e: int, c: Rational = 1) -> "LambdaScalar":
        return cls({(e, None): c})

    @classmethod
    def psi(cls, n: int, k: int = 0, e: int = 0, c: Rational = 1) -> "LambdaScalar":
        return cls({(e, (n, k)): c})

    @classmethod
    def zero(cls) -> "LambdaScalar":
        return cls()

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict[Basis, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def has_psi(self) -> bool:
        return any(b[1] is not None for b in self._terms)

    def is_constant(self) -> bool:
        return all(b == (0, None) for b in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        return self._terms.get((0, None), Fraction(0))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "LambdaScalar":
        other = _coerce(other)
        out = dict(self._terms)
        for b, c in other._terms.items():
            out[b] = out.get(b, Fraction(0)) + c
        return LambdaScalar(out)

    __radd__ = __add__

    def __neg__(self) -> "LambdaScalar":
        return LambdaScalar({b: -c for b, c in self._terms.items()})

    def __sub__(self, other) -> "LambdaScalar":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "LambdaScalar":
        return _coerce(other) - self

    def __mul__(self, other) -> "LambdaScalar":
        if isinstance(other, (int, Fraction)):
            return LambdaScalar({b: c * other for b, c in self._terms.items()})
        other = _coerce(other)
        out: dict[Basis, Fraction] = {}
        for b1, c1 in self._terms.items():
            for b2, c2 in other._terms.items():
                b = mul_basis(b1, b2)
                out[b] = out.get(b, Fraction(0)) + c1 * c2
        return LambdaScalar(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LambdaScalar":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _as_fraction(other))
        return self * _coerce(other).inverse()

    def __pow__(self, n: int) -> "LambdaScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = LambdaScalar.const(1)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "LambdaScalar":
        """Inverse of a single psi-free monomial ``c * lam**e``."""
        if len(self._terms) != 1:
            raise NotInvertibleError(f"cannot invert {self}")
        (b, c), = self._terms.items()
        if b[1] is not None:
            raise NotInvertibleError(f"cannot invert {self}")
        return LambdaScalar({(-b[0], None): 1 / c})

    def d_mu(self) -> "LambdaScalar":
        out: dict[Basis, Fraction] = {}
        for b, c in self._terms.items():
            nb = d_mu_basis(b)
            if nb is not None:
                out[nb] = out.get(nb, Fraction(0)) + c
        return LambdaScalar(out)

    def d_lambda(self) -> "LambdaScalar":
        out: dict[Basis, Fraction] = {}
        for b, c in self._terms.items():
            for nb, f in d_lambda_basis(b):
                out[nb] = out.get(nb, Fraction(0)) + c * f
        return LambdaScalar(out)

    # comparison ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (e, psi), c in sorted(self._terms.items(), key=_sort_key):
            s = str(c)
            if e:
                s += f"*lam^{e}"
            if psi is not None:
                s += f"*psi_{psi[0]}^({psi[1]})"
            parts.append(s)
        return " + ".join(parts)

    # evaluation ---------------------------------------------------------
    def evaluate(self, mu, lam, realization: "PsiRealization"):
        total = 0
        for (e, psi), c in self._terms.items():
            if isinstance(lam, float):
                v = float(c) * lam**e
            else:
                v = c * Fraction(lam) ** e
            if psi is not None:
                v = v * realization.value(psi[0], psi[1], mu, lam)
            total = total + v
        return total

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        mons = []
        for (e, psi), c in sorted(self._terms.items(), key=_sort_key):
            mons.append({
                "lam_exp": e,
                "psi": None if psi is None else {"n": psi[0], "k": psi[1]},
                "num": c.numerator,
                "den": c.denominator,
            })
        return {"monomials": mons}

    @classmethod
    def from_json(cls, data: Mapping) -> "LambdaScalar":
        terms: dict[Basis, Fraction] = {}
        for m in data["monomials"]:
            if int(m["den"]) == 0:
                raise ValueError("zero denominator in LambdaScalar monomial")
            psi = m.get("psi")
            b = (int(m["lam_exp"]), None if psi is None else (int(psi["n"]), int(psi["k"])))
            terms[b] = terms.get(b, Fraction(0)) + Fraction(int(m["num"]), int(m["den"]))
        return cls(terms)


def _sort_key(item):
    (e, psi), _ = item
    return (psi is not None, psi or (0, 0), e)


def _coerce(x) -> LambdaScalar:
    if isinstance(x, LambdaScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return LambdaScalar.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a ring element")


LAM = LambdaScalar.lam_power(1)


# ---------------------------------------------------------------------------
# realizations of the psi family


class PsiRealization(Protocol):
    def value(self, n: int, k: int, mu, lam): ...


@dataclass(frozen=True)
class ExpFamily:
    """``psi_n(mu, lam) = exp(mu) * g(lam)`` for every ``n``.

    ``g_derivs(k, lam)`` returns the ``k``-th derivative of ``g``; the default
    is ``g(lam) = lam``.
    """

    g_derivs: Callable[[int, float], float] = None  # type: ignore[assignment]

    def value(self, n, k, mu, lam):
        g = self.g_derivs or _linear_g
        return math.exp(float(mu)) * g(k, float(lam))


def _linear_g(k: int, lam: float) -> float:
    if k == 0:
        return lam
    return 1.0 if k == 1 else 0.0


def exp_g(rate: float = 0.5) -> Callable[[int, float], float]:
    """``g(lam) = exp(rate*lam)``: every derivative is nonzero."""
    return lambda k, lam: rate**k * math.exp(rate * lam)


@dataclass(frozen=True)
class PolynomialFamily:
    """``psi_n(mu, lam) = mu**(n+2) / (n+2)! * lam`` for ``n >= -2``, else 0.

    Rational inputs give exact rational values, which makes exact residual
    checks possible at rational sample points.
    """

    def value(self, n, k, mu, lam):
        m = n + 2
        if m < 0 or k > 1:
            return 0
        gk = lam if k == 0 else 1
        if isinstance(mu, float) or isinstance(lam, float):
            return float(mu) ** m / math.factorial(m) * gk
        return Fraction(mu) ** m / math.factorial(m) * gk


def eval_psi_table(psis: Iterable[tuple[int, int]], mu, lam, realization) -> list:
    return [realization.value(n, k, mu, lam) for n, k in psis]
