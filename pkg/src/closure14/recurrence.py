"""Coefficient tables ``theta_{p,q,r,s}(lam)`` and their linear relations.

The table indexes coefficients by the degrees ``p`` (in ``mu_vec``), ``q``
(in ``mu_mat``), ``r`` (in ``lam_vec``) and the power ``s`` of ``mu``.  Only
``p in {0, 1}`` is stored canonically; larger ``p`` is folded back by
:func:`reduce_p`.  Values are psi-free elements of the coefficient ring, i.e.
Laurent polynomials in ``lam``.

Relations come in two families:

* *structural* relations, valid for every ``p`` and checked by
  :func:`verify_table`:
    - ``mat_shift``:  theta[p, q+1, r, s+1] = theta[p+2, q, r, s]
    - ``lam_shift``:  theta[p, q, r+1, s+1] = d/dlam theta[p+1, q, r, s]
    - ``galilean``:   (p+2q+r+1) theta[p,q,r,s+1] + 2 lam theta[p,q+1,r,s+1]
                      + 2 r theta[p+1,q+1,r-1,s] = 0
* three *normalizations*:
    - ``even_s0_zero``:     theta[0, q, r, 0] = 0
    - ``equilibrium_zero``: theta[0, 0, 0, s] = 0
    - ``odd_s0_zero``:      theta[1, q, r, 0] = 0

:func:`close_table` propagates seeds through the ``p in {0,1}`` form of the
structural relations.  It solves a relation for an entry whenever that entry is
the only unknown and enters without a derivative; it never integrates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .ring import LambdaScalar, NotInvertibleError
from .series import ParityError

ThetaKey = tuple[int, int, int, int]
NORMALIZATIONS = ("even_s0_zero", "equilibrium_zero", "odd_s0_zero")
ZERO = LambdaScalar.zero()
LAM = LambdaScalar.lam_power(1)


class NormalizationError(ValueError):
    """A seed contradicts one of the imposed normalizations."""


def reduce_p(key: ThetaKey) -> ThetaKey:
    """Fold ``p >= 2`` down to ``p in {0, 1}`` via ``(p,q,r,s) -> (p-2,q+1,r,s+1)``."""
    p, q, r, s = key
    if min(key) < 0:
        raise ValueError(f"negative index in {key}")
    if (p + r) % 2:
        raise ParityError(f"p+r odd in {key}")
    k = p // 2
    return (p - 2 * k, q + k, r, s + k)


def order(key: ThetaKey) -> int:
    return key[0] + key[1] + key[2]


def normalization_of(key: ThetaKey) -> Optional[str]:
    """Name of the normalization forcing ``key`` to zero, if any."""
    p, q, r, s = key
    if p == 0 and s == 0:
        return "even_s0_zero"
    if p == 0 and q == 0 and r == 0:
        return "equilibrium_zero"
    if p == 1 and s == 0:
        return "odd_s0_zero"
    return None


@dataclass
class ThetaTable:
    """Coefficient table exact for ``p+q+r <= max_order`` and ``s <= max_s``."""

    max_order: int
    max_s: Optional[int] = None
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_s is None:
            self.max_s = self.max_order
        clean = {}
        for key, v in self.entries.items():
            key = tuple(int(x) for x in key)
            if (key[0] + key[2]) % 2:
                raise ParityError(f"p+r odd in {key}")
            v = v if isinstance(v, LambdaScalar) else LambdaScalar.const(v)
            if v.has_psi():
                raise ValueError(f"theta{key} must be a function of lam only")
            clean[key] = v
        self.entries = clean

    def canonical_s_bound(self) -> int:
        # folding p down raises s by up to max_order // 2
        return self.max_s + self.max_order // 2

    def in_window(self, key: ThetaKey) -> bool:
        if min(key) < 0 or (key[0] + key[2]) % 2 or order(key) > self.max_order:
            return False
        bound = self.canonical_s_bound() if key[0] < 2 else self.max_s
        return key[3] <= bound

    def get(self, key: ThetaKey) -> Optional[LambdaScalar]:
        """Value at ``key``: explicit entry, else the folded canonical entry.

        Missing canonical entries inside the window read as zero; keys outside
        the window give ``None``.
        """
        if not self.in_window(key):
            return None
        if key in self.entries:
            return self.entries[key]
        red = reduce_p(key)
        if not self.in_window(red):
            return None
        return self.entries.get(red, ZERO)

    def canonical_keys(self) -> list[ThetaKey]:
        keys = []
        for p in (0, 1):
            for q in range(self.max_order + 1):
                for r in range(self.max_order + 1 - p - q):
                    if (p + r) % 2:
                        continue
                    for s in range(self.canonical_s_bound() + 1):
                        keys.append((p, q, r, s))
        return keys

    def to_json(self) -> dict:
        return {
            "max_order": self.max_order,
            "max_s": self.max_s,
            "entries": [{"p": k[0], "q": k[1], "r": k[2], "s": k[3], "value": v.to_json()}
                        for k, v in sorted(self.entries.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ThetaTable":
        entries = {}
        for e in data["entries"]:
            entries[(e["p"], e["q"], e["r"], e["s"])] = LambdaScalar.from_json(e["value"])
        return cls(int(data["max_order"]), data.get("max_s"), entries)


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True)
class Relation:
    """``sum coeff * (d/dlam)^deriv theta[key] = 0``."""

    name: str
    terms: tuple  # of (LambdaScalar coeff, bool deriv, ThetaKey)

    def keys(self) -> list[ThetaKey]:
        return [t[2] for t in self.terms]

    def residual(self, lookup) -> Optional[LambdaScalar]:
        acc = ZERO
        for coeff, deriv, key in self.terms:
            v = lookup(key)
            if v is None:
                return None
            acc = acc + coeff * (v.d_lambda() if deriv else v)
        return acc


def _rel(name, *terms) -> Relation:
    return Relation(name, tuple((c if isinstance(c, LambdaScalar) else LambdaScalar.const(c), d, k)
                                for c, d, k in terms if not (isinstance(c, int) and c == 0)))


def structural_relations(max_order: int, max_s: int) -> list[Relation]:
    """All structural relations anchored at keys with ``s <= max_s``."""
    rels = []
    one, mone, two_lam = LambdaScalar.const(1), LambdaScalar.const(-1), LAM * 2
    for p in range(max_order + 1):
        for q in range(max_order + 1):
            for r in range(max_order + 1):
                if (p + r) % 2 or p + q + r > max_order + 2:
                    continue
                for s in range(max_s):
                    rels.append(_rel("mat_shift", (one, False, (p, q + 1, r, s + 1)),
                                     (mone, False, (p + 2, q, r, s))))
                    rels.append(_rel("lam_shift", (one, False, (p, q, r + 1, s + 1)),
                                     (mone, True, (p + 1, q, r, s))))
                    terms = [(p + 2 * q + r + 1, False, (p, q, r, s + 1)),
                             (two_lam, False, (p, q + 1, r, s + 1))]
                    if r >= 1:
                        terms.append((2 * r, False, (p + 1, q + 1, r - 1, s)))
                    rels.append(_rel("galilean", *terms))
    return rels


def canonical_relations(max_order: int, s_bound: int) -> list[Relation]:
    """Structural relations rewritten on ``p in {0, 1}`` keys only."""
    rels = []
    one, mone, two_lam = LambdaScalar.const(1), LambdaScalar.const(-1), LAM * 2
    for q in range(max_order + 1):
        for r in range(max_order + 1):
            for s in range(s_bound):
                if r % 2:
                    rels.append(_rel("lam_shift", (one, False, (0, q, r + 1, s + 1)),
                                     (mone, True, (1, q, r, s))))
                    terms = [(2 * q + r + 2, False, (1, q, r, s + 1)),
                             (two_lam, False, (1, q + 1, r, s + 1)),
                             (2 * r, False, (0, q + 2, r - 1, s + 1))]
                    rels.append(_rel("galilean", *terms))
                else:
                    rels.append(_rel("lam_shift", (one, False, (1, q, r + 1, s + 1)),
                                     (mone, True, (0, q + 1, r, s + 1))))
                    terms = [(2 * q + r + 1, False, (0, q, r, s + 1)),
                             (two_lam, False, (0, q + 1, r, s + 1))]
                    if r >= 2:
                        terms.append((2 * r, False, (1, q + 1, r - 1, s)))
                    rels.append(_rel("galilean", *terms))
    return rels


# ---------------------------------------------------------------------------
# verification and closure


@dataclass(frozen=True)
class Violation:
    relation: str
    key: ThetaKey
    residual: LambdaScalar


def verify_table(table: ThetaTable,
                 normalizations: Iterable[str] = NORMALIZATIONS) -> list[Violation]:
    """Every structural relation, fold consistency and normalization that fails."""
    out: list[Violation] = []
    for rel in structural_relations(table.max_order, table.max_s):
        if not all(table.in_window(k) for k in rel.keys()):
            continue
        res = rel.residual(table.get)
        if res is not None and not res.is_zero():
            out.append(Violation(rel.name, rel.terms[0][2], res))
    for key, v in table.entries.items():
        if key[0] >= 2:
            red = reduce_p(key)
            if table.in_window(red):
                diff = v - table.entries.get(red, ZERO)
                if not diff.is_zero():
                    out.append(Violation("p_reduction", key, diff))
    wanted = set(normalizations)
    for key in table.canonical_keys():
        name = normalization_of(key)
        if name in wanted:
            v = table.get(key)
            if v is not None and not v.is_zero():
                out.append(Violation(name, key, v))
    return out


@dataclass
class ClosureResult:
    table: ThetaTable
    conflicts: list  # of Violation
    undetermined: list  # of ThetaKey

    @property
    def consistent(self) -> bool:
        return not self.conflicts


def close_table(seeds: Mapping[ThetaKey, object], max_order: int, max_s: Optional[int] = None,
                normalizations: Iterable[str] = NORMALIZATIONS) -> ClosureResult:
    """Propagate seeds through the relations and report what is forced.

    Seeds may use any ``p``; they are folded to ``p in {0,1}``.  A seed that
    contradicts an imposed normalization raises :class:`NormalizationError`.
    Contradictions found during propagation are returned as ``conflicts``
    rather than resolved; entries with no propagation path are listed as
    ``undetermined`` and left out of the table.
    """
    shell = ThetaTable(max_order, max_s)
    wanted = set(normalizations)
    known: dict[ThetaKey, LambdaScalar] = {}
    conflicts: list[Violation] = []
    for key, v in seeds.items():
        key = tuple(int(x) for x in key)
        v = v if isinstance(v, LambdaScalar) else LambdaScalar.const(Fraction(v))
        red = reduce_p(key)
        if not shell.in_window(red):
            raise ValueError(f"seed {key} lies outside the table window")
        name = normalization_of(red)
        if name in wanted and not v.is_zero():
            raise NormalizationError(f"seed {key} = {v} contradicts {name}")
        if red in known and known[red] != v:
            conflicts.append(Violation("duplicate_seed", red, known[red] - v))
            continue
        known[red] = v
    universe = set(shell.canonical_keys())
    for key in universe:
        if normalization_of(key) in wanted:
            known.setdefault(key, ZERO)

    rels = [r for r in canonical_relations(max_order, shell.canonical_s_bound())
            if all(k in universe for k in r.keys())]
    by_key: dict[ThetaKey, list[Relation]] = {}
    for r in rels:
        for k in r.keys():
            by_key.setdefault(k, []).append(r)

    pending = list(rels)
    while pending:
        touched: list[ThetaKey] = []
        for rel in pending:
            unknown = [t for t in rel.terms if t[2] not in known]
            if len(unknown) != 1 or unknown[0][1]:
                continue
            coeff, _, key = unknown[0]
            acc = ZERO
            for c, d, k in rel.terms:
                if k != key:
                    acc = acc + c * (known[k].d_lambda() if d else known[k])
            try:
                known[key] = -(acc * coeff.inverse())
            except NotInvertibleError:
                continue
            touched.append(key)
        pending = list({id(r): r for k in touched for r in by_key.get(k, [])}.values())

    for rel in rels:
        res = rel.residual(known.get)
        if res is not None and not res.is_zero():
            conflicts.append(Violation(rel.name, rel.terms[0][2], res))
    table = ThetaTable(max_order, max_s, {k: v for k, v in known.items() if k in universe})
    undetermined = sorted(universe - set(known))
    return ClosureResult(table, conflicts, undetermined)
