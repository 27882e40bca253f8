"""Fully symmetric tensors over three spatial dimensions.

A rank-``n`` symmetric tensor is stored by its independent components, keyed
by non-decreasing index tuples over ``{1, 2, 3}``.  Components are exact
``Fraction`` values in ``"rational"`` mode or floats in ``"float"`` mode.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

AXES = (1, 2, 3)
Number = Union[int, Fraction, float]


class RankError(ValueError):
    """Raised for impossible ranks or rank mismatches."""


class ModeError(ValueError):
    """Raised when rational and float tensors are mixed."""


def canonical_keys(rank: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(AXES, rank))


def n_components(rank: int) -> int:
    return math.comb(rank + 2, 2)


class SymTensor:
    __slots__ = ("rank", "mode", "_c")

    def __init__(self, rank: int, components: Mapping[tuple[int, ...], Number] | None = None,
                 mode: str = "rational"):
        if rank < 0:
            raise RankError(f"negative rank {rank}")
        if mode not in ("rational", "float"):
            raise ModeError(f"unknown mode {mode!r}")
        self.rank = rank
        self.mode = mode
        self._c: dict[tuple[int, ...], Number] = {}
        for key, v in (components or {}).items():
            key = tuple(sorted(key))
            if len(key) != rank or any(a not in AXES for a in key):
                raise RankError(f"bad index {key} for rank {rank}")
            self._c[key] = Fraction(v) if mode == "rational" else float(v)

    def __getitem__(self, idx: Sequence[int]) -> Number:
        key = tuple(sorted(idx))
        if len(key) != self.rank:
            raise RankError(f"index {tuple(idx)} has wrong length for rank {self.rank}")
        return self._c.get(key, Fraction(0) if self.mode == "rational" else 0.0)

    def items(self):
        return ((k, self[k]) for k in canonical_keys(self.rank))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymTensor) or other.rank != self.rank:
            return NotImplemented
        return all(self[k] == other[k] for k in canonical_keys(self.rank))

    def __repr__(self) -> str:
        nz = {k: v for k, v in self._c.items() if v}
        return f"SymTensor(rank={self.rank}, mode={self.mode}, {nz})"

    def to_float(self) -> "SymTensor":
        return SymTensor(self.rank, dict(self._c), mode="float")

    def to_dense(self) -> np.ndarray:
        """Full ``3**rank`` array (object dtype in rational mode)."""
        dtype = object if self.mode == "rational" else float
        arr = np.empty((3,) * self.rank, dtype=dtype)
        for idx in itertools.product(range(3), repeat=self.rank):
            arr[idx] = self[tuple(i + 1 for i in idx)]
        return arr

    def to_json(self) -> dict:
        comps = []
        for k in canonical_keys(self.rank):
            v = self[k]
            if self.mode == "rational":
                comps.append({"idx": list(k), "num": v.numerator, "den": v.denominator})
            else:
                comps.append({"idx": list(k), "value": v})
        return {"rank": self.rank, "mode": self.mode, "components": comps}

    @classmethod
    def from_json(cls, data: Mapping) -> "SymTensor":
        mode = data.get("mode", "rational")
        comps = {}
        for c in data["components"]:
            if mode == "rational":
                comps[tuple(c["idx"])] = Fraction(int(c["num"]), int(c["den"]))
            else:
                comps[tuple(c["idx"])] = float(c["value"])
        return cls(int(data["rank"]), comps, mode=mode)


def sym_delta(n: int) -> SymTensor:
    """Symmetrized product of ``n >= 1`` Kronecker deltas (rank ``2n``).

    Built from the recursion that pairs the first index with each of the
    others and symmetrizes what is left.
    """
    if n < 1:
        raise RankError(f"delta order must be at least 1, got {n}")
    return _sym_delta(n)


@lru_cache(maxsize=None)
def _sym_delta(n: int) -> SymTensor:
    if n == 0:
        return SymTensor(0, {(): 1})
    prev = _sym_delta(n - 1)
    comps = {}
    for key in canonical_keys(2 * n):
        first, rest = key[0], key[1:]
        acc = Fraction(0)
        for j, a in enumerate(rest):
            if a == first:
                acc += prev[rest[:j] + rest[j + 1:]]
        if acc:
            comps[key] = acc / (2 * n - 1)
    return SymTensor(2 * n, comps)


def symmetrize(raw: Mapping[tuple[int, ...], Number] | np.ndarray, rank: int,
               mode: str = "rational") -> SymTensor:
    """Average an arbitrary rank-``rank`` table over all index permutations.

    ``raw`` maps full (ordered) index tuples over ``{1,2,3}`` to values, or is a
    dense ``(3,)*rank`` array indexed from zero.
    """
    if isinstance(raw, np.ndarray):
        if raw.shape != (3,) * rank:
            raise RankError(f"array shape {raw.shape} does not match rank {rank}")
        get = lambda idx: raw[tuple(i - 1 for i in idx)]  # noqa: E731
    else:
        for k in raw:
            if len(k) != rank:
                raise RankError(f"index {k} has wrong length for rank {rank}")
        zero = Fraction(0) if mode == "rational" else 0.0
        get = lambda idx: raw.get(tuple(idx), zero)  # noqa: E731
    comps = {}
    for key in canonical_keys(rank):
        perms = set(itertools.permutations(key))
        total = sum((get(p) for p in perms), Fraction(0) if mode == "rational" else 0.0)
        comps[key] = total / len(perms)
    return SymTensor(rank, comps, mode=mode)


def _arg_slots(arg) -> int:
    shape = np.shape(arg)
    if shape == (3,):
        return 1
    if shape == (3, 3):
        return 2
    raise RankError(f"contraction argument must be a 3-vector or 3x3 matrix, got shape {shape}")


def contract(t: SymTensor, args: Iterable) -> SymTensor:
    """Contract the leading slots of ``t`` with vectors and (symmetric) matrices.

    Each vector consumes one slot and each 3x3 matrix two.  Because ``t`` is
    symmetric the result is symmetric in the remaining slots.
    """
    args = list(args)
    slots = [_arg_slots(a) for a in args]
    used = sum(slots)
    if used > t.rank:
        raise RankError(f"{used} slots requested from a rank-{t.rank} tensor")
    choices = []
    for a, s in zip(args, slots):
        arr = np.asarray(a, dtype=object)
        if s == 1:
            choices.append([((i + 1,), arr[i]) for i in range(3) if arr[i] != 0])
        else:
            choices.append([((i + 1, j + 1), arr[i, j]) for i in range(3) for j in range(3)
                            if arr[i, j] != 0])
    rest = t.rank - used
    zero = Fraction(0) if t.mode == "rational" else 0.0
    comps = {}
    for free in canonical_keys(rest):
        acc = zero
        for combo in itertools.product(*choices):
            idx = list(free)
            w = 1
            for sub, val in combo:
                idx.extend(sub)
                w = w * val
            acc = acc + t[idx] * w
        comps[free] = acc
    return SymTensor(rest, comps, mode=t.mode)


def outer(a: SymTensor, b: SymTensor) -> SymTensor:
    """Symmetrized tensor product of two symmetric tensors."""
    if a.mode != b.mode:
        raise ModeError("cannot mix rational and float tensors")
    n = a.rank + b.rank
    comps = {}
    for key in canonical_keys(n):
        subsets = list(itertools.combinations(range(n), a.rank))
        acc = Fraction(0) if a.mode == "rational" else 0.0
        for sub in subsets:
            chosen = set(sub)
            ka = [key[i] for i in sub]
            kb = [key[i] for i in range(n) if i not in chosen]
            acc = acc + a[ka] * b[kb]
        comps[key] = acc / len(subsets)
    return SymTensor(n, comps, mode=a.mode)


def delta_value(counts: tuple[int, int, int]) -> Fraction:
    """Component of the symmetrized delta with the given axis multiplicities."""
    n2 = sum(counts)
    if n2 % 2:
        raise RankError("odd total rank")
    key = tuple(a for a, c in zip(AXES, counts) for _ in range(c))
    return _sym_delta(n2 // 2)[key]
