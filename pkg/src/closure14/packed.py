"""Float series packed into numpy arrays, for fast differentiation and evaluation.

A :class:`PackedSeries` holds the same data as a
:class:`~closure14.series.MomentSeries` (one row per term: monomial
exponents, ``lam`` exponent, optional ``psi_n^(k)`` symbol and flattened free
index) with float coefficients.  Derivatives are vectorized over all terms and
evaluation can split the result by deviation order, which lets residual checks
truncate products numerically instead of expanding them symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .series import LAM_VEC, MU, MU_MAT, MU_VEC, N_VARS, MomentSeries, Multipliers, SeriesError
from .ring import PsiRealization

_MAT_PAIRS = [(a, b) for a in range(3) for b in range(3)]


@dataclass(frozen=True)
class PackedSeries:
    mono: np.ndarray  # (T, 13) int
    coef: np.ndarray  # (T,) float
    lam_exp: np.ndarray  # (T,) int
    psi: np.ndarray  # (T, 2) int, (n, k) of the psi symbol
    has_psi: np.ndarray  # (T,) bool
    out: np.ndarray  # (T,) int, flattened free index (base 3, first slot most significant)
    free_rank: int

    @classmethod
    def from_series(cls, s: MomentSeries) -> "PackedSeries":
        mono, coef, lam_exp, psi_col, out_col, psis = s._compile()
        table = np.array(psis, dtype=np.int64).reshape(len(psis), 2)
        has = psi_col >= 0
        psi = np.zeros((len(coef), 2), dtype=np.int64)
        if len(psis):
            psi[has] = table[psi_col[has]]
        return cls(mono.astype(np.int64), coef.copy(), lam_exp.astype(np.int64), psi, has,
                   out_col.astype(np.int64), s.free_rank)

    def __len__(self) -> int:
        return len(self.coef)

    def orders(self) -> np.ndarray:
        return self.mono.sum(axis=1) - self.mono[:, MU]

    def _take(self, mask, **repl) -> "PackedSeries":
        fields = dict(mono=self.mono[mask], coef=self.coef[mask], lam_exp=self.lam_exp[mask],
                      psi=self.psi[mask], has_psi=self.has_psi[mask], out=self.out[mask],
                      free_rank=self.free_rank)
        fields.update(repl)
        return PackedSeries(**fields)

    def truncate(self, n: int) -> "PackedSeries":
        return self._take(self.orders() <= n)

    @staticmethod
    def concat(parts: Sequence["PackedSeries"], free_rank: int) -> "PackedSeries":
        if not parts:
            return PackedSeries(np.zeros((0, N_VARS), np.int64), np.zeros(0), np.zeros(0, np.int64),
                                np.zeros((0, 2), np.int64), np.zeros(0, bool), np.zeros(0, np.int64),
                                free_rank)
        return PackedSeries(np.concatenate([p.mono for p in parts]),
                            np.concatenate([p.coef for p in parts]),
                            np.concatenate([p.lam_exp for p in parts]),
                            np.concatenate([p.psi for p in parts]),
                            np.concatenate([p.has_psi for p in parts]),
                            np.concatenate([p.out for p in parts]), free_rank)

    def merged(self) -> "PackedSeries":
        """Combine rows that differ only in their coefficient."""
        if not len(self):
            return self
        keys = self._row_keys()
        if keys is None:
            key = np.column_stack([self.mono, self.lam_exp, self.psi, self.has_psi, self.out])
            _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
            inv = inv.ravel()
        else:
            order = np.lexsort(keys[::-1])
            k0, k1 = keys[0][order], keys[1][order]
            start = np.ones(len(order), dtype=bool)
            start[1:] = (k0[1:] != k0[:-1]) | (k1[1:] != k1[:-1])
            group = np.cumsum(start) - 1
            first = order[start]
            inv = np.empty(len(order), dtype=np.int64)
            inv[order] = group
        coef = np.bincount(inv, weights=self.coef, minlength=len(first))
        keep = coef != 0
        return self._take(first[keep], coef=coef[keep])

    def _row_keys(self):
        """Two int64 keys identifying each row, or None if a field is out of range."""
        if not len(self):
            return None
        if (self.mono.min() < 0 or self.mono.max() >= 16 or np.abs(self.lam_exp).max() >= 512
                or np.abs(self.psi).max() >= 512 or self.out.max() >= 1 << 20):
            return None
        k0 = np.zeros(len(self), dtype=np.int64)
        for j in range(self.mono.shape[1]):
            k0 = (k0 << 4) | self.mono[:, j]
        k1 = self.lam_exp + 512
        k1 = (k1 << 10) | (self.psi[:, 0] + 512)
        k1 = (k1 << 10) | (self.psi[:, 1] + 512)
        k1 = (k1 << 1) | self.has_psi.astype(np.int64)
        k1 = (k1 << 20) | self.out
        return k0, k1

    # -- derivatives ------------------------------------------------------------
    def _d_var(self, j: int, new_slot=None, weight: float = 1.0, base: int = 3) -> "PackedSeries":
        mask = self.mono[:, j] > 0
        part = self._take(mask)
        mono = part.mono.copy()
        coef = part.coef * mono[:, j] * weight
        mono[:, j] -= 1
        out = part.out if new_slot is None else part.out * base + new_slot
        return PackedSeries(mono, coef, part.lam_exp, part.psi, part.has_psi, out, part.free_rank)

    def d_mu(self) -> "PackedSeries":
        a = self._d_var(MU)
        b = self._take(self.has_psi)
        psi = b.psi.copy()
        psi[:, 0] -= 1
        b = PackedSeries(b.mono, b.coef, b.lam_exp, psi, b.has_psi, b.out, b.free_rank)
        return PackedSeries.concat([a, b], self.free_rank).merged()

    def d_lam(self) -> "PackedSeries":
        mask = self.lam_exp != 0
        a = self._take(mask)
        a = PackedSeries(a.mono, a.coef * a.lam_exp, a.lam_exp - 1, a.psi, a.has_psi, a.out,
                         a.free_rank)
        b = self._take(self.has_psi)
        psi = b.psi.copy()
        psi[:, 1] += 1
        b = PackedSeries(b.mono, b.coef, b.lam_exp, psi, b.has_psi, b.out, b.free_rank)
        return PackedSeries.concat([a, b], self.free_rank).merged()

    def _d_vec(self, positions) -> "PackedSeries":
        parts = [self._d_var(positions[a], new_slot=a) for a in range(3)]
        return PackedSeries.concat(parts, self.free_rank + 1).merged()

    def d_mu_mat(self) -> "PackedSeries":
        parts = []
        for a, b in _MAT_PAIRS:
            w = 1.0 if a == b else 0.5
            parts.append(self._d_var(MU_MAT[(a + 1, b + 1)], new_slot=a * 3 + b, weight=w, base=9))
        return PackedSeries.concat(parts, self.free_rank + 2).merged()

    def differentiate(self, var: str) -> "PackedSeries":
        if var == "mu":
            return self.d_mu()
        if var == "lam":
            return self.d_lam()
        if var == "mu_vec":
            return self._d_vec(MU_VEC)
        if var == "lam_vec":
            return self._d_vec(LAM_VEC)
        if var == "mu_mat":
            return self.d_mu_mat()
        raise SeriesError(f"unknown variable {var!r}")

    # -- evaluation -----------------------------------------------------------------
    def evaluate_graded(self, pts: np.ndarray, realization: PsiRealization,
                        max_grade: int) -> np.ndarray:
        """Values split by deviation order.

        ``pts`` is a float array of shape ``(P, 14)`` in the layout of
        :meth:`Multipliers.as_vector`.  Returns shape
        ``(max_grade + 1, P) + (3,) * free_rank``; terms above ``max_grade``
        are dropped.
        """
        n_pts = pts.shape[0]
        width = 3 ** self.free_rank
        keep = self.orders() <= max_grade
        part = self._take(keep)
        if len(part):
            psis, psi_col = np.unique(part.psi[part.has_psi], axis=0, return_inverse=True)
            col = np.full(len(part), -1, dtype=np.int32)
            col[part.has_psi] = psi_col.ravel()
        else:
            psis, col = np.zeros((0, 2), np.int64), np.zeros(0, np.int32)
        psi_vals = np.array([[realization.value(int(n), int(k), p[0], p[13]) for n, k in psis]
                             for p in pts], dtype=float).reshape(n_pts, len(psis))
        out_col = (part.orders() * width + part.out).astype(np.int32)
        vals = kernels.eval_batch(np.ascontiguousarray(part.mono, dtype=np.int32),
                                  np.ascontiguousarray(part.coef, dtype=float),
                                  np.ascontiguousarray(part.lam_exp, dtype=np.int32),
                                  col, out_col, np.ascontiguousarray(pts, dtype=float),
                                  np.ascontiguousarray(psi_vals), (max_grade + 1) * width)
        vals = vals.reshape((n_pts, max_grade + 1) + (3,) * self.free_rank)
        return np.moveaxis(vals, 1, 0)

    def evaluate_many(self, points: Sequence[Multipliers], realization: PsiRealization) -> np.ndarray:
        pts = points_array(points)
        top = int(self.orders().max()) if len(self) else 0
        return self.evaluate_graded(pts, realization, top).sum(axis=0)


def points_array(points: Sequence[Multipliers]) -> np.ndarray:
    return np.array([[float(x) for x in p.as_vector()] for p in points], dtype=float).reshape(
        len(points), 14)
