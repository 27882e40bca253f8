"""Pure-Python (numpy) implementation of the series evaluation kernel."""

from __future__ import annotations

import numpy as np

_CHUNK = 4096


def _power_table(x: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """``table[p, e - lo] = x[p] ** e`` for ``lo <= e <= hi``."""
    exps = np.arange(lo, hi + 1, dtype=float)
    return x[:, None] ** exps[None, :]


def eval_batch(mono, coef, lam_exp, psi_col, out_col, points, psi_vals, n_out):
    """Evaluate flattened series terms at a batch of points.

    ``mono[t, j]`` is the exponent of variable ``j`` (column ``j`` of
    ``points``) in term ``t``; column 13 of ``points`` holds ``lam``, raised
    to ``lam_exp[t]``.  ``psi_col[t]`` selects a column of ``psi_vals`` (or -1
    for none) and ``out_col[t]`` the output slot the term accumulates into.
    """
    n_pts = points.shape[0]
    out = np.zeros((n_pts, n_out))
    if mono.shape[0] == 0:
        return out
    used = [j for j in range(13) if mono[:, j].any()]
    tables = {j: _power_table(points[:, j], 0, int(mono[:, j].max())) for j in used}
    lo, hi = int(lam_exp.min()), int(lam_exp.max())
    lam_table = _power_table(points[:, 13], lo, hi)
    psi_ext = np.concatenate([psi_vals, np.ones((n_pts, 1))], axis=1)
    col = np.where(psi_col < 0, psi_vals.shape[1], psi_col)
    for start in range(0, mono.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        m = mono[sl]
        vals = lam_table[:, lam_exp[sl] - lo] * coef[sl][None, :]
        for j in used:
            e = m[:, j]
            if e.any():
                vals *= tables[j][:, e]
        vals *= psi_ext[:, col[sl]]
        cols = out_col[sl]
        scatter = np.zeros((len(cols), n_out))
        scatter[np.arange(len(cols)), cols] = 1.0
        out += vals @ scatter
    return out
