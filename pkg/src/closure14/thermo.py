"""Integration-constant test on tabulated thermodynamic functions.

On a ``(rho, T)`` grid the combination

    f = beta2 - (5/6) beta3 - (4 h2 + (10/3) p T) (eps + p / rho)

must not depend on ``rho`` and must satisfy ``d(T f)/dT = 0``, so that
``f = C / T``.  The flux tensor is symmetric at first order exactly when the
constant ``C`` vanishes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

FIELDS = ("p", "eps", "h2", "beta2", "beta3")
SYMMETRY_HOLDS = "first-order symmetry holds"
SYMMETRY_BROKEN = "first-order symmetry broken: nonzero integration constant"
NOT_OF_FORM = "f is not of the form C/T"


class GridError(ValueError):
    """Degenerate or malformed thermodynamic grid."""


@dataclass
class ThermoTable:
    """Samples on a tensor grid; every field array has shape ``(len(rho), len(T))``."""

    rho: np.ndarray
    T: np.ndarray
    fields: Mapping[str, np.ndarray]

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        if self.rho.ndim != 1 or self.T.ndim != 1:
            raise GridError("grids must be one-dimensional")
        if len(self.rho) < 4 or len(self.T) < 4:
            raise GridError("need at least four grid points in each direction")
        if np.any(np.diff(self.rho) <= 0) or np.any(np.diff(self.T) <= 0):
            raise GridError("grids must be strictly increasing")
        if np.any(self.rho == 0):
            raise GridError("rho = 0 is not allowed (p/rho)")
        shape = (len(self.rho), len(self.T))
        clean = {}
        for name in FIELDS:
            if name not in self.fields:
                raise GridError(f"missing field {name!r}")
            arr = np.asarray(self.fields[name], dtype=float)
            if arr.shape != shape:
                raise GridError(f"field {name!r} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise GridError(f"field {name!r} has non-finite samples")
            clean[name] = arr
        self.fields = clean

    def f(self) -> np.ndarray:
        d = self.fields
        T = self.T[None, :]
        rho = self.rho[:, None]
        return (d["beta2"] - 5.0 / 6.0 * d["beta3"]
                - (4.0 * d["h2"] + 10.0 / 3.0 * d["p"] * T) * (d["eps"] + d["p"] / rho))


def read_thermo_csv(path) -> ThermoTable:
    """Read a row-per-grid-point CSV with header ``rho,T,p,eps,h2,beta2,beta3``.

    The density column may also be headed ``ρ``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise GridError("empty thermo file")
        names = [n.strip() for n in reader.fieldnames]
        rename = {"ρ": "rho"}
        names = [rename.get(n, n) for n in names]
        missing = [n for n in ("rho", "T") + FIELDS if n not in names]
        if missing:
            raise GridError(f"thermo file lacks columns {missing}")
        rows = []
        for raw in reader:
            row = {rename.get(k.strip(), k.strip()): v for k, v in raw.items()}
            try:
                rows.append({k: float(row[k]) for k in ("rho", "T") + FIELDS})
            except (TypeError, ValueError) as exc:
                raise GridError(f"bad number in thermo file: {exc}") from None
    if not rows:
        raise GridError("thermo file has no rows")
    rho = np.unique([r["rho"] for r in rows])
    T = np.unique([r["T"] for r in rows])
    if len(rows) != len(rho) * len(T):
        raise GridError("rows do not form a complete rho x T grid")
    ri = {v: i for i, v in enumerate(rho)}
    ti = {v: i for i, v in enumerate(T)}
    fields = {k: np.full((len(rho), len(T)), np.nan) for k in FIELDS}
    for r in rows:
        for k in FIELDS:
            fields[k][ri[r["rho"]], ti[r["T"]]] = r[k]
    return ThermoTable(rho, T, fields)


@dataclass
class IntegrationConstantReport:
    constant: float
    rho_independent: bool
    t_f_constant: bool
    constant_zero: bool
    max_d_rho: float
    max_d_T: float
    tolerance: float
    message: str

    @property
    def passed(self) -> bool:
        """``f`` has the form ``C/T``; whether ``C`` vanishes is reported separately."""
        return self.rho_independent and self.t_f_constant

    def to_json(self) -> dict:
        return {"constant": self.constant, "rho_independent": self.rho_independent,
                "t_f_constant": self.t_f_constant, "constant_zero": self.constant_zero,
                "max_d_rho": self.max_d_rho, "max_d_T": self.max_d_T,
                "tolerance": self.tolerance, "message": self.message,
                "first_order_symmetric": self.constant_zero, "pass": self.passed}


def verify_integration_constant(t: ThermoTable, tol: float = 1e-6) -> IntegrationConstantReport:
    """Check ``f = C/T`` by finite differences and report ``C``.

    Derivatives use second-order central differences (one-sided at the
    edges).  Both derivative checks are relative to ``max(1, max|T f|)`` and
    allow ``tol`` plus the squared largest grid spacing.
    """
    f = t.f()
    Tf = f * t.T[None, :]
    scale = max(1.0, float(np.max(np.abs(Tf))))
    h2 = max(float(np.max(np.diff(t.rho))), float(np.max(np.diff(t.T)))) ** 2
    allowed = tol + h2
    d_rho = np.gradient(f, t.rho, axis=0, edge_order=2)
    d_T = np.gradient(Tf, t.T, axis=1, edge_order=2)
    max_d_rho = float(np.max(np.abs(d_rho * t.rho[:, None]))) / scale
    max_d_T = float(np.max(np.abs(d_T * t.T[None, :]))) / scale
    rho_ok = max_d_rho <= allowed
    tf_ok = max_d_T <= allowed
    C = float(np.mean(Tf))
    zero = abs(C) <= tol * scale
    if not (rho_ok and tf_ok):
        msg = NOT_OF_FORM
    elif zero:
        msg = SYMMETRY_HOLDS
    else:
        msg = SYMMETRY_BROKEN
    return IntegrationConstantReport(C, rho_ok, tf_ok, zero and rho_ok and tf_ok, max_d_rho,
                                     max_d_T, allowed, msg)


def synthetic_table(f_of_T, rho=None, T=None, seed: Optional[int] = 0) -> ThermoTable:
    """A table whose ``f`` equals ``f_of_T(T)``: random smooth ``p, eps, h2, beta3``, solved ``beta2``."""
    rho = np.linspace(0.5, 2.0, 8) if rho is None else np.asarray(rho, dtype=float)
    T = np.linspace(1.0, 3.0, 9) if T is None else np.asarray(T, dtype=float)
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 1.5, 4)
    R, TT = np.meshgrid(rho, T, indexing="ij")
    p = a[0] * R * TT
    eps = a[1] * TT + 0.1 * R
    h2 = a[2] * R * TT**2
    beta3 = a[3] * R**2 * TT
    target = np.broadcast_to(np.asarray(f_of_T(TT), dtype=float), R.shape)
    beta2 = target + 5.0 / 6.0 * beta3 + (4.0 * h2 + 10.0 / 3.0 * p * TT) * (eps + p / R)
    return ThermoTable(rho, T, {"p": p, "eps": eps, "h2": h2, "beta2": beta2, "beta3": beta3})


def write_thermo_csv(t: ThermoTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "T", *FIELDS])
        for i, r in enumerate(t.rho):
            for j, T in enumerate(t.T):
                w.writerow([repr(float(r)), repr(float(T))] + [repr(float(t.fields[k][i, j])) for k in FIELDS])
