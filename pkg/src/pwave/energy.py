"""Energy, dissipation rate and the discrete dissipation identity.

In reference coordinates (x = L y) the energy is

    E = 1/2 L int w^2 dy + 1/p L^{1-p} int |v_y|^p dy

and the dissipation rate is D = L^{-1} int w_y^2 dy.  Both use the composite
trapezoid rule with gradients at half nodes, the same stencil the solver's
flux uses, so that for a fixed domain and p = 2 the discrete identity
E(t_{n+1}) - E(t_n) = -int D dt is exact up to time discretization.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

CSV_HEADER = ("t", "E", "D", "L", "residual")


def _grad(a, h):
    return np.diff(a) / h


def l2_sq(a, h):
    # trapezoid with zero endpoints reduces to h * sum of interior values
    return h * float(np.dot(a, a))


def energy(state):
    h, L, p = state.h, state.L, state.p
    kinetic = 0.5 * L * l2_sq(state.w, h)
    g = np.abs(_grad(state.v, h))
    potential = L ** (1 - p) / p * h * float(np.sum(g ** p))
    return kinetic + potential


def dissipation(state):
    h = state.h
    gw = _grad(state.w, h)
    return h * float(np.dot(gw, gw)) / state.L


@dataclass(frozen=True)
class EnergyTrace:
    """Time series of (t, E, D, L, residual).

    ``residual[n]`` is the identity defect on the interval ending at sample n,
    E(t_n) - E(t_{n-1}) + (D(t_{n-1}) + D(t_n))/2 (t_n - t_{n-1}); residual[0] = 0.
    """

    t: np.ndarray
    E: np.ndarray
    D: np.ndarray
    L: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(getattr(self, k), dtype=float) for k in CSV_HEADER]
        n = arrays[0].size
        if any(a.shape != (n,) for a in arrays):
            raise ValueError("trace columns must be 1-D arrays of equal length")
        if n >= 2 and np.any(np.diff(arrays[0]) <= 0):
            raise ValueError("trace times must be strictly increasing")
        for name, a in zip(CSV_HEADER, arrays):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_arrays(cls, t, E, D, L):
        t, E, D = (np.asarray(a, dtype=float) for a in (t, E, D))
        res = np.zeros_like(E)
        res[1:] = np.diff(E) + 0.5 * (D[:-1] + D[1:]) * np.diff(t)
        return cls(t, E, D, np.asarray(L, dtype=float), res)

    def __len__(self):
        return self.t.size

    @property
    def E0(self):
        return float(self.E[0])

    def monotone_violations(self, rel_tol=1e-12):
        """Indices n where E(t_n) > E(t_{n-1}) + |residual_n| + rel_tol * E(0)."""
        budget = np.abs(self.residual[1:]) + rel_tol * abs(self.E0)
        return np.nonzero(np.diff(self.E) > budget)[0] + 1

    def strict_increases(self, rel_tol=1e-12):
        """Indices n where E(t_n) > E(t_{n-1}) + rel_tol * E(0), ignoring the residual budget."""
        return np.nonzero(np.diff(self.E) > rel_tol * abs(self.E0))[0] + 1

    def sum_abs_residual(self):
        return float(np.sum(np.abs(self.residual)))

    def max_abs_residual(self):
        return float(np.max(np.abs(self.residual)))

    def window(self, t_lo, t_hi):
        mask = (self.t >= t_lo) & (self.t <= t_hi)
        return EnergyTrace(self.t[mask], self.E[mask], self.D[mask], self.L[mask],
                           self.residual[mask])

    def equals(self, other):
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in CSV_HEADER)

    # -- CSV ------------------------------------------------------------

    def to_csv_text(self, extra=None):
        """CSV with header "t,E,D,L,residual"; floats carry 17 significant digits.

        ``extra`` maps additional column names to arrays (e.g. "bound").
        """
        buf = io.StringIO()
        cols = list(CSV_HEADER)
        data = [getattr(self, k) for k in CSV_HEADER]
        for name, arr in (extra or {}).items():
            cols.append(name)
            data.append(np.asarray(arr, dtype=float))
        buf.write(",".join(cols) + "\n")
        for row in zip(*data):
            buf.write(",".join("%.17g" % x for x in row) + "\n")
        return buf.getvalue()

    def to_csv(self, path, extra=None):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text(extra))

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            return cls.from_csv_text(fh.read())

    @classmethod
    def from_csv_text(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(c.strip() for c in rows[0][:5]) != CSV_HEADER:
            raise ValueError(f"trace CSV must start with header {','.join(CSV_HEADER)!r}")
        cols = {k: [] for k in CSV_HEADER}
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) < 5:
                raise ValueError(f"line {lineno}: expected 5 columns, got {len(row)}")
            try:
                for k, x in zip(CSV_HEADER, row):
                    cols[k].append(float(x))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if not cols["t"]:
            raise ValueError("trace CSV has no data rows")
        return cls(*(np.array(cols[k]) for k in CSV_HEADER))


def identity_residuals(states):
    """Energy trace of an ordered sequence of states with per-interval identity defects."""
    states = list(states)
    if len(states) < 2:
        raise ValueError("need at least two states")
    t = np.array([s.t for s in states], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("states must have strictly increasing times")
    E = [energy(s) for s in states]
    D = [dissipation(s) for s in states]
    L = [s.L for s in states]
    return EnergyTrace.from_arrays(t, E, D, L)
