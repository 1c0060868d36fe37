"""Komornik-type integral inequality on sampled energy traces.

If E is non-increasing and, for some q >= 0 and A > 0,

    int_S^inf E^{q+1} phi' dt <= (1/A) E^q(0) E(S)   for all S >= 0,

then E(t) <= E(0) ((1+q)/(1+q A phi(t)))^{1/q} for q > 0 and
E(t) <= E(0) exp(1 - A phi(t)) for q = 0.  Here the improper integral is
truncated at the end of the trace, and the largest A compatible with the
sampled data is estimated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DegenerateTrace, HypothesisViolation

S_FRACTION = 0.8
TAIL_TRUST = 0.01
SCHEMA_VERSION = "1"


@dataclass
class KomornikReport:
    q: float
    A_hat: float
    S_grid: np.ndarray
    hypothesis_margins: np.ndarray
    tail_fraction: float
    bound_violation: float
    weight: dict = field(default_factory=dict)

    @property
    def trusted(self):
        return self.tail_fraction <= TAIL_TRUST

    @property
    def warning(self):
        return not self.trusted

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "q": self.q,
            "A_hat": self.A_hat,
            "S_grid": [float(s) for s in self.S_grid],
            "hypothesis_margins": [float(m) for m in self.hypothesis_margins],
            "min_hypothesis_margin": float(np.min(self.hypothesis_margins)),
            "tail_fraction": self.tail_fraction,
            "trusted": self.trusted,
            "warning": self.warning,
            "bound_violation": self.bound_violation,
            "weight": self.weight,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def tail_integrals(t, E, phi, q):
    """int_{t_j}^{T} E^{q+1} phi' dt for every sample j (trapezoid)."""
    f = np.asarray(E, dtype=float) ** (q + 1) * np.asarray(phi.dphi(t))
    cum = cumulative_trapezoid(f, t, initial=0.0)
    return cum[-1] - cum


def s_grid_size(n, s_fraction=S_FRACTION):
    return max(1, int(math.floor(s_fraction * (n - 1))) + 1)


def estimate_A(trace, phi, q, s_fraction=S_FRACTION):
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    t, E = trace.t, trace.E
    if len(t) < 3:
        raise DegenerateTrace("trace needs at least three samples")
    E0 = float(E[0])
    if not E0 > 0:
        raise DegenerateTrace("E(0) = 0: the decay bound is trivial")
    if np.any(E < 0):
        raise DegenerateTrace("negative energy in trace")
    bad = trace.monotone_violations()
    if bad.size:
        n = int(bad[0])
        raise HypothesisViolation(
            "non-increasing energy",
            f"E rises from {E[n - 1]:.6g} to {E[n]:.6g} at t={t[n]:.6g}, beyond the residual budget")
    phi.check_monotone(t)

    I = tail_integrals(t, E, phi, q)
    ns = s_grid_size(len(t), s_fraction)
    S, IS, ES = t[:ns], I[:ns], E[:ns]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(IS > 0, E0 ** q * ES / IS, np.inf)
    A_hat = float(np.min(ratio))
    if not (A_hat > 0 and math.isfinite(A_hat)):
        raise DegenerateTrace("no start time with a positive tail integral")
    # I * (ratio / A_hat - 1) is >= 0 exactly because ratio >= A_hat
    margins = np.full_like(ratio, np.inf)
    fin = np.isfinite(ratio)
    margins[fin] = IS[fin] * (ratio[fin] / A_hat - 1.0)

    bound = decay_bound(E0, q, A_hat, phi)
    viol = verify_bound(trace, bound, t_max=S[-1])
    return KomornikReport(q=float(q), A_hat=A_hat, S_grid=S, hypothesis_margins=margins,
                          tail_fraction=float(E[-1] / E0), bound_violation=viol,
                          weight=phi.to_dict())


def decay_bound(E0, q, A, phi):
    """t -> E0 ((1+q)/(1+q A phi(t)))^{1/q}, or E0 exp(1 - A phi(t)) when q = 0."""
    if E0 < 0 or not A > 0 or q < 0:
        raise ValueError("need E0 >= 0, A > 0, q >= 0")
    if q == 0:
        return lambda t: E0 * np.exp(1.0 - A * np.asarray(phi.phi(t)))
    return lambda t: E0 * ((1.0 + q) / (1.0 + q * A * np.asarray(phi.phi(t)))) ** (1.0 / q)


def verify_bound(trace, bound, t_max=None):
    """max E(t)/bound(t) over the trace (optionally only t <= t_max)."""
    t, E = trace.t, trace.E
    if t_max is not None:
        keep = t <= t_max
        t, E = t[keep], E[keep]
    b = np.asarray(bound(t), dtype=float)
    if np.any(b <= 0):
        raise ValueError("bound must be positive wherever evaluated")
    return float(np.max(E / b))
