"""Decay envelopes for the energy and their fitted versions.

Four closed forms, with x = phi(t) = (1+kt)^gamma - 1:

    ExpInPhi   prefactor * exp(-x / C)             (p = 2, expanding domain)
    PolyInPhi  prefactor * x^exponent              (p > 2, exponent -1/beta)
    ExpInT     prefactor * exp(-t / C)             (p = 2, bounded domain)
    PolyInT    prefactor * (1 + rate t)^exponent   (p > 2, bounded domain)

The constant C of the theorem is never pinned down, so ``fit`` regresses
ln E on the appropriate abscissa and lifts the intercept until the envelope
dominates every sample of the fit window.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import linregress

from .errors import DegenerateTrace

KINDS = ("ExpInPhi", "PolyInPhi", "ExpInT", "PolyInT")
MIN_FIT_SAMPLES = 20


@dataclass(frozen=True)
class DecayEnvelope:
    kind: str
    prefactor: float
    C: float = math.nan
    exponent: float = math.nan
    rate: float = 1.0
    beta: float = math.nan
    k: float = 1.0
    gamma: float = 0.5
    fit_window: tuple = (0.0, math.inf)
    slope: float = math.nan
    intercept: float = math.nan
    r2: float = math.nan

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    def phi(self, t):
        return np.expm1(self.gamma * np.log1p(self.k * np.asarray(t, dtype=float)))

    def __call__(self, t):
        return eval_envelope(self, t)

    def to_dict(self):
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        d["schema_version"] = "1"
        return d


def exp_in_phi(E0, C, k, gamma):
    return DecayEnvelope("ExpInPhi", prefactor=E0 * math.e, C=C, k=k, gamma=gamma)


def poly_in_phi(E0, C, p, k, gamma):
    """[C (1+b)(E0^b + 1)/b]^{1/b} phi^{-1/b}, b = (p-2)/p."""
    b = (p - 2) / p
    pref = (C * (1 + b) * (E0 ** b + 1) / b) ** (1 / b)
    return DecayEnvelope("PolyInPhi", prefactor=pref, exponent=-1 / b, beta=b, k=k, gamma=gamma)


def exp_in_t(E0, C):
    return DecayEnvelope("ExpInT", prefactor=E0 * math.e, C=C)


def poly_in_t(E0, A, p):
    """E0 ((1+b)/(1+b A t))^{1/b}, b = (p-2)/p."""
    b = (p - 2) / p
    return DecayEnvelope("PolyInT", prefactor=E0 * (1 + b) ** (1 / b), exponent=-1 / b,
                         rate=b * A, beta=b)


def eval_envelope(env, t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        if env.kind == "ExpInPhi":
            out = env.prefactor * np.exp(-env.phi(t) / env.C)
        elif env.kind == "ExpInT":
            out = env.prefactor * np.exp(-t / env.C)
        elif env.kind == "PolyInPhi":
            x = env.phi(t)
            # phi(0) = 0: the bound is vacuous there
            out = np.where(x > 0, env.prefactor * np.power(np.where(x > 0, x, 1.0), env.exponent),
                           math.inf)
        else:
            out = env.prefactor * (1.0 + env.rate * t) ** env.exponent
    return float(out) if out.ndim == 0 else out


def _abscissa(kind, t, k, gamma):
    if kind == "ExpInT":
        return t
    if kind == "PolyInT":
        return np.log1p(t)
    phi = np.expm1(gamma * np.log1p(k * t))
    if kind == "ExpInPhi":
        return phi
    if np.any(phi <= 0):
        raise ValueError("PolyInPhi fit window must exclude t = 0")
    return np.log(phi)


def fit(trace, kind, k=1.0, gamma=0.5, p=None, window=None):
    """Regress ln E on the envelope's abscissa inside the fit window.

    window defaults to [t_end/4, t_end].  The returned envelope keeps the
    regression slope and R^2, and uses the largest residual as intercept so
    that it dominates the trace on the window.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown envelope kind {kind!r}")
    t_end = float(trace.t[-1])
    lo, hi = (t_end / 4, t_end) if window is None else window
    mask = (trace.t >= lo) & (trace.t <= hi)
    t, E = trace.t[mask], trace.E[mask]
    if t.size < MIN_FIT_SAMPLES:
        raise ValueError(f"need >= {MIN_FIT_SAMPLES} samples in window [{lo}, {hi}], got {t.size}")
    if np.any(E <= 0):
        raise DegenerateTrace("nonpositive energy inside the fit window")
    x = _abscissa(kind, t, k, gamma)
    y = np.log(E)
    reg = linregress(x, y)
    s = float(reg.slope)
    a_max = float(np.max(y - s * x))
    beta = (p - 2) / p if p is not None and p > 2 else math.nan
    common = dict(prefactor=math.exp(a_max), k=k, gamma=gamma, fit_window=(lo, hi), slope=s,
                  intercept=float(reg.intercept), r2=float(reg.rvalue ** 2), beta=beta)
    if kind in ("ExpInPhi", "ExpInT"):
        C = -1.0 / s if s < 0 else math.inf
        return DecayEnvelope(kind, C=C, **common)
    return DecayEnvelope(kind, exponent=s, rate=1.0, **common)


def verify_envelope(trace, env, window=None):
    """max E/bound over the window (default: the envelope's fit window)."""
    lo, hi = env.fit_window if window is None else window
    mask = (trace.t >= lo) & (trace.t <= hi)
    b = eval_envelope(env, trace.t[mask])
    return float(np.max(trace.E[mask] / b))


def compensated_energy(trace, beta, k=1.0, gamma=0.5):
    """E(t) phi(t)^{1/beta}, bounded when the polynomial rate holds."""
    phi = np.expm1(gamma * np.log1p(k * trace.t))
    return trace.E * phi ** (1.0 / beta)


def tail_nonincreasing(t, values, start_fraction=0.5, rtol=1e-9):
    """True when values never rise (beyond rtol * max) on the final part of [t0, t_end]."""
    t = np.asarray(t)
    t0 = t[0] + start_fraction * (t[-1] - t[0])
    v = np.asarray(values)[t >= t0]
    scale = float(np.max(np.abs(v)))
    return bool(np.all(np.diff(v) <= rtol * scale))


def outside_theory(traj):
    """Growth faster than (1+t)^{1/2} is not covered by the decay estimates."""
    return traj.growth_exponent() > 0.5


def write_json(env, path):
    with open(path, "w") as fh:
        json.dump(env.to_dict(), fh, indent=2, sort_keys=True)
