"""Admissible growth exponents and grid certification of the weight conditions.

With phi' proportional to L^{-m}, the multiplier argument needs a handful of
"quantity <= C" bounds on phi', phi'' and L.  The thresholds on m follow from
requiring each quantity to stay bounded as L grows; here they are evaluated
in closed form (m_min, m_min_p2) and certified numerically on a time grid.

Second derivatives enter the certification through the majorant used by the
argument, |phi''| <= m phi' |L'|_sup / L, which is exact for phi' = c L^{-m}
with |L'| frozen at its supremum.  The exact phi'' can be used instead
(``phi2="exact"``); it decays faster and hides the m thresholds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1"
GRID_POINTS = 2000
GRID_T_MAX = 1e4
TREND_RTOL = 1e-9
# alpha = 2/3 is not a float, so thresholds can land an ulp above the integer
M_RTOL = 1e-12

P_GT2_CONDITIONS = ("c417", "c420", "c424", "c425", "c428")
P_EQ2_CONDITIONS = ("c430", "c431", "c432", "c433")

DESCRIPTIONS = {
    "c417": "phi' L^2",
    "c420": "phi'^2 L^(3-2/p)",
    "c424": "|phi''|^(alpha p) L^p / phi'",
    "c425": "[|phi''|^((1-alpha) q) L^(1+q/2)]^(1/(1-q/2)) / phi'",
    "c428": "phi'^(1/(1-q/2)) L / phi'",
    "c430": "phi' L^2",
    "c431": "phi'^2 L^2",
    "c432": "|phi''|^(2 alpha) L^2 / phi'",
    "c433": "|phi''|^(2(1-alpha)) L^2",
}


@dataclass(frozen=True)
class ParameterSet:
    p: float
    alpha: float
    m: float
    k: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        lo, hi = alpha_interval(self.p)
        if not lo < self.alpha < hi:
            raise ValueError(f"alpha={self.alpha} outside ({lo:.6g}, {hi:.6g}) for p={self.p}")

    @property
    def beta(self):
        return (self.p - 2) / self.p

    @property
    def q_conj(self):
        return self.p / (self.p - 1)


def alpha_interval(p):
    """Open interval of admissible Young-splitting exponents."""
    if p == 2:
        return 0.5, 1.0
    return 1.0 / p, 0.5 + 1.0 / p


def m_terms(p, alpha):
    """The three expressions whose max is the m threshold for p > 2."""
    if not p > 2:
        raise ValueError(f"m_min needs p > 2, got {p}")
    lo, hi = alpha_interval(p)
    if not lo < alpha < hi:
        raise ValueError(f"alpha={alpha} outside ({lo:.6g}, {hi:.6g})")
    return (2.0,
            (1 - alpha) * p / (alpha * p - 1),
            ((0.5 + alpha) * p - 1) / ((0.5 - alpha) * p + 1))


def m_min(p, alpha):
    return max(m_terms(p, alpha))


def m_terms_p2(alpha):
    if not 0.5 < alpha < 1:
        raise ValueError(f"alpha={alpha} outside (1/2, 1)")
    return (2.0, 2 * (1 - alpha) / (2 * alpha - 1), alpha / (1 - alpha))


def m_min_p2(alpha):
    return max(m_terms_p2(alpha))


def threshold(p, alpha):
    return m_min_p2(alpha) if p == 2 else m_min(p, alpha)


def beta_identity_check(p):
    """|beta/(1 - q/2) - (beta + 1)| with beta = (p-2)/p and q = p/(p-1)."""
    if not p > 2:
        raise ValueError(f"needs p > 2, got {p}")
    beta = (p - 2) / p
    q = p / (p - 1)
    return abs(beta / (1 - q / 2) - (beta + 1))


def default_grid(t_max=GRID_T_MAX, n=GRID_POINTS):
    return np.concatenate(([0.0], np.geomspace(1e-3, t_max, n - 1)))


@dataclass
class ConstraintReport:
    p: float
    alpha: float
    m: float
    m_min: float
    term_values: tuple
    condition_sups: dict
    satisfied: dict
    tail_growth: dict
    errors: dict = field(default_factory=dict)
    phi_prime_Lm_defect: float = float("nan")
    phi2_mode: str = "majorant"

    @property
    def m_ok(self):
        return self.m >= self.m_min * (1 - M_RTOL)

    @property
    def all_satisfied(self):
        return all(self.satisfied.values())

    @property
    def passed(self):
        return self.m_ok and self.all_satisfied

    @property
    def failing(self):
        return [c for c, ok in self.satisfied.items() if not ok]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "p": self.p, "alpha": self.alpha, "m": self.m, "m_min": self.m_min,
            "m_ok": self.m_ok,
            "term_values": list(self.term_values),
            "condition_sups": self.condition_sups,
            "satisfied": self.satisfied,
            "tail_growth": self.tail_growth,
            "errors": self.errors,
            "phi_prime_Lm_defect": self.phi_prime_Lm_defect,
            "phi2_mode": self.phi2_mode,
            "passed": self.passed,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True, default=_json_default)

    def table(self):
        lines = [f"p={self.p:g} alpha={self.alpha:.6g} m={self.m:g} m_min={self.m_min:.6g} "
                 f"({'ok' if self.m_ok else 'below threshold'})",
                 f"{'condition':<10}{'quantity':<52}{'sup':>14}{'tail x':>10}  status"]
        for c, s in self.condition_sups.items():
            status = "ok" if self.satisfied[c] else "FAIL"
            if c in self.errors:
                status += f" ({self.errors[c]})"
            lines.append(f"{c:<10}{DESCRIPTIONS[c]:<52}{s:>14.6g}{self.tail_growth[c]:>10.4g}  {status}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x))


def _condition_values(params, traj, phi, t, phi2):
    p, a, m = params.p, params.alpha, params.m
    L = np.asarray(traj.length(t), dtype=float)
    d1 = np.asarray(phi.dphi(t), dtype=float)
    if phi2 == "majorant":
        d2 = m * d1 * traj.rate_bound() / L
    elif phi2 == "exact":
        d2 = np.abs(np.asarray(phi.d2phi(t), dtype=float))
    else:
        raise ValueError(f"phi2 must be 'majorant' or 'exact', got {phi2!r}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if p == 2:
            return {
                "c430": d1 * L ** 2,
                "c431": d1 ** 2 * L ** 2,
                "c432": d2 ** (2 * a) * L ** 2 / d1,
                "c433": d2 ** (2 * (1 - a)) * L ** 2,
            }
        q = params.q_conj
        e = 1.0 / (1.0 - q / 2)
        return {
            "c417": d1 * L ** 2,
            "c420": d1 ** 2 * L ** (3 - 2 / p),
            "c424": d2 ** (a * p) * L ** p / d1,
            "c425": (d2 ** ((1 - a) * q) * L ** (1 + q / 2)) ** e / d1,
            "c428": d1 ** e * L / d1,
        }


_DIVIDES = {"c424", "c425", "c428", "c432"}


def phi_condition_sups(params, traj, phi, t_grid=None, phi2="majorant"):
    """Sup of each condition ratio over the grid plus a final-decade trend test.

    A condition counts as satisfied when its values are finite everywhere and
    non-increasing (to relative 1e-9) on the last decade [T/10, T] of the grid.
    """
    t = default_grid(min(GRID_T_MAX, traj.t_max)) if t_grid is None else np.asarray(t_grid, float)
    vals = _condition_values(params, traj, phi, t, phi2)
    d1 = np.asarray(phi.dphi(t), dtype=float)
    tail = t >= t[-1] / 10
    sups, sat, growth, errors = {}, {}, {}, {}
    for name, v in vals.items():
        if name in _DIVIDES and np.any(d1 == 0):
            errors[name] = f"phi' = 0 at t={t[np.argmax(d1 == 0)]:.6g}"
            sups[name], sat[name], growth[name] = math.inf, False, math.inf
            continue
        finite = bool(np.all(np.isfinite(v)))
        sups[name] = float(np.max(v)) if finite else math.inf
        vt = v[tail]
        if finite and vt.size >= 2:
            scale = max(float(np.max(np.abs(vt))), np.finfo(float).tiny)
            nonincreasing = bool(np.all(np.diff(vt) <= TREND_RTOL * scale))
            growth[name] = float(vt[-1] / vt[0]) if vt[0] != 0 else math.inf
        else:
            nonincreasing = False
            growth[name] = math.inf
        if not finite:
            errors[name] = "non-finite value on grid"
        sat[name] = finite and nonincreasing

    thr_terms = m_terms_p2(params.alpha) if params.p == 2 else m_terms(params.p, params.alpha)

    defect = float("nan")
    from .domain import PowerLaw
    from .weights import PowerShift
    if isinstance(traj, PowerLaw) and isinstance(phi, PowerShift):
        kg = phi.k * phi.gamma
        prod = d1 * np.asarray(traj.length(t)) ** traj.m
        defect = float(np.max(np.abs(prod - kg)) / kg)

    return ConstraintReport(p=params.p, alpha=params.alpha, m=params.m,
                            m_min=max(thr_terms), term_values=tuple(thr_terms),
                            condition_sups=sups, satisfied=sat, tail_growth=growth,
                            errors=errors, phi_prime_Lm_defect=defect, phi2_mode=phi2)


def check_parameters(p, alpha, m, k=1.0, gamma=0.5, t_max=GRID_T_MAX, phi2="majorant"):
    """Certify the matched pair L = (1+kt)^{(1-gamma)/m}, phi = (1+kt)^gamma - 1."""
    from .domain import PowerLaw
    from .weights import PowerShift
    params = ParameterSet(p=p, alpha=alpha, m=m, k=k, gamma=gamma)
    traj = PowerLaw(t_max=t_max, k=k, gamma=gamma, m=m)
    return phi_condition_sups(params, traj, PowerShift(k, gamma),
                              default_grid(t_max), phi2=phi2)
