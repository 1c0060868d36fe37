"""Moving spatial domains Omega_t = (0, L(t)) with nondecreasing length.

Only the length matters to the theory; the left endpoint is pinned at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SUP_GRID_POINTS = 10_001


@dataclass(frozen=True)
class DomainTrajectory:
    t_max: float

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise DomainError(f"t_max must be positive and finite, got {self.t_max}")

    def _check_time(self, t):
        # small slack so that accumulated n*dt does not trip the horizon check
        slack = 1e-12 * max(1.0, self.t_max)
        if isinstance(t, float):
            if not -slack <= t <= self.t_max + slack:
                raise DomainError(f"time {t} outside [0, {self.t_max}]")
            return np.float64(min(max(t, 0.0), self.t_max))
        t = np.asarray(t, dtype=float)
        if np.any(t < -slack) or np.any(t > self.t_max + slack):
            raise DomainError(f"time {t} outside [0, {self.t_max}]")
        return np.clip(t, 0.0, self.t_max)

    def length(self, t):
        raise NotImplementedError

    def length_rate(self, t):
        raise NotImplementedError

    def growth_exponent(self):
        """Asymptotic exponent a in L(t) ~ (1+t)^a."""
        raise NotImplementedError

    def rate_bound(self, n_points=SUP_GRID_POINTS):
        grid = np.linspace(0.0, self.t_max, n_points)
        return float(np.max(np.abs(self.length_rate(grid))))

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(DomainTrajectory):
    """L(t) = (1 + k t)^((1 - gamma)/m), so that L(0) = 1."""

    k: float = 1.0
    gamma: float = 0.5
    m: float = 2.0

    def __post_init__(self):
        super().__post_init__()
        if not self.k > 0:
            raise DomainError(f"k must be > 0, got {self.k}")
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.m > 0:
            raise DomainError(f"m must be > 0, got {self.m}")

    @property
    def exponent(self):
        return (1.0 - self.gamma) / self.m

    def length(self, t):
        t = self._check_time(t)
        out = (1.0 + self.k * t) ** self.exponent
        return float(out) if out.ndim == 0 else out

    def length_rate(self, t):
        t = self._check_time(t)
        a = self.exponent
        out = self.k * a * (1.0 + self.k * t) ** (a - 1.0)
        return float(out) if out.ndim == 0 else out

    def rate_bound(self, n_points=SUP_GRID_POINTS):
        if self.exponent <= 1.0:
            # rate is nonincreasing, sup sits at t = 0
            return self.k * self.exponent
        return super().rate_bound(n_points)

    def growth_exponent(self):
        return self.exponent

    def to_dict(self):
        return {"family": "powerlaw", "k": self.k, "gamma": self.gamma,
                "m": self.m, "t_max": self.t_max}


@dataclass(frozen=True)
class Constant(DomainTrajectory):
    L0: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not (self.L0 > 0 and math.isfinite(self.L0)):
            raise DomainError(f"L0 must be positive, got {self.L0}")

    def length(self, t):
        t = self._check_time(t)
        out = np.full_like(t, self.L0)
        return float(out) if out.ndim == 0 else out

    def length_rate(self, t):
        t = self._check_time(t)
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out

    def rate_bound(self, n_points=SUP_GRID_POINTS):
        return 0.0

    def growth_exponent(self):
        return 0.0

    def to_dict(self):
        return {"family": "constant", "L0": self.L0, "t_max": self.t_max}


@dataclass(frozen=True)
class Tabulated(DomainTrajectory):
    """Piecewise-linear L through sorted (t, L) samples spanning [0, t_max]."""

    samples: tuple = field(default=())

    def __post_init__(self):
        pts = tuple((float(t), float(L)) for t, L in self.samples)
        object.__setattr__(self, "samples", pts)
        if len(pts) < 2:
            raise DomainError("tabulated trajectory needs at least two samples")
        ts = np.array([p[0] for p in pts])
        Ls = np.array([p[1] for p in pts])
        if np.any(np.diff(ts) <= 0):
            raise DomainError("sample times must be strictly increasing")
        if np.any(np.diff(Ls) < 0):
            raise DomainError("tabulated length must be nondecreasing (expanding domain)")
        if np.any(Ls <= 0) or not np.all(np.isfinite(Ls)):
            raise DomainError("tabulated lengths must be positive and finite")
        if ts[0] != 0.0:
            raise DomainError("first sample must be at t = 0")
        if self.t_max is None or self.t_max != ts[-1]:
            object.__setattr__(self, "t_max", float(ts[-1]))
        super().__post_init__()
        object.__setattr__(self, "_ts", ts)
        object.__setattr__(self, "_Ls", Ls)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        return cls(t_max=float(pairs[-1][0]), samples=tuple(pairs))

    def length(self, t):
        t = self._check_time(t)
        out = np.interp(t, self._ts, self._Ls)
        return float(out) if np.ndim(out) == 0 else out

    def length_rate(self, t):
        t = self._check_time(t)
        slopes = np.diff(self._Ls) / np.diff(self._ts)
        # right-continuous segment slope; the last knot takes the final segment
        idx = np.clip(np.searchsorted(self._ts, t, side="right") - 1, 0, len(slopes) - 1)
        out = slopes[idx]
        return float(out) if np.ndim(out) == 0 else out

    def rate_bound(self, n_points=SUP_GRID_POINTS):
        return float(np.max(np.abs(np.diff(self._Ls) / np.diff(self._ts))))

    def growth_exponent(self):
        # log-log slope of L against 1+t over the second half of the horizon
        t0 = 0.5 * self.t_max
        if t0 <= 0:
            return 0.0
        L0, L1 = self.length(t0), self.length(self.t_max)
        return math.log(L1 / L0) / math.log((1.0 + self.t_max) / (1.0 + t0))

    def to_dict(self):
        return {"family": "tabulated", "samples": [list(p) for p in self.samples],
                "t_max": self.t_max}


def length(traj, t):
    return traj.length(t)


def length_rate(traj, t):
    return traj.length_rate(t)


def rate_bound(traj, n_points=SUP_GRID_POINTS):
    return traj.rate_bound(n_points)


def is_nested(traj, n_points=SUP_GRID_POINTS):
    """True when L is nondecreasing on a uniform grid (Omega_t inside Omega_s for t < s)."""
    L = traj.length(np.linspace(0.0, traj.t_max, n_points))
    return bool(np.all(np.diff(L) >= 0))
