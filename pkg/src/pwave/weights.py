"""Weight functions phi with phi(0) = 0, phi' > 0 and phi -> infinity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


class WeightFunction:
    name = "weight"

    def phi(self, t):
        raise NotImplementedError

    def dphi(self, t):
        raise NotImplementedError

    def d2phi(self, t):
        raise NotImplementedError

    def check_monotone(self, t_grid):
        """Raise ValueError unless phi' > 0 on every grid point."""
        d = np.asarray(self.dphi(np.asarray(t_grid, dtype=float)))
        if np.any(~(d > 0)):
            bad = np.asarray(t_grid)[~(d > 0)][0]
            raise ValueError(f"weight {self.name} is not strictly increasing near t={bad}")

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerShift(WeightFunction):
    """phi(t) = (1 + k t)^gamma - 1."""

    k: float = 1.0
    gamma: float = 0.5
    name = "powershift"

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        # expm1/log1p keep phi accurate for small k t
        return _out(np.expm1(self.gamma * np.log1p(self.k * t)))

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        return _out(self.k * self.gamma * (1.0 + self.k * t) ** (self.gamma - 1.0))

    def d2phi(self, t):
        t = np.asarray(t, dtype=float)
        g = self.gamma
        return _out(self.k ** 2 * g * (g - 1.0) * (1.0 + self.k * t) ** (g - 2.0))

    def to_dict(self):
        return {"family": "powershift", "k": self.k, "gamma": self.gamma}


@dataclass(frozen=True)
class Identity(WeightFunction):
    """phi(t) = t, the bounded-domain choice."""

    name = "identity"

    def phi(self, t):
        return _out(np.asarray(t, dtype=float) * 1.0)

    def dphi(self, t):
        return _out(np.ones_like(np.asarray(t, dtype=float)))

    def d2phi(self, t):
        return _out(np.zeros_like(np.asarray(t, dtype=float)))

    def to_dict(self):
        return {"family": "identity"}


@dataclass(frozen=True)
class TabulatedWeight(WeightFunction):
    """Piecewise-linear phi through (t, phi) samples; derivatives by finite differences."""

    samples: tuple = field(default=())
    name = "tabulated"

    def __post_init__(self):
        pts = tuple((float(a), float(b)) for a, b in self.samples)
        object.__setattr__(self, "samples", pts)
        ts = np.array([p[0] for p in pts])
        ps = np.array([p[1] for p in pts])
        if len(pts) < 3:
            raise ValueError("tabulated weight needs at least three samples")
        if ts[0] != 0.0 or ps[0] != 0.0:
            raise ValueError("tabulated weight must start at (0, 0)")
        if np.any(np.diff(ts) <= 0) or np.any(np.diff(ps) <= 0):
            raise ValueError("tabulated weight must be strictly increasing")
        object.__setattr__(self, "_ts", ts)
        object.__setattr__(self, "_ps", ps)
        object.__setattr__(self, "_d1", np.gradient(ps, ts))
        object.__setattr__(self, "_d2", np.gradient(np.gradient(ps, ts), ts))

    def phi(self, t):
        return _out(np.interp(t, self._ts, self._ps))

    def dphi(self, t):
        return _out(np.interp(t, self._ts, self._d1))

    def d2phi(self, t):
        return _out(np.interp(t, self._ts, self._d2))

    def to_dict(self):
        return {"family": "tabulated", "samples": [list(p) for p in self.samples]}


def weight_from_spec(text):
    """Parse "identity", "powershift:k,gamma" or "tabulated:t0:p0;t1:p1;..."."""
    text = text.strip().lower()
    if text in ("identity", "t"):
        return Identity()
    name, _, args = text.partition(":")
    if name == "powershift":
        k, gamma = (float(a) for a in args.split(","))
        return PowerShift(k, gamma)
    if name == "tabulated":
        pairs = [tuple(float(x) for x in item.split(":")) for item in args.split(";") if item]
        return TabulatedWeight(tuple(pairs))
    raise ValueError(f"unknown weight spec {text!r}")
