"""Implicit solver for u_tt - (|u_x|^{p-2} u_x)_x - u_txx = 0 on (0, L(t)).

The moving interval is mapped onto y = x / L(t) in [0, 1].  With v = u and
w = u_t expressed in y, and mu = L'/L, the first-order system is

    v_t = w + mu y v_y
    w_t = mu y w_y + L^{-p} (Phi(v_y))_y + L^{-2} w_yy

with Phi(s) = (s^2 + eps^2)^{(p-2)/2} s and v = w = 0 at y = 0 and y = 1.
Space: conservative differences with fluxes at half nodes; time: the
trapezoidal rule, solved by Newton on the interleaved unknowns
(v_1, w_1, v_2, w_2, ...), whose Jacobian is banded with 3 sub- and 2
super-diagonals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .domain import DomainTrajectory
from .errors import NumericalBlowup, StepFailure

log = logging.getLogger(__name__)

MAX_HALVINGS = 10


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True)
class SineMode:
    n: int = 1
    amplitude: float = 1.0

    def sample(self, y):
        return self.amplitude * np.sin(self.n * np.pi * y)


@dataclass(frozen=True)
class Bump:
    """x (L0 - x), scaled to unit maximum; in reference coordinates 4 y (1 - y)."""

    amplitude: float = 1.0

    def sample(self, y):
        return self.amplitude * 4.0 * y * (1.0 - y)


@dataclass(frozen=True)
class Table:
    """Values on a uniform grid over [0, 1], linearly interpolated."""

    values: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise ValueError("table profile needs at least two values")

    def sample(self, y):
        knots = np.linspace(0.0, 1.0, len(self.values))
        return np.interp(y, knots, self.values)


@dataclass(frozen=True)
class Zero:
    def sample(self, y):
        return np.zeros_like(y)


def profile_from_spec(text):
    """Parse "sine:n[:amp]", "bump[:amp]", "table:v0,v1,..." or "zero"."""
    name, _, args = text.strip().lower().partition(":")
    if name == "zero":
        return Zero()
    if name == "sine":
        parts = args.split(":") if args else []
        n = int(parts[0]) if parts else 1
        amp = float(parts[1]) if len(parts) > 1 else 1.0
        return SineMode(n, amp)
    if name == "bump":
        return Bump(float(args) if args else 1.0)
    if name == "table":
        return Table(tuple(float(v) for v in args.split(",")))
    raise ValueError(f"unknown profile {text!r}")


def profile_to_spec(prof):
    if isinstance(prof, Zero):
        return "zero"
    if isinstance(prof, SineMode):
        return f"sine:{prof.n}:{prof.amplitude!r}"
    if isinstance(prof, Bump):
        return f"bump:{prof.amplitude!r}"
    if isinstance(prof, Table):
        return "table:" + ",".join(repr(v) for v in prof.values)
    raise TypeError(prof)


# ---------------------------------------------------------------- state / config

@dataclass(frozen=True)
class ReferenceState:
    """(u, u_t) at time t on the nodes y_i = i/(N+1), boundary nodes included."""

    t: float
    v: np.ndarray
    w: np.ndarray
    L: float
    p: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if v.shape != w.shape or v.ndim != 1 or v.size < 3:
            raise ValueError("v and w must be 1-D arrays of equal length >= 3")
        if v[0] != 0 or v[-1] != 0 or w[0] != 0 or w[-1] != 0:
            raise ValueError("boundary values of v and w must be zero")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        v.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @property
    def N(self):
        return self.v.size - 2

    @property
    def h(self):
        return 1.0 / (self.v.size - 1)

    @property
    def y(self):
        return np.linspace(0.0, 1.0, self.v.size)

    @classmethod
    def zeros(cls, N, L=1.0, p=2.0, t=0.0):
        return cls(t, np.zeros(N + 2), np.zeros(N + 2), L, p)

    @classmethod
    def from_functions(cls, N, f_v, f_w, L=1.0, p=2.0, t=0.0):
        """Sample callables of y in [0, 1]; endpoints are forced to zero."""
        y = np.linspace(0.0, 1.0, N + 2)
        v = np.asarray(f_v(y), dtype=float).copy()
        w = np.asarray(f_w(y), dtype=float).copy()
        v[[0, -1]] = 0.0
        w[[0, -1]] = 0.0
        return cls(t, v, w, L, p)


@dataclass(frozen=True)
class SolverConfig:
    p: float
    traj: DomainTrajectory
    N: int = 200
    dt: float = 1e-3
    t_end: float = 1.0
    eps_reg: float = 1e-8
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    initial_profile: object = field(default_factory=SineMode)
    initial_velocity: object = field(default_factory=Zero)
    sample_every: int = 100
    # verification-only forcing f(y, t) added to dw/dt
    source: Optional[Callable] = None

    def __post_init__(self):
        if self.N < 3:
            raise ValueError(f"N must be >= 3, got {self.N}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if not self.eps_reg >= 0:
            raise ValueError(f"eps_reg must be >= 0, got {self.eps_reg}")
        if not self.p >= 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if self.traj.t_max < self.t_end * (1 - 1e-12):
            raise ValueError(f"trajectory horizon {self.traj.t_max} shorter than t_end {self.t_end}")


# ---------------------------------------------------------------- discretization

def flux(s, p, eps):
    if p == 2:
        return s
    return (s * s + eps * eps) ** ((p - 2) / 2) * s


def flux_derivative(s, p, eps):
    if p == 2:
        return np.ones_like(s)
    r = s * s + eps * eps
    return r ** ((p - 2) / 2) + (p - 2) * s * s * r ** ((p - 4) / 2)


class _Operator:
    """Semi-discrete right-hand side on the interior nodes, plus its Jacobian."""

    def __init__(self, N, p, traj, eps, source=None):
        self.N = N
        self.p = p
        self.traj = traj
        self.eps = eps
        self.source = source
        self.h = 1.0 / (N + 1)
        self.y_full = np.linspace(0.0, 1.0, N + 2)
        self.y = self.y_full[1:-1]
        self._coef_t = None
        self._coef = None

    def coefficients(self, t):
        if t != self._coef_t:
            L = self.traj.length(t)
            self._coef = (L, self.traj.length_rate(t) / L)
            self._coef_t = t
        return self._coef

    def rhs(self, t, v, w):
        """v, w interior arrays -> (dv/dt, dw/dt) interior arrays."""
        L, mu = self.coefficients(t)
        h, p = self.h, self.p
        vf = np.concatenate(([0.0], v, [0.0]))
        wf = np.concatenate(([0.0], w, [0.0]))
        g = np.diff(vf) / h
        F = flux(g, p, self.eps)
        adv = mu * self.y / (2 * h)
        dv = w + adv * (vf[2:] - vf[:-2])
        dw = (adv * (wf[2:] - wf[:-2])
              + L ** (-p) * np.diff(F) / h
              + L ** (-2) * (wf[2:] - 2 * w + wf[:-2]) / h ** 2)
        if self.source is not None:
            dw = dw + self.source(self.y, t)
        if not (np.all(np.isfinite(dv)) and np.all(np.isfinite(dw))):
            raise NumericalBlowup(t)
        return dv, dw

    def jacobian_banded(self, t, v, scale):
        """Banded form (3 sub, 2 super) of I - scale * dF/dU in interleaved order."""
        L, mu = self.coefficients(t)
        h, p, N = self.h, self.p, self.N
        vf = np.concatenate(([0.0], v, [0.0]))
        dF = flux_derivative(np.diff(vf) / h, p, self.eps)
        dl, dr = dF[:-1], dF[1:]  # Phi' at i-1/2 and i+1/2
        adv = mu * self.y / (2 * h)
        cp = L ** (-p) / h ** 2
        cd = L ** (-2) / h ** 2

        # ab[2 + i - j, j] = A[i, j]; v_i sits at column 2(i-1), w_i at 2(i-1)+1
        ab = np.zeros((6, 2 * N))
        ab[2, 0::2] = 1.0
        ab[1, 1::2] = -scale                      # v_i row, w_i
        ab[0, 2::2] = -scale * adv[:-1]           # v_i row, v_{i+1}
        ab[4, 0:-2:2] = scale * adv[1:]           # v_i row, v_{i-1}
        ab[2, 1::2] = 1.0 + scale * 2 * cd        # w_i row, w_i
        ab[3, 0::2] = scale * cp * (dl + dr)      # w_i row, v_i
        ab[1, 2::2] = -scale * cp * dr[:-1]       # w_i row, v_{i+1}
        ab[0, 3::2] = -scale * (adv + cd)[:-1]    # w_i row, w_{i+1}
        ab[4, 1:-2:2] = -scale * (cd - adv)[1:]   # w_i row, w_{i-1}
        ab[5, 0:-2:2] = -scale * cp * dl[1:]      # w_i row, v_{i-1}
        return ab


def transform_system_rhs(state, traj, eps_reg=1e-8, source=None):
    """Semi-discrete right-hand side (dv/dt, dw/dt) on all nodes (boundary rows zero)."""
    op = _Operator(state.N, state.p, traj, eps_reg, source)
    dv, dw = op.rhs(state.t, state.v[1:-1], state.w[1:-1])
    z = np.zeros(1)
    return np.concatenate((z, dv, z)), np.concatenate((z, dw, z))


def _trapezoid_step(op, t0, v0, w0, dt, tol, max_iter):
    """One trapezoidal step; returns interior (v, w) at t0 + dt."""
    t1 = t0 + dt
    N = op.N
    dv0, dw0 = op.rhs(t0, v0, w0)
    U0 = np.empty(2 * N)
    U0[0::2], U0[1::2] = v0, w0
    F0 = np.empty(2 * N)
    F0[0::2], F0[1::2] = dv0, dw0
    U = U0.copy()
    half = 0.5 * dt
    for it in range(max_iter + 1):
        dv, dw = op.rhs(t1, U[0::2], U[1::2])
        F = np.empty(2 * N)
        F[0::2], F[1::2] = dv, dw
        G = U - U0 - half * (F0 + F)
        gnorm = np.max(np.abs(G))
        scale = max(np.max(np.abs(U0)), np.max(np.abs(U)))
        if not math.isfinite(gnorm):
            raise StepFailure(t0, "Newton residual became non-finite")
        if gnorm == 0.0 or (it > 0 and gnorm <= tol * scale):
            return U[0::2].copy(), U[1::2].copy()
        if it == max_iter:
            break
        ab = op.jacobian_banded(t1, U[0::2], half)
        try:
            delta = solve_banded((3, 2), ab, G, overwrite_ab=True, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise StepFailure(t0, f"singular Newton system ({exc})") from exc
        U = U - delta
    raise StepFailure(t0, f"Newton did not converge in {max_iter} iterations "
                          f"(residual {gnorm:.3e})")


def _make_state(t, v, w, traj, p):
    z = np.zeros(1)
    return ReferenceState(t, np.concatenate((z, v, z)), np.concatenate((z, w, z)),
                          traj.length(t), p)


def step(state, cfg, dt=None):
    """Advance one trapezoidal step of size dt (default cfg.dt)."""
    dt = cfg.dt if dt is None else dt
    if state.t + dt > cfg.t_end * (1 + 1e-12) + 1e-12:
        raise ValueError(f"step would pass t_end: t={state.t}, dt={dt}")
    op = _Operator(state.N, cfg.p, cfg.traj, cfg.eps_reg, cfg.source)
    v, w = _trapezoid_step(op, state.t, state.v[1:-1], state.w[1:-1], dt,
                           cfg.newton_tol, cfg.newton_max_iter)
    return _make_state(state.t + dt, v, w, cfg.traj, cfg.p)


def _robust_step(op, t0, v, w, dt, cfg):
    """Trapezoidal step that retries with 2, 4, ... substeps on Newton failure."""
    last = None
    for halvings in range(MAX_HALVINGS + 1):
        n_sub = 2 ** halvings
        h = dt / n_sub
        try:
            vv, ww, tt = v, w, t0
            for j in range(n_sub):
                vv, ww = _trapezoid_step(op, tt, vv, ww, h, cfg.newton_tol, cfg.newton_max_iter)
                tt = t0 + (j + 1) * h
            if halvings:
                log.info("step at t=%.6g needed %d substeps", t0, n_sub)
            return vv, ww
        except StepFailure as exc:
            last = exc
    raise StepFailure(t0, f"step failed after {MAX_HALVINGS} halvings of dt ({last.reason})")


def initial_state(cfg):
    L0 = cfg.traj.length(0.0)
    return ReferenceState.from_functions(cfg.N, cfg.initial_profile.sample,
                                         cfg.initial_velocity.sample, L=L0, p=cfg.p)


def time_grid(cfg):
    n = max(1, int(math.ceil(cfg.t_end / cfg.dt - 1e-9)))
    t = np.arange(n + 1) * cfg.dt
    t[-1] = cfg.t_end
    return t


def simulate(cfg, keep_states=True):
    """March from t = 0 to t_end.

    Returns ``(trace, states)``: the energy trace at every step and the states
    stored every ``sample_every`` steps (first and last always kept).
    """
    from .energy import EnergyTrace, dissipation, energy

    op = _Operator(cfg.N, cfg.p, cfg.traj, cfg.eps_reg, cfg.source)
    times = time_grid(cfg)
    state = initial_state(cfg)
    n = len(times)
    E = np.empty(n)
    D = np.empty(n)
    Ls = np.empty(n)
    E[0], D[0], Ls[0] = energy(state), dissipation(state), state.L
    states = [state] if keep_states else []
    v, w = state.v[1:-1], state.w[1:-1]
    for k in range(1, n):
        v, w = _robust_step(op, times[k - 1], v, w, times[k] - times[k - 1], cfg)
        state = _make_state(times[k], v, w, cfg.traj, cfg.p)
        E[k], D[k], Ls[k] = energy(state), dissipation(state), state.L
        if keep_states and (k % cfg.sample_every == 0 or k == n - 1):
            states.append(state)
    return EnergyTrace.from_arrays(times, E, D, Ls), states
