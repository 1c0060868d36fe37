"""Shared simulation runs and independent oracles.

The expensive runs are session-scoped so that the unit tests and the
acceptance suite reuse the same traces; each records its wall-clock time.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
import pytest
from scipy.integrate import simpson

from pwave import Constant, PowerLaw, SolverConfig, simulate
from pwave.solver import SineMode


def modal_roots():
    """Roots of lam^2 + pi^2 lam + pi^2 = 0 by the quadratic formula (slow root first)."""
    b, c = math.pi ** 2, math.pi ** 2
    disc = math.sqrt(b * b - 4 * c)
    return (-b + disc) / 2, (-b - disc) / 2


def modal_amplitude(t):
    """a(t) with a'' + pi^2 a' + pi^2 a = 0, a(0) = 1, a'(0) = 0."""
    r1, r2 = modal_roots()
    t = np.asarray(t, dtype=float)
    return (r2 * np.exp(r1 * t) - r1 * np.exp(r2 * t)) / (r2 - r1)


def modal_velocity(t):
    r1, r2 = modal_roots()
    t = np.asarray(t, dtype=float)
    return r1 * r2 * (np.exp(r1 * t) - np.exp(r2 * t)) / (r2 - r1)


SIMPSON_POINTS = 100_001


def simpson_norms(u, du, L, p, n=SIMPSON_POINTS):
    """(||u_x||_2^2, ||u_x||_p^2, ||u||_2^2) on (0, L) by composite Simpson on n points."""
    x = np.linspace(0.0, L, n)
    g = du(x)
    return (simpson(g * g, x=x),
            simpson(np.abs(g) ** p, x=x) ** (2.0 / p),
            simpson(u(x) ** 2, x=x))


# analytic profiles on (0, L) vanishing at both ends: (u, u_x, L, p)
HANDPICKED = {
    "sine p=4 L=2": (lambda x: np.sin(np.pi * x / 2), lambda x: np.pi / 2 * np.cos(np.pi * x / 2), 2.0, 4.0),
    "sine2 p=3 L=1.5": (lambda x: np.sin(2 * np.pi * x / 1.5),
                        lambda x: 2 * np.pi / 1.5 * np.cos(2 * np.pi * x / 1.5), 1.5, 3.0),
    "parabola p=2 L=1": (lambda x: 4 * x * (1 - x), lambda x: 4 - 8 * x, 1.0, 2.0),
    "cubic p=5 L=3": (lambda x: x * (3 - x) ** 2, lambda x: (3 - x) ** 2 - 2 * x * (3 - x), 3.0, 5.0),
    "two modes p=4 L=1": (lambda x: np.sin(np.pi * x) + 0.3 * np.sin(3 * np.pi * x),
                          lambda x: np.pi * np.cos(np.pi * x) + 0.9 * np.pi * np.cos(3 * np.pi * x),
                          1.0, 4.0),
}


def state_from_physical(u, L, p, N=4000):
    from pwave import ReferenceState
    return ReferenceState.from_functions(N, lambda y: u(L * y), lambda y: 0 * y, L=L, p=p)


@dataclass
class Run:
    cfg: SolverConfig
    trace: object
    states: list
    seconds: float
    label: str


def _run(label, cfg):
    start = time.perf_counter()
    trace, states = simulate(cfg)
    return Run(cfg, trace, states, time.perf_counter() - start, label)


def sine_fixed_cfg(N=200, dt=1e-3, t_end=2.0):
    return SolverConfig(p=2.0, traj=Constant(t_max=t_end, L0=1.0), N=N, dt=dt, t_end=t_end,
                        initial_profile=SineMode(1))


def expanding_p2_cfg(t_end=50.0, dt=0.01, m=2.0, gamma=0.5):
    return SolverConfig(p=2.0, traj=PowerLaw(t_max=t_end, k=1.0, gamma=gamma, m=m), N=200,
                        dt=dt, t_end=t_end, initial_profile=SineMode(1), sample_every=500)


def expanding_p4_cfg(t_end=50.0, dt=0.01):
    return SolverConfig(p=4.0, traj=PowerLaw(t_max=t_end, k=1.0, gamma=0.5, m=3.0), N=200,
                        dt=dt, t_end=t_end, initial_profile=SineMode(1), sample_every=500)


def fixed_p4_cfg(t_end=50.0, dt=0.02):
    return SolverConfig(p=4.0, traj=Constant(t_max=t_end, L0=1.0), N=200, dt=dt, t_end=t_end,
                        initial_profile=SineMode(1), sample_every=250)


@pytest.fixture(scope="session")
def run_sine():
    return _run("p2 fixed sine N=200", sine_fixed_cfg())


@pytest.fixture(scope="session")
def run_sine_refined():
    return _run("p2 fixed sine N=400", sine_fixed_cfg(N=400, dt=5e-4))


@pytest.fixture(scope="session")
def run_expanding_p2():
    return _run("p2 powerlaw m=2", expanding_p2_cfg())


@pytest.fixture(scope="session")
def run_expanding_p4():
    return _run("p4 powerlaw m=3", expanding_p4_cfg())


@pytest.fixture(scope="session")
def run_fixed_p4():
    return _run("p4 fixed", fixed_p4_cfg())


@pytest.fixture(scope="session")
def suite_runs(run_sine, run_sine_refined, run_expanding_p2, run_expanding_p4, run_fixed_p4):
    return [run_sine, run_sine_refined, run_expanding_p2, run_expanding_p4, run_fixed_p4]


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def _report(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
