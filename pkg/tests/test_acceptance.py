"""Acceptance criteria 1-10, one PASS/FAIL line each.

Expected values marked as oracles are computed independently of the package:
the modal rate from the quadratic formula, norms by composite Simpson on
10^5 points, Komornik constants from closed-form tail integrals.
"""

import math

import numpy as np
import pytest

from conftest import (HANDPICKED, expanding_p2_cfg, modal_roots, simpson_norms,
                      state_from_physical)
from pwave import EnergyTrace, Identity, PowerShift, simulate
from pwave.constraints import beta_identity_check, check_parameters, m_min, m_min_p2
from pwave.envelope import compensated_energy, fit, tail_nonincreasing, verify_envelope
from pwave.inequalities import check_embeddings, norms
from pwave.komornik import estimate_A

ENVELOPE_TOL = 1e-6


def weight_for(run):
    traj = run.cfg.traj
    return PowerShift(traj.k, traj.gamma) if hasattr(traj, "gamma") else Identity()


# ---------------------------------------------------------------- 1

def test_criterion_01_residual_bound(run_sine, report):
    tr = run_sine.trace
    rel = tr.max_abs_residual() / tr.E0
    ok = rel <= 1e-4 and run_sine.seconds < 10
    report("criterion 1a residual", ok,
           f"max|R_n|/E0={rel:.3e} (<=1e-4), runtime {run_sine.seconds:.2f}s (<10s)")
    assert ok


@pytest.mark.xfail(strict=True, reason=(
    "per-step residual of the trapezoidal scheme is O(dt^3), so halving dt divides its "
    "maximum by about 8; the summed residual shrinks 4x (see decisions ledger)"))
def test_criterion_01_refinement_factor(run_sine, run_sine_refined, report):
    coarse, fine = run_sine.trace, run_sine_refined.trace
    ratio_max = coarse.max_abs_residual() / fine.max_abs_residual()
    ratio_sum = coarse.sum_abs_residual() / fine.sum_abs_residual()
    ok = 3.2 <= ratio_max <= 4.8
    report("criterion 1b refinement", ok,
           f"max per-interval |R| ratio={ratio_max:.3f} (want [3.2, 4.8]); "
           f"sum |R| ratio={ratio_sum:.3f}; refined runtime {run_sine_refined.seconds:.2f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_02_modal_rate(run_sine, report):
    oracle = -2 * modal_roots()[0]
    env = fit(run_sine.trace, "ExpInT")
    rate = -env.slope
    err = abs(rate - oracle) / oracle
    ok = err <= 0.05 and run_sine.seconds < 10
    report("criterion 2 modal rate", ok,
           f"fitted {rate:.4f} vs oracle {oracle:.4f} (rel err {err:.2%} <= 5%), "
           f"runtime {run_sine.seconds:.2f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_03_monotone(suite_runs, report):
    bad = {r.label: r.trace.monotone_violations().size for r in suite_runs}
    ok = not any(bad.values())
    steps = sum(len(r.trace) - 1 for r in suite_runs)
    report("criterion 3 monotone", ok,
           f"{steps} steps over {len(suite_runs)} runs, violations {sum(bad.values())}")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_04_embeddings(suite_runs, report):
    reports = [check_embeddings(s, tol=1e-8) for r in suite_runs for s in r.states]
    worst = min(min(m / max(r, 1.0) for m, r in zip(rep.margins, (rep.rhs1, rep.rhs2, rep.rhs3)))
                for rep in reports)
    margins_ok = all(rep.ok for rep in reports)
    errs = []
    for u, du, L, p in HANDPICKED.values():
        got = np.array(norms(state_from_physical(u, L, p)))
        want = np.array(simpson_norms(u, du, L, p))
        errs.append(float(np.max(np.abs(got - want) / np.abs(want))))
    oracle_ok = max(errs) <= 1e-6
    ok = margins_ok and oracle_ok
    report("criterion 4 embeddings", ok,
           f"{len(reports)} states, worst scaled margin {worst:.3e} (>= -1e-8); "
           f"Simpson oracle max rel err {max(errs):.2e} on {len(errs)} states (<= 1e-6)")
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_05_exp_in_phi(run_expanding_p2, report):
    run = run_expanding_p2
    env = fit(run.trace, "ExpInPhi", k=1.0, gamma=0.5)
    ratio = verify_envelope(run.trace, env)
    ok = (run.cfg.t_end >= 50 and run.cfg.N == 200 and env.r2 >= 0.95 and env.slope < 0
          and ratio <= 1 + ENVELOPE_TOL and run.seconds < 60)
    report("criterion 5 ExpInPhi", ok,
           f"R2={env.r2:.4f} (>=0.95), slope={env.slope:.3f} (<0), envelope ratio={ratio:.9f}, "
           f"runtime {run.seconds:.2f}s (<60s)")
    assert ok


# ---------------------------------------------------------------- 6

def test_criterion_06_poly_in_phi(run_expanding_p4, report):
    run = run_expanding_p4
    tr = run.trace
    lo, hi = tr.t[-1] / 4, tr.t[-1]
    mask = (tr.t >= lo) & (tr.t <= hi)
    comp = compensated_energy(tr, 0.5, k=1.0, gamma=0.5)[mask]
    bounded = bool(np.all(np.isfinite(comp)))
    tail_ok = tail_nonincreasing(tr.t[mask], comp, start_fraction=0.5)
    admissible = check_parameters(4, 0.5, 3).passed
    ok = bounded and tail_ok and admissible and run.cfg.t_end >= 50 and run.seconds < 120
    report("criterion 6 compensated energy", ok,
           f"max E*phi^2 on window {np.max(comp):.4e}, tail non-increasing {tail_ok}, "
           f"(p,alpha,m)=(4,0.5,3) admissible {admissible}, runtime {run.seconds:.2f}s (<120s)")
    assert ok


# ---------------------------------------------------------------- 7

def test_criterion_07_bounded_domain(run_sine, run_fixed_p4, report):
    e2 = fit(run_sine.trace, "ExpInT")
    e4 = fit(run_fixed_p4.trace, "PolyInT", p=4.0)
    ok = e2.r2 >= 0.99 and e4.slope <= -1.8
    report("criterion 7 bounded domain", ok,
           f"p=2 ExpInT R2={e2.r2:.6f} (>=0.99); p=4 PolyInT slope={e4.slope:.3f} (<=-1.8)")
    assert ok


# ---------------------------------------------------------------- 8

def _synth(t, E):
    z = np.zeros_like(t)
    return EnergyTrace(t, E, z, np.ones_like(t), z)


def test_criterion_08_komornik(suite_runs, report):
    t = np.linspace(0, 20, 2001)
    cases = [("exp q=0", estimate_A(_synth(t, np.exp(-t)), Identity(), 0.0).A_hat, 1.0)]
    for q, T in ((0.5, 200.0), (1.0, 2000.0)):
        tq = np.linspace(0, T, 20001)
        # int_S^inf (1+t)^{-(q+1)/q} dt = q (1+S)^{-1/q}, so A = 1/q
        A = estimate_A(_synth(tq, (1 + tq) ** (-1 / q)), Identity(), q).A_hat
        cases.append((f"power q={q}", A, 1 / q))
    errs = [abs(a - want) / want for _, a, want in cases]
    ratios = []
    for run in suite_runs:
        p = run.cfg.p
        ratios.append(estimate_A(run.trace, weight_for(run), (p - 2) / p).bound_violation)
    ok = max(errs) <= 0.01 and max(ratios) <= 1 + 1e-6
    report("criterion 8 Komornik", ok,
           ", ".join(f"{n}: A_hat={a:.5f}" for n, a, _ in cases)
           + f" (max rel err {max(errs):.2e} <= 1%); max bound ratio on suite {max(ratios):.4f}")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_09_constraints(report):
    checks = {
        "m_min(4,0.5)=3": abs(m_min(4, 0.5) - 3) <= 1e-14,
        "m_min(3,0.5)=3": abs(m_min(3, 0.5) - 3) <= 1e-14,
        "m_min_p2(2/3)=2": abs(m_min_p2(2 / 3) - 2) <= 1e-14,
    }
    beta = max(beta_identity_check(p) for p in (2.5, 3, 4, 5, 10))
    checks["beta identity"] = beta <= 1e-14
    admissible = [(4, 0.5, 3), (3, 0.5, 3), (2, 2 / 3, 2)]
    defects, finite = [], True
    for p, a, m in admissible:
        rep = check_parameters(p, a, m, t_max=1e4)
        defects.append(rep.phi_prime_Lm_defect)
        finite &= rep.passed and all(math.isfinite(v) for v in rep.condition_sups.values())
    checks["phi' L^m = k gamma"] = max(defects) <= 1e-12
    checks["admissible sups finite"] = finite
    divergent = []
    for p, a, m in admissible:
        rep = check_parameters(p, a, m - 0.5, t_max=1e4)
        divergent.append(not rep.all_satisfied
                         and all(rep.tail_growth[c] > 1 for c in rep.failing))
    checks["m_min - 0.5 divergent"] = all(divergent)
    ok = all(checks.values())
    report("criterion 9 constraints", ok,
           f"beta identity max {beta:.1e}, phi'L^m defect max {max(defects):.1e}, "
           + ", ".join(f"{k} {'ok' if v else 'NO'}" for k, v in checks.items()))
    assert ok


# ---------------------------------------------------------------- 10

def test_criterion_10_determinism(run_expanding_p2, report):
    first = run_expanding_p2.trace.to_csv_text()
    again, _ = simulate(expanding_p2_cfg(), keep_states=False)
    second = again.to_csv_text()
    identical = first.encode() == second.encode()
    round_trip = EnergyTrace.from_csv_text(first).equals(run_expanding_p2.trace)
    ok = identical and round_trip
    report("criterion 10 determinism", ok,
           f"byte-identical CSV {identical} ({len(first)} bytes), exact re-parse {round_trip}")
    assert ok
