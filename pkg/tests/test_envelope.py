import json
import math

import numpy as np
import pytest

from pwave import Constant, EnergyTrace, PowerLaw, Tabulated
from pwave.envelope import (DecayEnvelope, compensated_energy, eval_envelope, exp_in_phi, exp_in_t,
                            fit, outside_theory, poly_in_phi, poly_in_t, tail_nonincreasing,
                            verify_envelope, write_json)
from pwave.errors import DegenerateTrace


def synth(t, E):
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return EnergyTrace(t, np.asarray(E, dtype=float), z, np.ones_like(t), z)


def test_closed_form_values():
    E0 = 1.7
    assert eval_envelope(exp_in_t(E0, 2.0), 0.0) == pytest.approx(E0 * math.e, rel=1e-15)
    # phi(3) = 4^{1/2} - 1 = 1
    assert eval_envelope(exp_in_phi(E0, 1.0, 1.0, 0.5), 3.0) == pytest.approx(E0, rel=1e-15)
    # ((1 + 1/2) / (1 + 3))^2
    assert eval_envelope(poly_in_t(E0, 1.0, 4.0), 6.0) == pytest.approx(0.140625 * E0, rel=1e-15)


def test_poly_in_phi_infinite_at_zero():
    env = poly_in_phi(1.0, 1.0, 4.0, 1.0, 0.5)
    vals = eval_envelope(env, np.array([0.0, 3.0]))
    assert vals[0] == math.inf
    # beta = 1/2: [C (3/2)(2) / (1/2)]^2 = 36, and phi(3) = 1
    assert vals[1] == pytest.approx(36.0)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        DecayEnvelope("Linear", prefactor=1.0)


def test_fit_exact_exponential():
    t = np.linspace(0, 4, 401)
    env = fit(synth(t, 2 * np.exp(-3 * t)), "ExpInT")
    assert env.slope == pytest.approx(-3.0, rel=1e-12)
    assert env.C == pytest.approx(1 / 3, rel=1e-12)
    assert abs(env.r2 - 1.0) <= 1e-10
    assert env.prefactor == pytest.approx(2.0, rel=1e-10)


def test_fit_exact_power():
    t = np.linspace(0, 10, 1001)
    env = fit(synth(t, (1 + t) ** -2.0), "PolyInT")
    assert env.slope == pytest.approx(-2.0, rel=1e-12)
    assert abs(env.r2 - 1.0) <= 1e-10


def test_fit_exact_in_phi():
    t = np.linspace(0, 40, 4001)
    phi = np.sqrt(1 + t) - 1
    env = fit(synth(t, np.exp(-2 * phi)), "ExpInPhi")
    assert env.slope == pytest.approx(-2.0, rel=1e-12)
    env = fit(synth(t[1:], phi[1:] ** -2.0), "PolyInPhi", p=4.0)
    assert env.slope == pytest.approx(-2.0, rel=1e-12)
    assert env.beta == 0.5


def test_fit_default_window_and_domination():
    t = np.linspace(0, 8, 801)
    E = np.exp(-t) * (1 + 0.1 * np.sin(5 * t))
    tr = synth(t, E)
    env = fit(tr, "ExpInT")
    assert env.fit_window == (2.0, 8.0)
    assert verify_envelope(tr, env) <= 1 + 1e-12
    assert verify_envelope(tr, env) == pytest.approx(1.0, rel=1e-12)


def test_own_formula_ratio_one():
    env = poly_in_t(3.0, 2.0, 5.0)
    t = np.linspace(0, 10, 200)
    tr = synth(t, eval_envelope(env, t))
    assert verify_envelope(tr, env, window=(0, 10)) == pytest.approx(1.0, rel=1e-15)


def test_slower_decay_is_flagged():
    # E = phi^{-1} against the beta = 1/2 envelope phi^{-2}
    t = np.linspace(1, 100, 991)
    phi = np.sqrt(1 + t) - 1
    tr = synth(t, 1 / phi)
    env = DecayEnvelope("PolyInPhi", prefactor=1.0, exponent=-2.0, beta=0.5, fit_window=(1, 100))
    assert verify_envelope(tr, env) > 1.0
    assert not tail_nonincreasing(tr.t, compensated_energy(tr, 0.5))


def test_fit_errors():
    t = np.linspace(0, 1, 30)
    with pytest.raises(ValueError, match="samples"):
        fit(synth(t, np.exp(-t)), "ExpInT", window=(0.0, 0.3))
    E = np.exp(-t)
    E[-1] = 0.0
    with pytest.raises(DegenerateTrace):
        fit(synth(t, E), "ExpInT", window=(0.0, 1.0))
    with pytest.raises(ValueError):
        fit(synth(t, np.exp(-t)), "Whatever")
    with pytest.raises(ValueError, match="exclude"):
        fit(synth(t, np.exp(-t)), "PolyInPhi", p=4.0, window=(0.0, 1.0))


def test_outside_theory_labels():
    assert not outside_theory(PowerLaw(t_max=10.0, k=1, gamma=0.5, m=2))
    assert outside_theory(PowerLaw(t_max=10.0, k=1, gamma=0.1, m=1.5))
    assert not outside_theory(Constant(t_max=10.0))
    assert outside_theory(Tabulated.from_pairs([(0, 1), (50, 5), (100, 20)]))


def test_tail_nonincreasing():
    t = np.linspace(0, 1, 11)
    assert tail_nonincreasing(t, np.r_[np.ones(5), np.linspace(1, 0.5, 6)])
    assert not tail_nonincreasing(t, np.r_[np.ones(5), np.linspace(0.5, 1, 6)])
    # rises before the final half are ignored
    assert tail_nonincreasing(t, np.r_[np.linspace(0, 1, 5), np.linspace(1, 0.5, 6)])


def test_write_json(tmp_path):
    env = exp_in_t(1.0, 2.0)
    write_json(env, tmp_path / "env.json")
    d = json.loads((tmp_path / "env.json").read_text())
    assert d["kind"] == "ExpInT" and d["C"] == 2.0
    assert d["schema_version"] == "1"


def test_simulated_p2_expanding_shape(run_expanding_p2):
    tr = run_expanding_p2.trace
    env = fit(tr, "ExpInPhi", k=1.0, gamma=0.5)
    assert env.r2 >= 0.95
    assert env.slope < 0
    assert verify_envelope(tr, env) <= 1 + 1e-6


def test_simulated_p4_expanding_compensated(run_expanding_p4):
    tr = run_expanding_p4.trace
    comp = compensated_energy(tr, 0.5, k=1.0, gamma=0.5)
    assert np.all(np.isfinite(comp))
    assert tail_nonincreasing(tr.t, comp)
    env = fit(tr, "PolyInPhi", k=1.0, gamma=0.5, p=4.0)
    assert verify_envelope(tr, env) <= 1 + 1e-6


def test_simulated_fixed_domain_shapes(run_sine, run_fixed_p4):
    env = fit(run_sine.trace, "ExpInT")
    assert env.r2 >= 0.99
    env4 = fit(run_fixed_p4.trace, "PolyInT", p=4.0)
    assert env4.slope <= -1.8
    assert verify_envelope(run_fixed_p4.trace, env4) <= 1 + 1e-6
