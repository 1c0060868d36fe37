import json

import numpy as np
import pytest

from conftest import HANDPICKED, simpson_norms, state_from_physical
from pwave import ReferenceState
from pwave.inequalities import check_embeddings, norms, write_jsonl


def test_zero_state_margins_zero():
    rep = check_embeddings(ReferenceState.zeros(20, p=4.0))
    assert rep.margins == (0.0, 0.0, 0.0)
    assert rep.ok


def test_p2_hoelder_margin_vanishes():
    L = 1.7
    s = state_from_physical(lambda x: x * (L - x), L, 2.0, N=200)
    rep = check_embeddings(s)
    assert rep.margins[0] == pytest.approx(0.0, abs=1e-14 * rep.rhs1)


@pytest.mark.parametrize("name", sorted(HANDPICKED))
def test_norms_match_simpson_oracle(name):
    u, du, L, p = HANDPICKED[name]
    got = norms(state_from_physical(u, L, p))
    want = simpson_norms(u, du, L, p)
    assert np.allclose(got, want, rtol=1e-6, atol=0), (got, want)


@pytest.mark.parametrize("name", sorted(HANDPICKED))
def test_handpicked_states_satisfy_embeddings(name):
    u, _, L, p = HANDPICKED[name]
    rep = check_embeddings(state_from_physical(u, L, p, N=400))
    assert rep.ok
    assert all(m > 0 for m in rep.margins[1:])


def test_hoelder_sharp_for_constant_slope():
    # tent profile: |u_x| is constant, so Hoelder holds with equality
    N, L, p = 201, 2.5, 4.0
    s = ReferenceState.from_functions(N, lambda y: np.minimum(y, 1 - y), lambda y: 0 * y, L=L, p=p)
    rep = check_embeddings(s)
    assert abs(rep.margins[0]) <= 1e-13 * rep.rhs1
    assert rep.ok


def test_violation_flag_detects_negative_margin():
    rep = check_embeddings(ReferenceState.zeros(5))
    bad = type(rep)(t=0.0, lhs1=2.0, rhs1=1.0, lhs2=0, rhs2=0, lhs3=0, rhs3=0)
    assert bad.violated == (True, False, False)
    assert not bad.ok


def test_suite_states_satisfy_embeddings(suite_runs):
    for run in suite_runs:
        for s in run.states:
            assert check_embeddings(s).ok, (run.label, s.t)


def test_jsonl_output(tmp_path):
    reps = [check_embeddings(state_from_physical(HANDPICKED["sine p=4 L=2"][0], 2.0, 4.0, N=50))]
    path = tmp_path / "emb.jsonl"
    write_jsonl(reps, path)
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert rows[0]["violated"] == [False, False, False]
    assert len(rows[0]["margins"]) == 3
