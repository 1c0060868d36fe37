"""Embedding inequalities between L^2 and L^p norms on Omega_t = (0, L).

    ||u_x||_2^2 <= L^{1-2/p} ||u_x||_p^2        (Hoelder)
    ||u||_2^2   <= L^{3-2/p} ||u_x||_p^2
    ||u||_2^2   <= L^2 ||u_x||_2^2              (Poincare, left end pinned)
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .energy import l2_sq

TOL_QUAD = 1e-8


@dataclass(frozen=True)
class EmbeddingReport:
    t: float
    lhs1: float
    rhs1: float
    lhs2: float
    rhs2: float
    lhs3: float
    rhs3: float
    tol: float = TOL_QUAD

    @property
    def margins(self):
        return (self.rhs1 - self.lhs1, self.rhs2 - self.lhs2, self.rhs3 - self.lhs3)

    @property
    def violated(self):
        """Per-inequality flags: margin below -tol * max(rhs, 1)."""
        rhs = (self.rhs1, self.rhs2, self.rhs3)
        return tuple(m < -self.tol * max(r, 1.0) for m, r in zip(self.margins, rhs))

    @property
    def ok(self):
        return not any(self.violated)

    def to_dict(self):
        d = asdict(self)
        d["margins"] = list(self.margins)
        d["violated"] = list(self.violated)
        return d


def norms(state):
    """(||u_x||_2^2, ||u_x||_p^2, ||u||_2^2) on the physical interval."""
    h, L, p = state.h, state.L, state.p
    g = np.diff(state.v) / h
    grad2 = h * float(np.dot(g, g)) / L
    gradp_p = L ** (1 - p) * h * float(np.sum(np.abs(g) ** p))
    gradp_sq = gradp_p ** (2.0 / p)
    u2 = L * l2_sq(state.v, h)
    return grad2, gradp_sq, u2


def check_embeddings(state, tol=TOL_QUAD):
    grad2, gradp_sq, u2 = norms(state)
    L, p = state.L, state.p
    return EmbeddingReport(
        t=float(state.t),
        lhs1=grad2, rhs1=L ** (1 - 2 / p) * gradp_sq,
        lhs2=u2, rhs2=L ** (3 - 2 / p) * gradp_sq,
        lhs3=u2, rhs3=L ** 2 * grad2,
        tol=tol,
    )


def write_jsonl(reports, path):
    with open(path, "w") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
