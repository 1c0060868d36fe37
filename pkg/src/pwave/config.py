"""Flat ``key = value`` run configuration with dotted section prefixes.

    seed_label = demo
    output_dir = runs/demo
    solver.p = 2
    solver.N = 200
    trajectory.family = powerlaw
    trajectory.k = 1
    analysis.komornik = true

Lines starting with ``#`` are comments.  Unknown keys and malformed values
raise ConfigError carrying the line number and key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domain import Constant, PowerLaw, Tabulated
from .envelope import KINDS
from .errors import PWaveError
from .solver import SolverConfig, profile_from_spec
from .weights import Identity, PowerShift, weight_from_spec


class ConfigError(PWaveError, ValueError):
    def __init__(self, msg, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.key = key


def _bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise ValueError("expected a positive integer")
    return v


def _auto_float(s):
    return None if s.strip().lower() == "auto" else float(s)


def _samples(s):
    pairs = []
    for item in s.split(","):
        item = item.strip()
        if not item:
            continue
        t, _, L = item.partition(":")
        pairs.append((float(t), float(L)))
    return tuple(pairs)


def _kind(s):
    s = s.strip()
    if s.lower() in ("auto", "none"):
        return s.lower()
    for k in KINDS:
        if k.lower() == s.lower():
            return k
    raise ValueError(f"unknown envelope kind {s!r}; expected one of {', '.join(KINDS)}, auto, none")


def _weight(s):
    s = s.strip().lower()
    if s == "auto":
        return "auto"
    weight_from_spec(s)
    return s


def _window(s):
    if s.strip().lower() == "auto":
        return None
    lo, hi = (float(x) for x in s.split(","))
    if not 0 <= lo < hi:
        raise ValueError("window must be 'lo,hi' with 0 <= lo < hi")
    return (lo, hi)


def _profile(s):
    profile_from_spec(s)
    return s.strip().lower()


def _family(s):
    s = s.strip().lower()
    if s not in ("powerlaw", "constant", "tabulated"):
        raise ValueError(f"unknown trajectory family {s!r}")
    return s


# key -> (parser, default)
SCHEMA = {
    "seed_label": (str.strip, "run"),
    "output_dir": (str.strip, "runs/run"),
    "solver.p": (float, 2.0),
    "solver.N": (int, 200),
    "solver.dt": (float, 1e-3),
    "solver.t_end": (float, 1.0),
    "solver.eps_reg": (float, 1e-8),
    "solver.newton_tol": (float, 1e-10),
    "solver.newton_max_iter": (_pos_int, 30),
    "solver.initial_profile": (_profile, "sine:1"),
    "solver.initial_velocity": (_profile, "zero"),
    "solver.sample_every": (_pos_int, 100),
    "trajectory.family": (_family, "constant"),
    "trajectory.L0": (float, 1.0),
    "trajectory.k": (float, 1.0),
    "trajectory.gamma": (float, 0.5),
    "trajectory.m": (float, 2.0),
    "trajectory.samples": (_samples, ()),
    "trajectory.t_max": (_auto_float, None),
    "analysis.check_embeddings": (_bool, True),
    "analysis.komornik": (_bool, True),
    "analysis.komornik_q": (_auto_float, None),
    "analysis.weight": (_weight, "auto"),
    "analysis.fit_envelope": (_kind, "auto"),
    "analysis.fit_window": (_window, None),
    "analysis.constraints": (_bool, False),
    "analysis.alpha": (_auto_float, None),
    "analysis.plots": (_bool, True),
    "analysis.bound_column": (_bool, False),
}


def parse_lines(text, allow_prefixes=()):
    """Yield (lineno, key, raw_value) for every non-blank, non-comment line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in SCHEMA and not key.startswith(tuple(allow_prefixes)):
            raise ConfigError("unknown key", line=lineno, key=key)
        yield lineno, key, value


@dataclass
class RunConfig:
    values: dict
    lines: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text):
        return cls.from_items(parse_lines(text))

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_items(cls, items):
        values = {k: d for k, (_, d) in SCHEMA.items()}
        lines = {}
        for lineno, key, raw in items:
            if key in lines:
                raise ConfigError(f"duplicate key (first set on line {lines[key]})",
                                  line=lineno, key=key)
            try:
                values[key] = SCHEMA[key][0](raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(str(exc), line=lineno, key=key) from None
            lines[key] = lineno
        cfg = cls(values, lines)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def _fail(self, key, msg):
        raise ConfigError(msg, line=self.lines.get(key), key=key)

    @property
    def p(self):
        return self["solver.p"]

    def trajectory(self):
        fam = self["trajectory.family"]
        t_max = self["trajectory.t_max"] or self["solver.t_end"]
        try:
            if fam == "powerlaw":
                return PowerLaw(t_max=t_max, k=self["trajectory.k"],
                                gamma=self["trajectory.gamma"], m=self["trajectory.m"])
            if fam == "constant":
                return Constant(t_max=t_max, L0=self["trajectory.L0"])
            return Tabulated.from_pairs(self["trajectory.samples"])
        except (ValueError, IndexError) as exc:
            key = "trajectory.samples" if fam == "tabulated" else "trajectory.family"
            self._fail(key, str(exc))

    def solver_config(self):
        try:
            return SolverConfig(
                p=self.p, traj=self.trajectory(), N=self["solver.N"], dt=self["solver.dt"],
                t_end=self["solver.t_end"], eps_reg=self["solver.eps_reg"],
                newton_tol=self["solver.newton_tol"],
                newton_max_iter=self["solver.newton_max_iter"],
                initial_profile=profile_from_spec(self["solver.initial_profile"]),
                initial_velocity=profile_from_spec(self["solver.initial_velocity"]),
                sample_every=self["solver.sample_every"])
        except ConfigError:
            raise
        except ValueError as exc:
            msg = str(exc)
            key = next((k for k in SCHEMA if k.startswith("solver.")
                        and msg.startswith(k.split(".", 1)[1] + " ")), None)
            if "horizon" in msg:
                key = "trajectory.t_max" if self.lines.get("trajectory.t_max") else "solver.t_end"
            self._fail(key, msg)

    def weight(self):
        spec = self["analysis.weight"]
        if spec == "auto":
            if self["trajectory.family"] == "powerlaw":
                return PowerShift(self["trajectory.k"], self["trajectory.gamma"])
            return Identity()
        return weight_from_spec(spec)

    def komornik_q(self):
        q = self["analysis.komornik_q"]
        if q is None:
            return (self.p - 2) / self.p
        return q

    def alpha(self):
        a = self["analysis.alpha"]
        if a is None:
            return 2.0 / 3.0 if self.p == 2 else 0.5
        return a

    def envelope_kind(self):
        kind = self["analysis.fit_envelope"]
        if kind != "auto":
            return None if kind == "none" else kind
        expanding = self["trajectory.family"] == "powerlaw"
        if self.p == 2:
            return "ExpInPhi" if expanding else "ExpInT"
        return "PolyInPhi" if expanding else "PolyInT"

    def validate(self):
        self.solver_config()
        q = self["analysis.komornik_q"]
        if q is not None and q < 0:
            self._fail("analysis.komornik_q", "q must be >= 0")
        if self["analysis.constraints"]:
            from .constraints import alpha_interval
            lo, hi = alpha_interval(self.p)
            if not lo < self.alpha() < hi:
                self._fail("analysis.alpha", f"alpha outside ({lo:.6g}, {hi:.6g}) for p={self.p:g}")
        kind = self.envelope_kind()
        if kind in ("PolyInPhi", "PolyInT") and not self.p > 2:
            self._fail("analysis.fit_envelope", f"{kind} needs p > 2")
        w = self["analysis.fit_window"]
        if w is not None and w[1] > self["solver.t_end"] * (1 + 1e-12):
            self._fail("analysis.fit_window", "window extends past solver.t_end")

    def to_text(self):
        """Canonical key = value text (round-trips through from_text)."""
        out = []
        for key in SCHEMA:
            v = self.values[key]
            if v is None:
                s = "auto"
            elif isinstance(v, bool):
                s = "true" if v else "false"
            elif isinstance(v, float):
                s = repr(v)
            elif key == "trajectory.samples":
                s = ", ".join(f"{t!r}:{L!r}" for t, L in v)
            elif key == "analysis.fit_window":
                s = f"{v[0]!r},{v[1]!r}"
            else:
                s = str(v)
            out.append(f"{key} = {s}")
        return "\n".join(out) + "\n"

    def snapshot(self):
        d = {}
        for k, v in self.values.items():
            if isinstance(v, float) and not math.isfinite(v):
                v = str(v)
            elif isinstance(v, tuple):
                v = [list(x) if isinstance(x, tuple) else x for x in v]
            d[k] = v
        return d
