"""Command-line entry point: ``pwave {simulate,check-constraints,komornik,fit,sweep,version}``.

Exit codes: 0 success, 2 configuration or input error, 3 solver failure,
4 an analysis hypothesis or check failed.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path


from . import __version__
from .config import ConfigError, RunConfig, parse_lines
from .constraints import ParameterSet, check_parameters
from .domain import PowerLaw
from .energy import EnergyTrace
from .envelope import KINDS, fit, outside_theory, verify_envelope, eval_envelope
from .errors import DegenerateTrace, HypothesisViolation, NumericalBlowup, StepFailure
from .inequalities import check_embeddings
from .komornik import estimate_A
from .solver import simulate
from .weights import weight_from_spec

log = logging.getLogger("pwave")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ANALYSIS = 4

SCHEMA_VERSION = "1"
BOUND_TOL = 1e-6
SWEEP_PREFIX = "sweep."
SUMMARY_COLUMNS = ("run", "p", "m", "gamma", "fitted_slope", "R2", "envelope_ratio",
                   "outside_theory", "exit_code", "status")


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_pipeline(cfg, outdir=None):
    """Simulate one configuration and run the enabled analyses.

    Returns ``(exit_code, record)`` where ``record`` is the run.json content.
    """
    start = time.perf_counter()
    outdir = Path(outdir or cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(cfg.to_text())
    scfg = cfg.solver_config()
    traj = scfg.traj
    record = {
        "schema_version": SCHEMA_VERSION,
        "seed_label": cfg["seed_label"],
        "config": cfg.snapshot(),
        "outside_theory": outside_theory(traj),
        "reports": {},
        "violations": [],
    }

    def finish(code, status):
        record["exit_code"] = code
        record["status"] = status
        record["wall_clock_s"] = time.perf_counter() - start
        _write_json(record, outdir / "run.json")
        return code, record

    try:
        trace, states = simulate(scfg)
    except (NumericalBlowup, StepFailure) as exc:
        record["failure_time"] = exc.t
        return finish(EXIT_SOLVER, f"solver failure: {exc}")

    violations = record["violations"]
    env = None
    weight = None

    if trace.E0 > 0 and cfg["analysis.komornik"]:
        weight = cfg.weight()
        try:
            rep = estimate_A(trace, weight, cfg.komornik_q())
        except HypothesisViolation as exc:
            violations.append(exc.condition)
            record["komornik_error"] = str(exc)
        else:
            rep.to_json(outdir / "komornik.json")
            record["reports"]["komornik"] = "komornik.json"
            if rep.bound_violation > 1 + BOUND_TOL:
                violations.append("komornik_bound")

    kind = cfg.envelope_kind()
    if trace.E0 > 0 and kind is not None:
        try:
            env = fit(trace, kind, k=cfg["trajectory.k"], gamma=cfg["trajectory.gamma"],
                      p=cfg.p, window=cfg["analysis.fit_window"])
        except (ValueError, DegenerateTrace) as exc:
            record["envelope_error"] = str(exc)
        else:
            ratio = verify_envelope(trace, env)
            d = env.to_dict()
            d["envelope_ratio"] = ratio
            _write_json(d, outdir / "envelope.json")
            record["reports"]["envelope"] = "envelope.json"
            record["envelope"] = {"kind": kind, "slope": env.slope, "R2": env.r2,
                                  "envelope_ratio": ratio}

    extra = None
    if env is not None and cfg["analysis.bound_column"]:
        extra = {"bound": eval_envelope(env, trace.t)}
    trace.to_csv(outdir / "trace.csv", extra)
    record["trace_csv"] = "trace.csv"

    if cfg["analysis.check_embeddings"]:
        reports = [check_embeddings(s) for s in states]
        with open(outdir / "embeddings.jsonl", "w") as fh:
            for r in reports:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
        record["reports"]["embeddings"] = "embeddings.jsonl"
        if not all(r.ok for r in reports):
            violations.append("embedding")

    if cfg["analysis.constraints"]:
        if isinstance(traj, PowerLaw):
            params = ParameterSet(p=cfg.p, alpha=cfg.alpha(), m=traj.m, k=traj.k,
                                  gamma=traj.gamma)
            crep = check_parameters(params.p, params.alpha, params.m, params.k, params.gamma)
            crep.to_json(outdir / "constraints.json")
            record["reports"]["constraints"] = "constraints.json"
            if not crep.m_ok:
                violations.append(f"m_min (m={crep.m:g} < {crep.m_min:.6g})")
            violations.extend(crep.failing)
        else:
            record["constraints_note"] = "constraints apply to powerlaw trajectories only"

    if cfg["analysis.plots"]:
        from .plots import energy_plots
        w = weight if weight is not None and weight.name != "identity" else None
        if w is None and cfg["trajectory.family"] == "powerlaw":
            w = cfg.weight()
        paths = energy_plots(trace, outdir, env=env, weight=w)
        record["plots"] = [p.name for p in paths]

    if violations:
        return finish(EXIT_ANALYSIS, "analysis violation: " + ", ".join(violations))
    return finish(EXIT_OK, "ok")


# ---------------------------------------------------------------- verbs

def cmd_simulate(args):
    try:
        cfg = RunConfig.from_file(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, record = run_pipeline(cfg, args.output_dir)
    print(f"{record['status']} (exit {code}); outputs in {args.output_dir or cfg['output_dir']}")
    if code == EXIT_SOLVER:
        print(f"failure time: {record['failure_time']:.17g}", file=sys.stderr)
    return code


def cmd_check_constraints(args):
    try:
        rep = check_parameters(args.p, args.alpha, args.m, args.k, args.gamma, args.t_max,
                               phi2=args.phi2)
    except ValueError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(rep.table())
    if args.json:
        rep.to_json(args.json)
    else:
        print(json.dumps(rep.to_dict(), sort_keys=True))
    return EXIT_OK if rep.passed else EXIT_ANALYSIS


def _load_trace(path):
    try:
        return EnergyTrace.from_csv(path)
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return None


def cmd_komornik(args):
    trace = _load_trace(args.trace)
    if trace is None:
        return EXIT_CONFIG
    try:
        weight = weight_from_spec(args.weight)
    except ValueError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = estimate_A(trace, weight, args.q)
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except DegenerateTrace as exc:
        print(f"degenerate trace: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    if args.json:
        rep.to_json(args.json)
    else:
        print(json.dumps(rep.to_dict(), sort_keys=True))
    holds = rep.bound_violation <= 1 + BOUND_TOL
    print(f"A_hat={rep.A_hat:.6g} tail_fraction={rep.tail_fraction:.3g} "
          f"bound_violation={rep.bound_violation:.6g}"
          + ("" if rep.trusted else " WARNING: truncation not negligible (tail_fraction > 0.01)"))
    return EXIT_OK if holds and rep.trusted else EXIT_ANALYSIS


def cmd_fit(args):
    trace = _load_trace(args.trace)
    if trace is None:
        return EXIT_CONFIG
    window = tuple(float(x) for x in args.window.split(",")) if args.window else None
    try:
        env = fit(trace, args.kind, k=args.k, gamma=args.gamma, p=args.p, window=window)
    except (ValueError, DegenerateTrace) as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    d = env.to_dict()
    d["envelope_ratio"] = verify_envelope(trace, env)
    if args.json:
        _write_json(d, args.json)
    print(json.dumps(d, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def parse_sweep(text):
    """Split a sweep file into base config items and the parameter grid."""
    base, grid = [], {}
    for lineno, key, raw in parse_lines(text, allow_prefixes=(SWEEP_PREFIX,)):
        if key.startswith(SWEEP_PREFIX):
            target = key[len(SWEEP_PREFIX):]
            from .config import SCHEMA
            if target not in SCHEMA:
                raise ConfigError("unknown swept key", line=lineno, key=key)
            vals = [v.strip() for v in raw.split(",") if v.strip()]
            if not vals:
                raise ConfigError("empty value list", line=lineno, key=key)
            grid[target] = (lineno, vals)
        else:
            base.append((lineno, key, raw))
    return base, grid


def expand_sweep(text):
    """List of (run_name, RunConfig) in deterministic grid order."""
    base, grid = parse_sweep(text)
    keys = list(grid)
    runs = []
    combos = itertools.product(*(grid[k][1] for k in keys)) if keys else [()]
    for i, combo in enumerate(combos):
        items = [it for it in base if it[1] not in keys]
        items += [(grid[k][0], k, v) for k, v in zip(keys, combo)]
        cfg = RunConfig.from_items(items)
        label = "_".join(f"{k.split('.')[-1]}={v}" for k, v in zip(keys, combo))
        name = f"run{i:03d}" + (f"_{label}" if label else "")
        runs.append((name, cfg))
    return runs


def _sweep_worker(job):
    name, text, outdir = job
    cfg = RunConfig.from_text(text)
    code, record = run_pipeline(cfg, outdir)
    return name, code, record


def sweep_threads(override=None):
    if override:
        return override
    env = os.environ.get("PWAVE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(text, outdir, threads=None):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    runs = expand_sweep(text)
    jobs = [(name, cfg.to_text(), str(outdir / name)) for name, cfg in runs]
    n = sweep_threads(threads)
    if n == 1 or len(jobs) == 1:
        results = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as ex:
            results = list(ex.map(_sweep_worker, jobs))
    rows = []
    for (name, cfg), (_, code, rec) in zip(runs, results):
        envd = rec.get("envelope", {})
        fam = cfg["trajectory.family"]
        rows.append({
            "run": name,
            "p": repr(cfg.p),
            "m": repr(cfg["trajectory.m"]) if fam == "powerlaw" else "",
            "gamma": repr(cfg["trajectory.gamma"]) if fam == "powerlaw" else "",
            "fitted_slope": "%.17g" % envd["slope"] if envd else "",
            "R2": "%.17g" % envd["R2"] if envd else "",
            "envelope_ratio": "%.17g" % envd["envelope_ratio"] if envd else "",
            "outside_theory": "true" if rec["outside_theory"] else "false",
            "exit_code": str(code),
            "status": rec["status"],
        })
    with open(outdir / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows, max((int(r["exit_code"]) for r in rows), default=0)


def cmd_sweep(args):
    try:
        text = Path(args.sweep_file).read_text()
        expand_sweep(text)
    except (ConfigError, OSError) as exc:
        print(f"sweep error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.output_dir or "runs/sweep"
    rows, code = run_sweep(text, outdir, args.threads)
    failed = [r["run"] for r in rows if r["exit_code"] != "0"]
    print(f"{len(rows)} runs, {len(failed)} failed; summary in {Path(outdir) / 'summary.csv'}")
    for name in failed:
        print(f"  failed: {name}", file=sys.stderr)
    return code


def cmd_version(args):
    print(f"pwave {__version__}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="pwave", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("config")
    s.add_argument("-o", "--output-dir", help="overrides output_dir from the config")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check-constraints", help="thresholds on m and weight conditions")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--m", type=float, required=True)
    c.add_argument("--k", type=float, default=1.0)
    c.add_argument("--gamma", type=float, default=0.5)
    c.add_argument("--t-max", type=float, default=1e4)
    c.add_argument("--phi2", choices=("majorant", "exact"), default="majorant")
    c.add_argument("--json", help="write the JSON report here instead of stdout")
    c.set_defaults(func=cmd_check_constraints)

    k = sub.add_parser("komornik", help="estimate A and check the decay bound on a trace CSV")
    k.add_argument("trace")
    k.add_argument("--q", type=float, default=0.0)
    k.add_argument("--weight", default="identity",
                   help="identity | powershift:k,gamma | tabulated:t:phi;...")
    k.add_argument("--json")
    k.set_defaults(func=cmd_komornik)

    f = sub.add_parser("fit", help="fit a decay envelope to a trace CSV")
    f.add_argument("trace")
    f.add_argument("--kind", choices=KINDS, required=True)
    f.add_argument("--k", type=float, default=1.0)
    f.add_argument("--gamma", type=float, default=0.5)
    f.add_argument("--p", type=float)
    f.add_argument("--window", help="lo,hi (default: last three quarters)")
    f.add_argument("--json")
    f.set_defaults(func=cmd_fit)

    w = sub.add_parser("sweep", help="run a parameter grid")
    w.add_argument("sweep_file")
    w.add_argument("-o", "--output-dir")
    w.add_argument("--threads", type=int, help="overrides PWAVE_THREADS")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("version")
    v.set_defaults(func=cmd_version)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
