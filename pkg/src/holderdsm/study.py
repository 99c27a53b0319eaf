"""Seeded noise-level sweeps of the DSM and their CSV output."""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dsm import IntegratorOptions, StopRule, check_init, integrate_shifted
from .errors import ConfigError, DSMError, StructuralError
from .operators import get_problem, perturb, problem_labels
from .schedule import Schedule, certify
from .space import HVector, norm

__all__ = ["StudyConfig", "StudyRow", "parse_config", "format_config", "run_study",
           "write_csv", "CSV_COLUMNS"]

CSV_COLUMNS = ("delta", "seed", "t_delta", "error", "discrepancy_at_stop", "a_at_stop",
               "status", "wall_time_ms")


@dataclass(frozen=True)
class StudyConfig:
    """Validated sweep configuration.

    ``seeds`` is the number of noise draws per noise level (seeds
    ``0 .. seeds-1``).  ``init_checks`` additionally requires the schedule to
    certify ``eq46`` for ``q``.
    """

    problem: str
    delta: tuple
    d: float = 3.0
    c: float = 1.0
    b: float = 0.5
    C: float = 1.5
    zeta: float = 0.9
    seeds: int = 3
    ubar: tuple | None = None
    output: str | None = None
    rtol: float = 1e-8
    atol: float = 1e-12
    T_max: float = 1e6
    workers: int = 1
    p: float = 0.4
    q: float = 0.25
    theta: float = 1.0
    init_checks: bool = False

    @property
    def schedule(self):
        return Schedule.power(self.d, self.c, self.b, self.T_max)

    @property
    def rule(self):
        return StopRule(self.C, self.zeta)

    @property
    def options(self):
        return IntegratorOptions(self.rtol, self.atol, self.T_max)


@dataclass
class StudyRow:
    delta: float
    seed: int
    t_delta: float = math.nan
    error: float = math.nan
    discrepancy_at_stop: float = math.nan
    a_at_stop: float = math.nan
    status: str = "ok"
    wall_time_ms: float = 0.0
    init_cert: str = ""

    def csv_fields(self):
        num = lambda x: "%.17g" % x
        return [num(self.delta), str(self.seed), num(self.t_delta), num(self.error),
                num(self.discrepancy_at_stop), num(self.a_at_stop), self.status,
                "%.3f" % self.wall_time_ms]


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


_PARSERS = {
    "problem": str.strip,
    "d": float, "c": float, "b": float, "C": float, "zeta": float,
    "delta": _floats,
    "seeds": int,
    "ubar": _floats,
    "output": str.strip,
    "rtol": float, "atol": float, "T_max": float,
    "workers": int,
    "p": float, "q": float, "theta": float,
    "init_checks": _parse_bool,
}


def parse_config(text):
    """Parse ``key=value`` lines (``#`` starts a comment) into a :class:`StudyConfig`.

    Raises
    ------
    ConfigError
        On malformed lines, unknown or repeated keys and invariant
        violations, citing the responsible line.
    """
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", lineno)
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        where[key] = lineno
    if "problem" not in values:
        raise ConfigError("missing required key 'problem'")
    if "delta" not in values:
        raise ConfigError("missing required key 'delta'")
    cfg = StudyConfig(**values)
    _validate(cfg, where)
    return cfg


def _validate(cfg, where):
    def fail(key, msg):
        raise ConfigError(msg, where.get(key))

    if cfg.problem not in problem_labels():
        fail("problem", f"unknown problem {cfg.problem!r}")
    if not cfg.delta:
        fail("delta", "delta list is empty")
    if any(not (x > 0 and math.isfinite(x)) for x in cfg.delta):
        fail("delta", "noise levels must be positive and finite")
    if any(x2 >= x1 for x1, x2 in zip(cfg.delta, cfg.delta[1:])):
        fail("delta", "delta list must be strictly decreasing")
    for key in ("d", "c", "C", "rtol", "atol", "T_max", "theta"):
        if not getattr(cfg, key) > 0:
            fail(key, f"{key} must be positive")
    if not 0 < cfg.b < 1:
        fail("b", f"b must lie in (0, 1), got {cfg.b}")
    if not 0 < cfg.zeta <= 1:
        fail("zeta", f"zeta must lie in (0, 1], got {cfg.zeta}")
    if cfg.seeds < 1:
        fail("seeds", "seeds must be >= 1")
    if cfg.workers < 1:
        fail("workers", "workers must be >= 1")
    if not 0 < cfg.q < 0.5:
        fail("q", "q must lie in (0, 1/2)")
    if not 0 < cfg.p < 1:
        fail("p", "p must lie in (0, 1)")
    for x in cfg.delta:
        if not cfg.C * x ** cfg.zeta > x:
            fail("delta", f"C delta^zeta must exceed delta (fails at delta={x:g})")
    try:
        sched = cfg.schedule
        ok28 = certify(sched, "eq28")
        if not ok28:
            fail("b", f"schedule fails eq28: {ok28.reason}")
        if cfg.init_checks:
            ok46 = certify(sched, "eq46_q", cfg.q)
            if not ok46:
                fail("d", f"schedule fails eq46 for q={cfg.q}: {ok46.reason}")
    except StructuralError as exc:
        fail("d", str(exc))
    if cfg.ubar is not None:
        n = get_problem(cfg.problem).n
        if len(cfg.ubar) != n:
            fail("ubar", f"ubar has {len(cfg.ubar)} entries, problem dimension is {n}")


def format_config(cfg):
    """Inverse of :func:`parse_config` (full precision)."""
    out = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if isinstance(v, tuple):
            v = ",".join("%.17g" % x for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = "%.17g" % v
        out.append(f"{f.name}={v}")
    return "\n".join(out) + "\n"


def _one_run(cfg, delta, seed):
    problem = get_problem(cfg.problem, cfg.ubar)
    ub = problem.ubar
    target = problem.nearest_solution(ub)
    row = StudyRow(delta, seed)
    start = time.perf_counter()
    try:
        noisy = perturb(problem.f, delta, seed)
        u0 = problem.start()
        try:
            cert = check_init(problem.operator, cfg.schedule, noisy, u0, cfg.rule,
                              cfg.p, cfg.q, cfg.theta, ub)
            row.init_cert = cert.summary()
        except DSMError as exc:
            row.init_cert = f"unavailable: {type(exc).__name__}"
        rec = integrate_shifted(problem.operator, cfg.schedule, noisy, u0, ub,
                                cfg.rule, cfg.options)
        row.t_delta = rec.t_delta
        row.error = norm(rec.u_at_stop - target)
        row.discrepancy_at_stop = rec.discrepancy_at_stop
        row.a_at_stop = float(rec.a[-1])
    except DSMError as exc:
        row.status = f"failed:{type(exc).__name__}"
    row.wall_time_ms = 1e3 * (time.perf_counter() - start)
    return row


def _run_delta(args):
    cfg, delta = args
    return [_one_run(cfg, delta, s) for s in range(cfg.seeds)]


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(r.csv_fields()) + "\n")


def run_study(cfg, output=None):
    """Run every ``(delta, seed)`` pair of the sweep.

    Failed runs are kept as rows whose ``status`` starts with ``failed:``.
    Rows are ordered by decreasing ``delta`` then seed regardless of
    completion order.  When an output path is given (argument or config) the
    rows are written there as CSV.
    """
    jobs = [(cfg, d) for d in cfg.delta]
    workers = min(cfg.workers, len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(_run_delta, jobs))
    else:
        groups = [_run_delta(j) for j in jobs]
    rows = sorted((r for g in groups for r in g), key=lambda r: (-r.delta, r.seed))
    path = output if output is not None else cfg.output
    if path:
        write_csv(rows, path)
    return rows


def summarize(rows):
    """Median ``t_delta`` and error per noise level over successful runs."""
    out = {}
    for d in sorted({r.delta for r in rows}, reverse=True):
        ok = [r for r in rows if r.delta == d and r.status == "ok"]
        out[d] = (float(np.median([r.t_delta for r in ok])) if ok else math.nan,
                  float(np.median([r.error for r in ok])) if ok else math.nan,
                  len(ok))
    return out
