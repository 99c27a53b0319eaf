"""Command-line entry points."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dsm import IntegratorOptions, StopRule, TrajectoryRecord, integrate_shifted
from .errors import DSMError
from .operators import get_problem, perturb, problem_labels
from .path import sample_path
from .schedule import Schedule, certify
from .space import HVector, norm
from .study import parse_config, run_study, summarize
from .verification import audit_trajectory

G = "%.17g"


def _schedule_args(p):
    p.add_argument("--d", type=float, default=3.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.5)
    p.add_argument("--T-max", dest="T_max", type=float, default=1e6)


def _problem_args(p):
    p.add_argument("--problem", required=True, choices=problem_labels())
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ubar", type=lambda s: [float(x) for x in s.split(",")], default=None)


def _schedule(ns):
    return Schedule.power(ns.d, ns.c, ns.b, ns.T_max)


def cmd_validate_schedule(ns, out):
    s = _schedule(ns)
    ok = True
    for cid, q in (("eq28", None), ("eq26_q", ns.q), ("eq46_q", ns.q)):
        cert = certify(s, cid, q)
        ok &= cert.passed
        status = "PASS" if cert.passed else "FAIL"
        extra = "" if cert.passed else f" witness t={cert.witness:g}: {cert.reason}"
        out.write(f"{cid:8s} {status}{extra}\n")
    need = ns.b / ns.q * ns.c ** (ns.b - 1)
    good = ns.d > need
    ok &= good
    out.write(f"{'d-bound':8s} {'PASS' if good else 'FAIL'} d={ns.d:g} > {need:.6g}\n")
    return 0 if ok else 1


def _run(ns):
    prob = get_problem(ns.problem, ns.ubar)
    noisy = perturb(prob.f, ns.delta, ns.seed)
    rule = StopRule(ns.C, ns.zeta)
    opts = IntegratorOptions(ns.rtol, ns.atol, ns.T_max)
    rec = integrate_shifted(prob.operator, _schedule(ns), noisy, prob.start(), prob.ubar,
                            rule, opts)
    return prob, noisy, rec


_META_KEYS = ("problem", "delta", "seed", "d", "c", "b", "T_max", "C", "zeta", "rtol",
              "atol")


def write_trajectory(path, ns, rec):
    n = rec.U.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        for k in _META_KEYS:
            v = getattr(ns, k)
            fh.write(f"# {k}={G % v if isinstance(v, float) else v}\n")
        if ns.ubar is not None:
            fh.write("# ubar=" + ",".join(G % x for x in ns.ubar) + "\n")
        fh.write(f"# target={G % rec.target}\n# stopped={int(rec.stopped)}\n")
        cols = ["t", "discrepancy", "a", "h", "u_norm"] + [f"u{i}" for i in range(n)]
        fh.write(",".join(cols) + "\n")
        un = rec.u_norm
        for i in range(rec.times.size):
            vals = [rec.times[i], rec.discrepancy[i], rec.a[i], rec.h[i], un[i], *rec.U[i]]
            fh.write(",".join(G % v for v in vals) + "\n")


def read_trajectory(path):
    """Return ``(metadata dict, column names, data array)`` of a trajectory CSV."""
    meta, header, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, v = line[1:].strip().split("=", 1)
                meta[k] = v
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(x) for x in line.split(",")])
    return meta, header, np.array(rows)


def cmd_solve(ns, out):
    prob, noisy, rec = _run(ns)
    ystar = prob.nearest_solution(prob.ubar)
    out.write(f"t_delta={G % rec.t_delta}\n")
    out.write(f"discrepancy={G % rec.discrepancy_at_stop}\n")
    out.write(f"target={G % rec.target}\n")
    out.write(f"error={G % norm(rec.u_at_stop - ystar)}\n")
    out.write(f"steps={rec.n_steps}\n")
    if ns.output:
        write_trajectory(ns.output, ns, rec)
    return 0


def cmd_path(ns, out):
    prob = get_problem(ns.problem)
    noisy = perturb(prob.f, ns.delta, ns.seed)
    times = np.concatenate([[0.0], np.logspace(np.log10(ns.t_min), np.log10(ns.t_end),
                                               ns.points - 1)])
    pts = sample_path(prob.operator, _schedule(ns), noisy, times)
    out.write("t,a,psi,phi_d,residual,discrepancy\n")
    for p in pts:
        out.write(",".join(G % v for v in (p.t, p.a, p.psi, p.phi_d, p.residual,
                                            p.discrepancy)) + "\n")
    return 0


def cmd_audit(ns, out):
    meta, header, data = read_trajectory(ns.trajectory)
    ubar = ([float(x) for x in meta["ubar"].split(",")] if "ubar" in meta else None)
    prob = get_problem(meta["problem"], ubar)
    delta, seed = float(meta["delta"]), int(meta["seed"])
    noisy = perturb(prob.f, delta, seed)
    sched = Schedule.power(float(meta["d"]), float(meta["c"]), float(meta["b"]),
                           float(meta["T_max"]))
    col = {h: i for i, h in enumerate(header)}
    U = data[:, [col[f"u{i}"] for i in range(prob.n)]]
    stopped = bool(int(meta.get("stopped", "1")))
    rec = TrajectoryRecord(
        data[:, col["t"]], U, data[:, col["discrepancy"]], data[:, col["a"]],
        data[:, col["h"]], prob.weights, float(meta["target"]), delta,
        t_delta=float(data[-1, col["t"]]) if stopped else None,
        u_at_stop=HVector(U[-1], prob.weights) if stopped else None,
        stopped=stopped, ubar=prob.ubar)
    rep = audit_trajectory(prob.operator, sched, noisy, rec, q=ns.q, slack=ns.slack,
                           y=prob.nearest_solution(prob.ubar))
    out.write(rep.table() + "\n")
    return 0 if rep.passed else 1


def cmd_study(ns, out):
    with open(ns.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    rows = run_study(cfg, ns.output)
    out.write("delta,median_t_delta,median_error,ok_runs\n")
    for d, (t, e, k) in summarize(rows).items():
        out.write(f"{G % d},{G % t},{G % e},{k}\n")
    return 0 if all(r.status == "ok" for r in rows) else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="holderdsm",
                                 description="Regularized flows for monotone equations.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-schedule", help="certify a power schedule")
    _schedule_args(p)
    p.add_argument("--q", type=float, default=0.25)
    p.set_defaults(func=cmd_validate_schedule)

    for name, func, hlp in (("solve", cmd_solve, "run one flow to its stopping time"),):
        p = sub.add_parser(name, help=hlp)
        _problem_args(p)
        _schedule_args(p)
        p.add_argument("--C", type=float, default=1.5)
        p.add_argument("--zeta", type=float, default=0.9)
        p.add_argument("--rtol", type=float, default=1e-8)
        p.add_argument("--atol", type=float, default=1e-12)
        p.add_argument("--output", default=None, help="trajectory CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("path", help="sample the regularized solution path")
    _problem_args(p)
    _schedule_args(p)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--t-min", dest="t_min", type=float, default=1e-2)
    p.add_argument("--t-end", dest="t_end", type=float, default=1e4)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("audit", help="audit a stored trajectory CSV")
    p.add_argument("trajectory")
    p.add_argument("--q", type=float, default=0.25)
    p.add_argument("--slack", type=float, default=0.05)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("study", help="run a delta sweep from a config file")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_study)
    return ap


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns, out)
    except (DSMError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
