"""Command-line entry point: every computation writes a CSV or JSON file with a provenance header."""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, excursions, greens, hitting, hyperfun, simulate
from .laplinv import InversionConfig, InversionInstability, invert_detailed
from .wfmodel import DomainError, ToleranceUnreachable, make_theta

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

FIGURE_THETAS = ((0.3, 0.3), (0.3, 0.7), (0.7, 0.3))
PATH_BATCH = 2000


class ConfigError(ValueError):
    pass


def parse_grid(text: str) -> list:
    """'a,b,c' lists values; 'start:stop:num' is an inclusive linspace."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}") from exc


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(records: list, columns: list, config: dict, fmt_name: str) -> str:
    provenance = {"package": "wfexcursions", "version": __version__, "config": config}
    if fmt_name == "json":
        body = {
            "provenance": provenance,
            "columns": columns,
            "records": [{c: r[c] for c in columns} for r in records],
        }
        return json.dumps(body, sort_keys=True, indent=1, default=float) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(provenance, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("WF_EXCURSIONS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("WF_EXCURSIONS_THREADS must be an integer") from exc
    return 1


def _theta_list(args):
    if args.theta1 is None and args.theta2 is None:
        return None
    return [make_theta(args.theta1 if args.theta1 is not None else 0.3, args.theta2 if args.theta2 is not None else 0.7)]


def _theta(args):
    found = _theta_list(args)
    return found[0] if found else make_theta(0.3, 0.7)


def base_config(args, **extra) -> dict:
    cfg = {"command": args.command, "format": args.format, "tol": args.tol}
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------


def cmd_eigen(args):
    lam = args.lam if args.lam is not None else 0.1
    xs = parse_grid(args.x_grid or "0:1:21")
    thetas = _theta_list(args) or [make_theta(*p) for p in FIGURE_THETAS]
    records = []
    for th in thetas:
        e = hitting.eigen_pair(th, lam)
        minus = hitting.phi(e, "minus", np.array(xs))
        plus = hitting.phi(e, "plus", np.array(xs))
        for x, m, p in zip(xs, minus, plus):
            records.append(dict(x=x, phi_minus=m, phi_plus=p, theta1=th.theta1, theta2=th.theta2, **{"lambda": lam}))
    cfg = base_config(args, **{"lambda": lam}, x_grid=xs, thetas=[[t.theta1, t.theta2] for t in thetas])
    return records, ["x", "phi_minus", "phi_plus", "theta1", "theta2", "lambda"], cfg


def cmd_entrance(args):
    th = _theta(args)
    ts = parse_grid(args.t_grid or "0.1,0.5,1,5")
    xs = parse_grid(args.x_grid or "0.025:0.975:39")
    tol = args.tol if args.tol is not None else 1e-2
    cfg_inv = InversionConfig(consistency_tol=tol)
    records = []
    for t in ts:
        for x in xs:
            res = invert_detailed(lambda lam: excursions.entrance_law_laplace(th, lam, args.boundary, x), t, cfg_inv)
            ok = res.discrepancy <= tol * abs(res.value)
            records.append(dict(t=t, x=x, density=res.value, consistency_flag="ok" if ok else "unstable"))
    cfg = base_config(args, theta1=th.theta1, theta2=th.theta2, boundary=args.boundary, t_grid=ts, x_grid=xs,
                      consistency_tol=tol, inversion="gaver_stehfest", order=cfg_inv.order)
    return records, ["t", "x", "density", "consistency_flag"], cfg


def _verify_rows(th, tol_scale=1.0):
    """(check, point, discrepancy, tolerance) for one parameter pair."""
    rows = []
    for x, y in ((0.2, 0.5), (0.5, 0.5), (0.8, 0.2)):
        c = greens.green(th, 1.0, x, y).value
        j = greens.green(th, 1.0, x, y, "jacobi_series", tol=1.0).value
        p = greens.green(th, 1.0, x, y, "product_form", tol=1.0).value
        rows.append(("green_triform", f"x={x};y={y};lambda=1", max(abs(j / c - 1), abs(p / c - 1)), 1e-6))
    f = lambda y: y * (1 - y)  # noqa: E731
    for x, lam in ((0.3, 0.7), (0.6, 2.0)):
        r01 = greens.resolvent(th, lam, f, x, kind="killed01", order="0_then_1").value
        r10 = greens.resolvent(th, lam, f, x, kind="killed01", order="1_then_0").value
        rows.append(("killing_order", f"x={x};lambda={lam}", abs(r01 / r10 - 1), 1e-8))
    for lam in (0.5, 5.0):
        tm = excursions.total_mass(th, lam)
        phi = excursions.phi_functionals(th, lam)
        rows.append(("complementarity", f"lambda={lam}", abs((excursions.switch_rate(th) + phi.phi00) / tm - 1), 1e-8))
    for lam in (1.0,):
        mass = lam * excursions.entrance_mass(th, lam)
        target = excursions.total_mass(th, lam) - excursions.absorbed_mass_rate(th, lam)
        rows.append(("entrance_mass_before_absorption", f"lambda={lam}", abs(mass / target - 1), 1e-5))
    slope = excursions.hausdorff_index(th, 0)
    rows.append(("hausdorff_index_0", "lambda=1e1..1e5", abs(slope - (1 - th.theta1)), 0.05))
    return rows


def cmd_verify(args):
    thetas = _theta_list(args) or [make_theta(a, b) for a in (0.3, 0.5, 0.7) for b in (0.3, 0.5, 0.7)]
    ctx = hyperfun.perturbed_gamma(args.perturb_gamma) if args.perturb_gamma else contextlib.nullcontext()
    records = []
    with ctx:
        for th in thetas:
            for check, point, disc, tol in _verify_rows(th):
                records.append(dict(check=check, theta1=th.theta1, theta2=th.theta2, point=point,
                                    discrepancy=disc, tolerance=tol, passed=bool(disc <= tol)))
    cfg = base_config(args, thetas=[[t.theta1, t.theta2] for t in thetas], perturb_gamma=args.perturb_gamma)
    return records, ["check", "theta1", "theta2", "point", "discrepancy", "tolerance", "passed"], cfg


def _batched(estimator, n_paths, seed, threads):
    """Run an estimator over fixed batches with spawned streams and pool the results.

    Batches and their streams depend only on n_paths and seed, so the pooled
    value does not depend on the thread count.
    """
    sizes = [PATH_BATCH] * (n_paths // PATH_BATCH) + ([n_paths % PATH_BATCH] if n_paths % PATH_BATCH else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(n, np.random.default_rng(s)) for n, s in zip(sizes, streams)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda job: estimator(*job), jobs))
    else:
        results = [estimator(*job) for job in jobs]
    total = sum(r.n_paths for r in results)
    mean = sum(r.value * r.n_paths for r in results) / total
    # pooled second moment from the per-batch standard errors
    second = sum((r.std_error**2 * r.n_paths * (r.n_paths - 1) if r.n_paths > 1 else 0.0) + r.n_paths * r.value**2
                 for r in results) / total
    return mean, math.sqrt(max(second - mean * mean, 0.0) / total), total


def cmd_simulate(args):
    th = _theta(args)
    seed = args.seed if args.seed is not None else 0
    threads = _threads(args)
    dt = args.dt
    if args.estimate == "paths":
        ts = parse_grid(args.t_grid or "0:1:11")
        states = simulate.simulate_paths(th, args.x0, ts, simulate.make_rng(seed), args.n_paths)
        records = [dict(path=i, t=t, x=states[i, j]) for i in range(args.n_paths) for j, t in enumerate(ts)]
        cols = ["path", "t", "x"]
        extra = dict(t_grid=ts)
    elif args.estimate == "exit":
        mean, se, n = _batched(
            lambda n, rng: simulate.estimate_exit_prob(th, args.x0, args.eps, dt, n, rng), args.n_paths, seed, threads
        )
        records = [dict(estimate="exit_prob", value=mean, std_error=se, n_paths=n,
                        analytic=hitting.exit_prob(th, args.x0))]
        cols = ["estimate", "value", "std_error", "n_paths", "analytic"]
        extra = dict(eps=args.eps)
    else:
        lam = args.lam if args.lam is not None else 1.0
        mean, se, n = _batched(
            lambda n, rng: simulate.estimate_hitting_laplace(th, args.x0, args.y, lam, dt, n, rng),
            args.n_paths, seed, threads,
        )
        records = [dict(estimate="hitting_laplace", value=mean, std_error=se, n_paths=n,
                        analytic=hitting.hitting_laplace(th, lam, args.x0, args.y))]
        cols = ["estimate", "value", "std_error", "n_paths", "analytic"]
        extra = {"y": args.y, "lambda": lam}
    cfg = base_config(args, theta1=th.theta1, theta2=th.theta2, seed=seed, x0=args.x0, dt=dt,
                      n_paths=args.n_paths, estimate=args.estimate, **extra)
    return records, cols, cfg


def cmd_hausdorff(args):
    thetas = _theta_list(args) or [make_theta(0.3, 0.5)]
    grid = parse_grid(args.lambda_grid) if args.lambda_grid else list(excursions.default_hausdorff_grid())
    records = []
    for th in thetas:
        for b in (0, 1):
            slope = excursions.hausdorff_index(th, b, grid)
            expected = 1 - (th.theta1 if b == 0 else th.theta2)
            records.append(dict(theta1=th.theta1, theta2=th.theta2, boundary=b, slope=slope, expected=expected))
    cfg = base_config(args, thetas=[[t.theta1, t.theta2] for t in thetas], lambda_grid=grid)
    return records, ["theta1", "theta2", "boundary", "slope", "expected"], cfg


def cmd_green(args):
    th = _theta(args)
    lams = parse_grid(args.lambda_grid) if args.lambda_grid else [args.lam if args.lam is not None else 1.0]
    xs = parse_grid(args.x_grid or "0.2,0.5,0.8")
    tol = args.tol if args.tol is not None else 1e-8
    records = []
    for lam in lams:
        for x in xs:
            for y in xs:
                vals = {rep: greens.green(th, lam, x, y, rep, tol=tol).value for rep in greens.REPRESENTATIONS}
                records.append(dict(x=x, y=y, **{"lambda": lam}, **vals))
    cfg = base_config(args, theta1=th.theta1, theta2=th.theta2, lambda_grid=lams, x_grid=xs)
    return records, ["x", "y", "lambda", *greens.REPRESENTATIONS], cfg


TEST_FUNCTIONS = {
    "one": lambda y: np.ones_like(y),
    "identity": lambda y: y,
    "quadratic": lambda y: y * (1 - y),
}


def cmd_resolvent(args):
    th = _theta(args)
    lams = parse_grid(args.lambda_grid) if args.lambda_grid else [args.lam if args.lam is not None else 1.0]
    xs = parse_grid(args.x_grid or "0:1:11")
    f = TEST_FUNCTIONS[args.function]
    records = []
    for lam in lams:
        for x in xs:
            v = greens.resolvent(th, lam, f, x, kind=args.kind).value
            records.append(dict(x=x, **{"lambda": lam}, kind=args.kind, function=args.function, value=v))
    cfg = base_config(args, theta1=th.theta1, theta2=th.theta2, lambda_grid=lams, x_grid=xs)
    return records, ["x", "lambda", "kind", "function", "value"], cfg


COMMANDS = {
    "eigen": cmd_eigen,
    "entrance": cmd_entrance,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "hausdorff": cmd_hausdorff,
    "green": cmd_green,
    "resolvent": cmd_resolvent,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta1", type=float)
    common.add_argument("--theta2", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--lambda-grid")
    common.add_argument("--t-grid")
    common.add_argument("--x-grid")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")
    common.add_argument("--threads", type=int)

    parser = argparse.ArgumentParser(prog="wf-excursions", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eigen", parents=[common], help="monotone eigenfunctions on an x-grid")
    p = sub.add_parser("entrance", parents=[common], help="entrance-law densities in time")
    p.add_argument("--boundary", type=int, choices=(0, 1), default=0)
    p = sub.add_parser("verify", parents=[common], help="run the identity checks")
    p.add_argument("--perturb-gamma", type=float, default=0.0, help=argparse.SUPPRESS)
    p = sub.add_parser("simulate", parents=[common], help="paths or Monte Carlo estimates")
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--y", type=float, default=0.8)
    p.add_argument("--n-paths", type=int, default=10)
    p.add_argument("--dt", type=float, default=simulate.DEFAULT_DT)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--estimate", choices=("paths", "exit", "hitting"), default="paths")
    sub.add_parser("hausdorff", parents=[common], help="power-law index of phi at both boundaries")
    sub.add_parser("green", parents=[common], help="Green's function in three forms")
    p = sub.add_parser("resolvent", parents=[common], help="resolvent of a test function")
    p.add_argument("--function", choices=sorted(TEST_FUNCTIONS), default="identity")
    p.add_argument("--kind", choices=greens.RESOLVENT_KINDS, default="unkilled")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        records, columns, cfg = COMMANDS[args.command](args)
    except (ConfigError, DomainError, hyperfun.ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ToleranceUnreachable, InversionInstability, hyperfun.ConvergenceError, simulate.BudgetExceeded) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(render(records, columns, cfg, args.format), args.out)
    if args.command == "verify" and not all(r["passed"] for r in records):
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
