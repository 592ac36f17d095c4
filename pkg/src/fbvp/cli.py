"""Command-line entry point: ``fbvp solve|table|sweep|order-check``.

Exit codes: 0 success, 1 tolerance failure, 2 solver error, 3 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import tables
from .analysis import epsilon_sweep, solve_benchmark, step_refinement
from .errors import FbvpError, OrderSaturationError, ToleranceNotMetError
from .groups import LOCATOR_MODES
from .problems import PROBLEM_NAMES, get_problem
from .rk import TABLEAUX, FirstOrderSystem, estimate_order, get_tableau

log = logging.getLogger("fbvp")

EXIT_OK, EXIT_TOLERANCE, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3

METHOD_OF = {
    "linear": "translation",
    "colloid": "translation",
    "nonlinear-tanh": "scaling",
    "viscoplastic-rod": "scaling",
    "linear-nonautonomous": "direct",
}
DEFAULT_STEP = {"translation": -0.05, "scaling": 0.01, "direct": 1e-3}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    problem: str = "linear"
    method: str | None = None
    solver: str = "rk6"
    P: float = 1.0
    c: float = 1.0
    m: float = 1.0
    q: float = 1.5
    eps: float | None = None
    s_star: float = 1.0
    v0: float = 100.0
    tau: float | None = None
    step: float | None = None
    out_csv: str | None = None
    out_json: str | None = None
    locator_mode: str = "from-previous-point"
    max_escalations: int = 12

    def validate(self):
        """Check fields; fix method and step sign with a warning."""
        if self.problem not in PROBLEM_NAMES:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.solver.lower() not in TABLEAUX:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.locator_mode not in LOCATOR_MODES:
            raise ConfigError(f"unknown locator mode {self.locator_mode!r}")
        want = METHOD_OF[self.problem]
        if self.method is None:
            self.method = want
        elif self.method != want:
            warnings.warn(f"{self.problem} is solved by the {want} method, not {self.method}")
            self.method = want
        if self.step is None:
            self.step = DEFAULT_STEP[want]
        if self.step == 0 or not math.isfinite(self.step):
            raise ConfigError("step must be finite and nonzero")
        sign = -1 if want == "translation" else 1
        if math.copysign(1, self.step) != sign:
            warnings.warn(f"step sign flipped to match the {want} method")
            self.step = sign * abs(self.step)
        if self.s_star <= 0 or self.v0 <= 0:
            raise ConfigError("s_star and v0 must be positive")
        return self


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".fbvp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj):
    buf = io.StringIO()
    buf.write("x,u,du_dx\n")
    for x, (u, du) in zip(traj.xs, traj.states):
        buf.write(f"{x:.17g},{u:.17g},{du:.17g}\n")
    return buf.getvalue()


def points_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter", "free_boundary", "missing_slope", "residual", "sup_error"])
    for p in report.points:
        w.writerow([_g(p.parameter), _g(p.free_boundary), _g(p.missing_slope), _g(p.residual),
                    _g(p.sup_error)])
    return buf.getvalue()


def _g(v):
    return "" if v is None else f"{v:.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dump_json(obj):
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def build_problem(cfg: RunConfig):
    if cfg.method == "scaling":
        return get_problem(cfg.problem, P=cfg.P, m=cfg.m, q=cfg.q, tau=cfg.tau)
    return get_problem(cfg.problem, P=cfg.P, c=cfg.c, eps=cfg.eps)


def solve_report(cfg: RunConfig, prob=None, timing=True):
    prob = build_problem(cfg) if prob is None else prob
    tab = get_tableau(cfg.solver)
    t0 = time.perf_counter()
    sol = solve_benchmark(prob, tab, cfg.step, s_star=cfg.s_star, v0=cfg.v0, tau=cfg.tau,
                          locator_mode=cfg.locator_mode, max_escalations=cfg.max_escalations)
    wall = 1e3 * (time.perf_counter() - t0)
    report = {
        "problem": cfg.problem,
        "method": cfg.method,
        "solver": tab.name,
        "step": cfg.step,
        "free_boundary": sol.free_boundary,
        "missing_slope": sol.missing_slope,
        "group_parameter": sol.group_parameter,
    }
    if sol.residual_at_origin is not None:
        report["residual_at_origin"] = sol.residual_at_origin
    if sol.terminal_slope is not None:
        report["terminal_slope"] = sol.terminal_slope
    report["escalations"] = sol.escalations
    report.update(sol.diagnostics)
    if timing:
        report["wall_time_ms"] = wall
    return sol, report


def cmd_solve(args):
    cfg = _config_from_args(args)
    prob = build_problem(cfg)
    try:
        sol, report = solve_report(cfg, prob, timing=not args.compare)
    except ToleranceNotMetError as exc:
        _emit_error(cfg, exc, "tolerance_not_met", terminal_slope=exc.terminal_slope)
        return EXIT_TOLERANCE
    except FbvpError as exc:
        _emit_error(cfg, exc, type(exc).__name__)
        return EXIT_SOLVER
    if cfg.out_csv:
        atomic_write(cfg.out_csv, trajectory_csv(sol.trajectory))
    text = dump_json(report)
    if cfg.out_json:
        atomic_write(cfg.out_json, text)
    sys.stdout.write(text)
    return EXIT_OK


def _emit_error(cfg, exc, kind, **extra):
    report = {"problem": cfg.problem, "method": cfg.method, "solver": cfg.solver,
              "step": cfg.step, "error": kind, "message": str(exc), **extra}
    text = dump_json(report)
    if cfg.out_json:
        atomic_write(cfg.out_json, text)
    sys.stdout.write(text)


def cmd_table(args):
    try:
        result = tables.run_table(args.n)
    except FbvpError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    print(tables.render(result))
    if args.out_json:
        atomic_write(args.out_json, dump_json(result.to_dict()))
    return EXIT_OK if result.passed else EXIT_TOLERANCE


def _parse_ladder(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse ladder {text!r}") from None
    if not vals:
        raise ConfigError("empty ladder")
    return vals


def cmd_sweep(args):
    cfg = _config_from_args(args)
    if cfg.method != "translation":
        raise ConfigError("sweeps run the translation method (linear or colloid problems)")
    ladder = _parse_ladder(args.ladder)
    tab = get_tableau(cfg.solver)
    try:
        if args.kind == "epsilon":
            report = epsilon_sweep(cfg.problem, ladder, tab, cfg.step, P=cfg.P, c=cfg.c,
                                   s_star=cfg.s_star, locator_mode=cfg.locator_mode)
        else:
            eps = cfg.eps if cfg.eps is not None else (-1e-6 if cfg.problem == "colloid" else 1e-6)
            report = step_refinement(cfg.problem, eps, ladder, tab, P=cfg.P, c=cfg.c,
                                     s_star=cfg.s_star, locator_mode=cfg.locator_mode)
    except FbvpError as exc:
        sys.stdout.write(dump_json({"error": type(exc).__name__, "message": str(exc),
                                    "parameter": getattr(exc, "parameter", None)}))
        return EXIT_SOLVER
    text = dump_json(report.to_dict())
    if cfg.out_json:
        atomic_write(cfg.out_json, text)
    if cfg.out_csv:
        atomic_write(cfg.out_csv, points_csv(report))
    sys.stdout.write(text)
    return EXIT_OK


ORDER_LADDER = {"rk4": 0.1, "rk6": 0.1, "rk8": 0.5}


def order_check(names=None, tol=0.3):
    """Empirical order of each tableau on ``y' = y`` over ``[0, 1]``."""
    f = FirstOrderSystem(1, lambda x, y: y)
    out = {}
    for name in names or sorted(TABLEAUX):
        tab = get_tableau(name)
        try:
            order = estimate_order(tab, f, 0.0, [1.0], 1.0, [math.e], ORDER_LADDER[name])
        except OrderSaturationError:
            out[name] = (None, True)
            continue
        out[name] = (order, abs(order - tab.nominal_order) <= tol)
    return out


def cmd_order_check(args):
    names = [args.solver] if args.solver else None
    ok = True
    for name, (order, passed) in order_check(names).items():
        nominal = get_tableau(name).nominal_order
        shown = "saturated" if order is None else f"{order:.3f}"
        print(f"{name}: nominal {nominal}, empirical {shown} [{'PASS' if passed else 'FAIL'}]")
        ok &= passed
    return EXIT_OK if ok else EXIT_TOLERANCE


def _config_from_args(args):
    cfg = RunConfig(
        problem=args.problem, method=args.method, solver=args.solver, P=args.P, c=args.c,
        m=args.m, q=args.q, eps=args.eps, s_star=args.s_star, v0=args.v0, tau=args.tau,
        step=args.step, out_csv=args.out_csv, out_json=args.out_json,
        locator_mode=args.locator_mode, max_escalations=args.max_escalations,
    )
    return cfg.validate()


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "--eps -1e-6" through as a value, not an option
        self._negative_number_matcher = re.compile(r"^-(\d+\.?\d*|\.\d+)(e[-+]?\d+)?$", re.I)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_options(p):
    def opt(name, **kw):
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        p.add_argument(*flags, dest=name, **kw)

    opt("problem", default="linear", choices=PROBLEM_NAMES)
    opt("method", default=None, choices=("translation", "scaling", "direct"))
    opt("solver", default="rk6", choices=sorted(TABLEAUX))
    opt("P", type=float, default=1.0)
    opt("c", type=float, default=1.0)
    opt("m", type=float, default=1.0)
    opt("q", type=float, default=1.5)
    opt("eps", type=float, default=None)
    opt("s_star", type=float, default=1.0)
    opt("v0", type=float, default=100.0)
    opt("tau", type=float, default=None)
    opt("step", type=float, default=None)
    opt("out_csv", default=None)
    opt("out_json", default=None)
    opt("locator_mode", default="from-previous-point", choices=LOCATOR_MODES)
    opt("max_escalations", type=int, default=12)


def build_parser():
    parser = _Parser(prog="fbvp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one free boundary problem")
    _add_run_options(p)
    p.add_argument("--compare", action="store_true",
                   help="omit wall time so repeated runs are byte-identical")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="reproduce a published table")
    p.add_argument("n", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--out_json", "--out-json", dest="out_json", default=None)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("sweep", help="epsilon sweep or grid refinement")
    p.add_argument("kind", choices=("epsilon", "step"))
    p.add_argument("--ladder", required=True, help="comma-separated values")
    _add_run_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("order-check", help="empirical order of the shipped tableaux")
    p.add_argument("--solver", choices=sorted(TABLEAUX), default=None)
    p.set_defaults(func=cmd_order_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (ValueError, FbvpError) as exc:
        # raised while building the problem, before any solve started
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
