"""Error norms, epsilon sweeps, grid refinement and rate fits."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import FbvpError
from .groups import FROM_PREVIOUS, FbfSolution, solve_scaling, solve_translation
from .problems import BenchmarkProblem, ExactSolution, get_problem, linear_exact, nonlinear_exact
from .rk import ButcherTableau, integrate_to

ERROR_FLOOR = 1e2 * np.finfo(float).eps


@dataclass(frozen=True)
class SweepPoint:
    parameter: float
    free_boundary: float
    missing_slope: float
    residual: float | None
    sup_error: float | None = None


@dataclass(frozen=True)
class ConvergenceReport:
    sweep_variable: str  # epsilon | step
    points: tuple
    estimated_rate: float | None = None
    estimated_K: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.points:
            raise ValueError("a report needs at least one point")
        params = [p.parameter for p in self.points]
        d = np.diff(params)
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep parameter values must be strictly monotone")

    def to_dict(self):
        return {
            "sweep_variable": self.sweep_variable,
            "estimated_rate": self.estimated_rate,
            "estimated_K": self.estimated_K,
            **self.meta,
            "points": [asdict(p) for p in self.points],
        }


class SweepError(FbvpError):
    def __init__(self, message, parameter):
        super().__init__(message)
        self.parameter = parameter


def sweep_workers(n_tasks):
    env = os.environ.get("FBVP_THREADS")
    if env is None:
        return min(n_tasks, os.cpu_count() or 1)
    cap = int(env)
    return 1 if cap <= 0 else min(cap, n_tasks)


def _map(fn, items):
    workers = sweep_workers(len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fit_rate(params, errors):
    """Least-squares slope of ``log(error)`` against ``log(param)``.

    Points at the round-off floor are dropped; ``None`` with fewer than two
    usable points.
    """
    pairs = [(p, e) for p, e in zip(params, errors)
             if e is not None and e >= ERROR_FLOOR and p != 0]
    if len(pairs) < 2:
        return None
    lp = np.log([abs(p) for p, _ in pairs])
    le = np.log([e for _, e in pairs])
    slope, _ = np.polyfit(lp, le, 1)
    return float(slope)


def sup_norm_error(sol: FbfSolution, exact: ExactSolution) -> float:
    """Max over the trajectory grid of ``|u_computed - u_exact|``."""
    traj = sol.trajectory
    return float(np.max(np.abs(traj.u - exact.u(traj.xs))))


def solve_benchmark(problem: BenchmarkProblem, tab: ButcherTableau, h: float, *, s_star=1.0,
                    v0=100.0, tau=None, locator_mode=FROM_PREVIOUS, max_escalations=12,
                    factor=10.0) -> FbfSolution:
    """Solve a catalog problem with the method its invariance group allows."""
    if problem.kind == "translation":
        sol = solve_translation(problem.fbf, s_star, tab, h, locator_mode=locator_mode)
    elif problem.kind == "scaling":
        tau = problem.epsilon if tau is None else tau
        sol = solve_scaling(problem.fbf, s_star, v0, tau, tab, h, max_escalations, factor)
    elif problem.kind == "direct":
        sol = _solve_direct(problem, tab, h)
    else:
        raise ValueError(f"unknown problem kind {problem.kind!r}")
    if problem.first_integral is not None:
        traj = sol.trajectory
        values = problem.first_integral(traj.u, traj.du_dx)
        sol.diagnostics["first_integral_drift"] = float(
            np.max(np.abs(values - problem.epsilon**2))
        )
    return sol


def _solve_direct(problem, tab, h):
    # no group acts on the non-autonomous equation: integrate the IVP from the
    # exact boundary data at x = 0 up to the exact free boundary
    exact = problem.exact
    if exact is None:
        raise ValueError("direct integration needs the closed-form free boundary")
    h = abs(h)
    traj = integrate_to(tab, problem.system, 0.0, [0.0, exact.missing_slope], exact.x_eps, h)
    u_end, du_end = traj.states[-1]
    return FbfSolution(
        free_boundary=exact.x_eps,
        missing_slope=exact.missing_slope,
        group_parameter=math.nan,
        trajectory=traj,
        terminal_slope=float(du_end),
        solver_name=tab.name,
        step_size=h,
        diagnostics={"terminal_residual": abs(float(u_end) - exact.boundary_value)},
    )


def epsilon_sweep(family: str, eps_ladder, tab: ButcherTableau, h: float, *, P=1.0, c=1.0,
                  s_star=1.0, locator_mode=FROM_PREVIOUS) -> ConvergenceReport:
    """One translation solve per epsilon; sup errors against the BVP solution."""
    eps_ladder = [float(e) for e in eps_ladder]
    if any(abs(e) > 0.5 for e in eps_ladder):
        raise ValueError("all |eps| must be at most 0.5")
    mags = np.abs(eps_ladder)
    if len(mags) > 1 and not np.all(np.diff(mags) < 0):
        raise ValueError("epsilon ladder must be strictly decreasing in magnitude")

    def run(eps):
        prob = get_problem(family, P=P, c=c, eps=eps)
        try:
            sol = solve_benchmark(prob, tab, h, s_star=s_star, locator_mode=locator_mode)
        except FbvpError as exc:
            raise SweepError(f"solve failed at eps={eps!r}: {exc}", eps) from exc
        sup = sup_norm_error(sol, prob.limit) if prob.limit is not None else None
        residual = sol.residual_at_origin if sol.residual_at_origin is not None else sol.terminal_slope
        return SweepPoint(eps, sol.free_boundary, sol.missing_slope, residual, sup)

    points = tuple(_map(run, eps_ladder))
    return _epsilon_report(points, {"family": family, "solver": tab.name, "step": h})


def _epsilon_report(points, meta):
    sups = [p.sup_error for p in points]
    if all(s is not None for s in sups):
        rate = fit_rate([p.parameter for p in points], sups) if len(points) > 1 else None
        K = max(s / abs(p.parameter) for s, p in zip(sups, points))
    else:
        rate, K = None, None
    return ConvergenceReport("epsilon", points, rate, K, meta)


def closed_form_sweep(family: str, eps_ladder, *, P=1.0, n_grid=4001) -> ConvergenceReport:
    """Free boundary convergence straight from the closed forms, no integration."""
    exact_of = {"linear": linear_exact, "nonlinear-tanh": nonlinear_exact}[family]
    limit = exact_of(P, 0.0)
    points = []
    for eps in eps_ladder:
        ex = exact_of(P, float(eps))
        xs = np.linspace(0.0, ex.x_eps, n_grid)
        sup = float(np.max(np.abs(ex.u(xs) - limit.u(xs))))
        points.append(SweepPoint(float(eps), ex.x_eps, ex.missing_slope, 0.0, sup))
    return _epsilon_report(tuple(points), {"family": family, "P": P})


def step_refinement(family: str, eps: float, steps, tab: ButcherTableau, *, P=1.0, c=1.0,
                    s_star=1.0, locator_mode=FROM_PREVIOUS) -> ConvergenceReport:
    """One translation solve per step; rate fitted on the origin residual."""
    steps = [float(h) for h in steps]

    def run(h):
        prob = get_problem(family, P=P, c=c, eps=eps)
        step = -abs(h) if prob.kind == "translation" else abs(h)
        try:
            sol = solve_benchmark(prob, tab, step, s_star=s_star, locator_mode=locator_mode)
        except FbvpError as exc:
            raise SweepError(f"solve failed at step={h!r}: {exc}", h) from exc
        sup = sup_norm_error(sol, prob.exact) if prob.exact is not None else None
        residual = sol.residual_at_origin if sol.residual_at_origin is not None else sol.terminal_slope
        return SweepPoint(abs(h), sol.free_boundary, sol.missing_slope, residual, sup)

    points = tuple(_map(run, steps))
    rate = fit_rate([p.parameter for p in points], [p.residual for p in points])
    return ConvergenceReport("step", points, rate, None,
                             {"family": family, "solver": tab.name, "eps": eps})
