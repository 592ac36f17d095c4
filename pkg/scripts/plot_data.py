"""Write plot-ready CSVs for the solution figures (no rendering).

    python3 scripts/plot_data.py --out results/plot_data

Files:
  bvp_linear_P{P}.csv, bvp_tanh_P{P}.csv   closed-form BVP solutions, P in {0.1, 1, 10}
  fbf_linear.csv, fbf_tanh.csv             FBF closed forms for a few eps next to the BVP
  translation_grid.csv                     computed linear FBF (step -0.05) incl. the short last step
  scaling_rescaled.csv                     computed tanh FBF after rescaling (v0=100)
  rod.csv                                  computed rod solution vs its compact-support closed form
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fbvp.analysis import solve_benchmark
from fbvp.cli import atomic_write, trajectory_csv
from fbvp.problems import get_problem, linear_exact, nonlinear_exact, rod_exact
from fbvp.rk import get_tableau


@dataclass
class PlotConfig:
    out: str = "results/plot_data"
    solver: str = "rk6"
    x_max: float = 10.0
    n: int = 401
    eps_values: tuple = (1e-1, 1e-2, 1e-3)


def _table(columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(f"{v:.17g}" for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_bvp(cfg, out):
    for P in (0.1, 1.0, 10.0):
        xs = np.linspace(0.0, cfg.x_max, cfg.n)
        for tag, fam in (("linear", linear_exact), ("tanh", nonlinear_exact)):
            ex = fam(P)
            atomic_write(out / f"bvp_{tag}_P{P:g}.csv",
                         _table(("x", "u", "du_dx"), zip(xs, ex.u(xs), ex.du_dx(xs))))


def write_fbf(cfg, out):
    for tag, fam in (("linear", linear_exact), ("tanh", nonlinear_exact)):
        limit = fam(1.0)
        rows = []
        for eps in cfg.eps_values:
            ex = fam(1.0, eps)
            for x in np.linspace(0.0, ex.x_eps, cfg.n):
                rows.append((eps, x, float(ex.u(x)), float(limit.u(x))))
        atomic_write(out / f"fbf_{tag}.csv", _table(("eps", "x", "u_eps", "u"), rows))


def write_computed(cfg, out):
    tab = get_tableau(cfg.solver)
    sol = solve_benchmark(get_problem("linear", eps=1e-6), tab, -0.05)
    atomic_write(out / "translation_grid.csv", trajectory_csv(sol.trajectory))
    sol = solve_benchmark(get_problem("nonlinear-tanh", tau=1e-6), tab, 0.01, v0=100.0)
    atomic_write(out / "scaling_rescaled.csv", trajectory_csv(sol.trajectory))
    sol = solve_benchmark(get_problem("viscoplastic-rod", tau=1e-4), tab, 0.01, v0=10.0)
    ex = rod_exact(1.0)
    xs = sol.trajectory.xs
    atomic_write(out / "rod.csv", _table(("x", "u", "du_dx", "u_closed_form"),
                                         zip(xs, sol.trajectory.u, sol.trajectory.du_dx, ex.u(xs))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=PlotConfig.out)
    ap.add_argument("--solver", default=PlotConfig.solver)
    args = ap.parse_args(argv)
    cfg = PlotConfig(out=args.out, solver=args.solver)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_bvp(cfg, out)
    write_fbf(cfg, out)
    write_computed(cfg, out)
    print(f"wrote {len(list(out.glob('*.csv')))} files to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
