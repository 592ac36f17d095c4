"""Epsilon sweep and grid refinement for the linear benchmark, plus the
closed-form convergence check for both exact benchmarks.

    python3 scripts/convergence_study.py --out results/convergence
"""

import argparse
import sys
from pathlib import Path

from fbvp.analysis import closed_form_sweep, epsilon_sweep, step_refinement
from fbvp.cli import atomic_write, dump_json, points_csv
from fbvp.rk import get_tableau

EPS_LADDER = [10.0**-k for k in range(1, 10)]
STEP_LADDER = [0.1 / 2**k for k in range(6)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--solver", default="rk6")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tab = get_tableau(args.solver)

    runs = {
        "epsilon_linear": epsilon_sweep("linear", EPS_LADDER, tab, -1e-3),
        "step_linear": step_refinement("linear", 1e-6, STEP_LADDER, tab),
        "closed_form_linear": closed_form_sweep("linear", [1e-2, 1e-3, 1e-4]),
        "closed_form_tanh": closed_form_sweep("nonlinear-tanh", [1e-2, 1e-3, 1e-4]),
    }
    for name, rep in runs.items():
        atomic_write(out / f"{name}.json", dump_json(rep.to_dict()))
        atomic_write(out / f"{name}.csv", points_csv(rep))
        print(f"{name:20s} rate={rep.estimated_rate}  K={rep.estimated_K}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
