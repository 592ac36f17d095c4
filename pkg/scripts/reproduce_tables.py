"""Run every published table and write the rendered text plus JSON to an output dir.

    python3 scripts/reproduce_tables.py --out results/tables

Exits 1 if any cell misses its tolerance (table 2 does; see the notes in README).
"""

import argparse
import json
import sys
from pathlib import Path

from fbvp import tables
from fbvp.cli import atomic_write, dump_json


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/tables")
    ap.add_argument("--tables", default="1,2,3,4")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summary = {}
    for n in (int(t) for t in args.tables.split(",")):
        res = tables.run_table(n)
        text = tables.render(res)
        print(text, end="\n\n")
        atomic_write(out / f"table{n}.txt", text + "\n")
        atomic_write(out / f"table{n}.json", dump_json(res.to_dict()))
        summary[n] = res.passed
    atomic_write(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return 0 if all(summary.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
