"""Run the four built-in scenarios and print their equilibria.

    python scripts/run_case_studies.py [--threads 4] [--out runs/]

With ``--out`` each scenario's report is written to ``<out>/<name>/``.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from gestalt_nash.report import emit_report, run_scenario
from gestalt_nash.scenarios import BUILTINS, builtin_config, resolve_config


def fmt_row(values, width=7):
    return " ".join(f"{v:{width}.4f}" for v in values)


def show(name, report):
    o = report.outcome
    ph = report.phenomena.as_dict()
    print(f"== {name}: {o.rounds_used} rounds, converged={o.converged}, "
          f"verified={report.verification.ok}, {report.wall_time:.2f}s")
    print("   u*   " + fmt_row(o.u_star))
    print("   rbp  " + fmt_row(o.rbp))
    print("   m* (row i = attention of agent i)")
    for i, row in enumerate(o.m_star):
        print(f"   {i + 1:3d}  " + " ".join(f"{x:5.2f}" for x in row))
    print(f"   critical set: {ph['critical_set']}")
    if ph["partisan_group"] is not None:
        print(f"   partisanship toward {ph['partisan_group']}")
    if ph["fill_set"] is not None:
        print(f"   fill set vs baseline budget: {ph['fill_set']}")
    print()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", type=Path)
    ap.add_argument("--only", choices=sorted(BUILTINS), action="append")
    args = ap.parse_args(argv)

    np.set_printoptions(precision=4, suppress=True)
    t0 = time.perf_counter()
    for name in args.only or sorted(BUILTINS):
        report = run_scenario(resolve_config(builtin_config(name)), threads=args.threads)
        show(name, report)
        if args.out is not None:
            emit_report(report, args.out / name, trace=True)
    print(f"total {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
