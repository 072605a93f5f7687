"""Initialisation robustness of the monitored solver on indefinite problems.

Solves the committed 9x9 fixture from several starting points, then repeats
the experiment on fresh random indefinite matrices of other sizes, and
reports the spread of the final objective values.

    python scripts/indefinite_robustness.py [--sizes 6 14] [--trials 5] [--seed 0]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from gestalt_nash.cognition import ApgConfig, apg_nonconvex
from gestalt_nash.prox import eval_Q, make_problem

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "indefinite_9x9.json"


def starts(dim, rng, n_random):
    yield "zeros", np.zeros(dim)
    yield "half", np.full(dim, 0.5)
    yield "ones", np.ones(dim)
    for k in range(n_random):
        yield f"rand{k}", rng.uniform(0, 1, dim)


def run(p, rng, n_random):
    rows = []
    for label, m0 in starts(p.dim, rng, n_random):
        m, trace = apg_nonconvex(p, ApgConfig(initial_m=m0))
        rows.append((label, eval_Q(p, m), trace.iterations_used, trace.residual, m))
    return rows


def report(title, rows):
    qs = np.array([r[1] for r in rows])
    print(f"-- {title}: spread of Q = {qs.max() - qs.min():.3e}")
    for label, q, its, res, m in rows:
        print(f"   {label:6s} Q={q:14.8f} iters={its:5d} res={res:.1e} "
              f"m=[{' '.join(f'{x:.2f}' for x in m)}]")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="*", default=[6, 14])
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--random-starts", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    data = json.loads(FIXTURE.read_text())
    p = make_problem(np.array(data["lambda"]), data["alpha"])
    report(f"fixture (alpha={data['alpha']:g}, reference Q={data['reference_q']:.8f})",
           run(p, rng, args.random_starts))

    for dim in args.sizes:
        for t in range(args.trials):
            A = rng.normal(0, 60, (dim, dim))
            lam = (A + A.T) / 2 + 40
            q = make_problem(lam, data["alpha"])
            report(f"random dim={dim} trial={t}", run(q, rng, args.random_starts))


if __name__ == "__main__":
    main()
