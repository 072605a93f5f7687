"""Generate the committed indefinite cognition fixture.

Draws random symmetric indefinite 9x9 matrices until one gives a sparse,
nontrivial solution with alpha = 100 that the monitored solver reaches from
every start in a multi-start sweep, and whose value matches the global
minimum found by exhaustive active-set enumeration.

    python scripts/make_indefinite_fixture.py [--out tests/fixtures/indefinite_9x9.json]
"""

import argparse
import itertools
import json
from pathlib import Path

import numpy as np

from gestalt_nash.cognition import ApgConfig, apg_nonconvex
from gestalt_nash.prox import eval_Q, make_problem

ALPHA = 100.0
DIM = 9


def global_min(lam, alpha):
    """Exhaustive search over {0, 1, free}^n active sets."""
    n = lam.shape[0]
    best_q, best_m = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        m = np.where(pattern == 1, 1.0, 0.0)
        free = np.nonzero(pattern == 2)[0]
        if free.size:
            fixed = np.nonzero(pattern != 2)[0]
            A = lam[np.ix_(free, free)]
            # stationarity on free coords (interior of [0,1], so |m| = m)
            rhs = lam[free].sum(axis=1) - alpha - lam[np.ix_(free, fixed)] @ m[fixed]
            try:
                m[free] = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.any(m[free] < 0) or np.any(m[free] > 1):
                continue
        q = 0.5 * m @ lam @ m - lam.sum(axis=0) @ m + alpha * m.sum()
        if q < best_q:
            best_q, best_m = q, m
    return best_q, best_m


def candidate(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(0.0, 60.0, size=(DIM, DIM))
    lam = 0.5 * (A + A.T) + 40.0
    eig = np.linalg.eigvalsh(lam)
    if not (eig[0] < 0 < eig[-1]):
        return None
    return lam


def check(lam, n_starts=30, seed=0):
    p = make_problem(lam, ALPHA)
    cfg = ApgConfig(tol=1e-12, max_iters=200_000)
    rng = np.random.default_rng(seed)
    starts = [np.zeros(DIM), np.full(DIM, 0.5), np.ones(DIM)]
    starts += [rng.uniform(0, 1, DIM) for _ in range(n_starts)]
    sols = []
    for s in starts:
        cfg.initial_m = s
        m, tr = apg_nonconvex(p, cfg)
        sols.append((eval_Q(p, m), m, tr.converged))
    return p, sols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("tests/fixtures/indefinite_9x9.json"))
    ap.add_argument("--first-seed", type=int, default=0)
    args = ap.parse_args()

    for seed in itertools.count(args.first_seed):
        lam = candidate(seed)
        if lam is None:
            continue
        p, sols = check(lam)
        qs = np.array([q for q, _, _ in sols])
        m_ref = sols[0][1]
        support = np.sum(m_ref > 1e-6)
        fractional = np.sum((m_ref > 1e-6) & (m_ref < 1 - 1e-6))
        if not all(c for _, _, c in sols) or np.ptp(qs) > 1e-9:
            continue
        if not (2 <= support <= 6 and fractional >= 1):
            continue
        q_glob, m_glob = global_min(lam, ALPHA)
        if abs(q_glob - qs[0]) > 1e-7:
            continue
        break

    payload = {
        "description": "random symmetric indefinite 9x9 matrix for the monitored solver",
        "seed": seed,
        "alpha": ALPHA,
        "lambda": lam.tolist(),
        "eigenvalues": np.linalg.eigvalsh(lam).tolist(),
        "reference_m": m_ref.tolist(),
        "reference_q": float(qs[0]),
        "enumerated_global_q": float(q_glob),
        "enumerated_global_m": m_glob.tolist(),
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"seed {seed}: m = {np.round(m_ref, 4)}  Q = {qs[0]:.10f}  -> {args.out}")


if __name__ == "__main__":
    main()
