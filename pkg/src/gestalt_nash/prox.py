"""Proximal building blocks for the cognition problem of one agent.

The agent minimises over ``m`` in the unit box

    Q(m) = 1/2 m' L m - e' L m + alpha * ||m||_1

split into a smooth part ``f1`` (the quadratic), an L1 part and the box
indicator. Coordinates are the N - 1 other agents, listed in ``index_map``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace

import numpy as np

from .game import SecurityGame

LIP_FLOOR = 1e-12
STEP_SCALE = 0.9
BOX_SLACK = 1e-12

# Q outside the box. A finite sentinel keeps comparisons total.
Q_INFEASIBLE = sys.float_info.max


def is_infeasible(q: float) -> bool:
    return q >= Q_INFEASIBLE


@dataclass(frozen=True)
class ProxProblem:
    lambda_mat: np.ndarray
    alpha: float
    lip: float
    step_x: float
    step_y: float
    owner: int = 0
    index_map: tuple = ()
    # w with lambda_mat == outer(w, w); set for game-built problems
    factor: np.ndarray | None = None

    def __post_init__(self):
        L = self.lambda_mat
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("lambda_mat must be square")
        if not np.allclose(L, L.T, rtol=0, atol=1e-12 * max(1.0, np.abs(L).max(initial=0))):
            raise ValueError("lambda_mat must be symmetric")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not self.lip > 0:
            raise ValueError("lip must be positive")
        for name in ("step_x", "step_y"):
            s = getattr(self, name)
            if not 0 < s < 1.0 / self.lip:
                raise ValueError(f"{name} must lie in (0, 1/lip)")

    @property
    def dim(self) -> int:
        return self.lambda_mat.shape[0]

    def with_alpha(self, alpha: float) -> "ProxProblem":
        return replace(self, alpha=float(alpha))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self.factor is not None:
            return self.factor * (self.factor @ x)
        return self.lambda_mat @ x


def _steps(lip):
    s = STEP_SCALE / lip
    return s, s


def build_lambda(game: SecurityGame, i: int, u, alpha: float = 0.0) -> ProxProblem:
    """Cognition problem of agent ``i`` given investments ``u``.

    The quadratic matrix is ``v v' / R_ii`` with ``v_j = R_ij u_j``, so it is
    rank one and its spectral norm is ``||v||^2 / R_ii``.
    """
    if not 0 <= i < game.n_agents:
        raise IndexError(f"agent index {i} out of range")
    u = np.asarray(u, dtype=float)
    others = tuple(j for j in range(game.n_agents) if j != i)
    idx = list(others)
    Rii = game.influence[i, i]
    v = game.influence[i, idx] * u[idx]
    w = v / np.sqrt(Rii)
    lam = np.outer(w, w)
    lip = max(float(w @ w), LIP_FLOOR)
    sx, sy = _steps(lip)
    return ProxProblem(lam, float(alpha), lip, sx, sy, owner=i, index_map=others, factor=w)


def make_problem(lambda_mat, alpha: float, owner: int = 0, index_map=None) -> ProxProblem:
    """Problem from an arbitrary symmetric matrix (possibly indefinite)."""
    lam = np.array(lambda_mat, dtype=float)
    lam = 0.5 * (lam + lam.T)
    lip = max(float(np.max(np.abs(np.linalg.eigvalsh(lam)), initial=0.0)), LIP_FLOOR)
    sx, sy = _steps(lip)
    if index_map is None:
        index_map = tuple(range(lam.shape[0]))
    return ProxProblem(lam, float(alpha), lip, sx, sy, owner=owner, index_map=tuple(index_map))


def is_psd(p: ProxProblem, rtol: float = 1e-12) -> bool:
    if p.factor is not None:
        return True
    if p.dim == 0:
        return True
    eig = np.linalg.eigvalsh(p.lambda_mat)
    return eig[0] >= -rtol * max(1.0, np.abs(eig).max())


def f1(p: ProxProblem, m) -> float:
    m = np.asarray(m, dtype=float)
    lm = p.matvec(m)
    return 0.5 * m @ lm - lm.sum()


def grad_f1(p: ProxProblem, m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (p.dim,):
        raise ValueError(f"expected vector of length {p.dim}, got {m.shape}")
    return p.matvec(m - 1.0)


def soft_threshold(x, t: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.maximum(x - t, 0.0) - np.maximum(-x - t, 0.0)


def proj_box(x) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def prox_f2_plus_f3(x, t: float) -> np.ndarray:
    """Prox of ``t * ||.||_1 + box indicator``: threshold, then clamp."""
    return proj_box(soft_threshold(x, t))


def in_box(m, slack: float = BOX_SLACK) -> bool:
    m = np.asarray(m)
    return bool(np.all(m >= -slack) and np.all(m <= 1.0 + slack))


def eval_Q(p: ProxProblem, m) -> float:
    m = np.asarray(m, dtype=float)
    if not in_box(m):
        return Q_INFEASIBLE
    return f1(p, m) + p.alpha * np.abs(m).sum()


def prox_grad_step(p: ProxProblem, x, step: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return prox_f2_plus_f3(x - step * grad_f1(p, x), step * p.alpha)


def q_diff(p: ProxProblem, a, b) -> float:
    """``Q(a) - Q(b)`` evaluated from the difference ``a - b``.

    Exact algebraic rewrite of the two evaluations; unlike subtracting two
    large nearly equal values, its rounding error scales with ``|a - b|``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    fa, fb = in_box(a), in_box(b)
    if not (fa and fb):
        return eval_Q(p, a) - eval_Q(p, b) if fa or fb else 0.0
    d = a - b
    return 0.5 * d @ p.matvec(a + b - 2.0) + p.alpha * np.sum(np.abs(a) - np.abs(b))
