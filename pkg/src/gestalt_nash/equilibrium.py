"""Investment layer: rational and bounded-rational Nash equilibria."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .game import SecurityGame

METHODS = ("gauss-seidel", "jacobi", "direct")


class SingularSystemError(np.linalg.LinAlgError):
    pass


@dataclass
class BrSolverConfig:
    method: str = "direct"
    tol: float = 1e-10
    max_iters: int = 10_000
    initial: np.ndarray | None = None  # None -> decoupled solution r_i / R_ii

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class BrTrace:
    iterates: list = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0


def full_attention(n: int) -> np.ndarray:
    m = np.ones((n, n))
    np.fill_diagonal(m, 0.0)
    return m


def effective_system(game: SecurityGame, m) -> tuple[np.ndarray, np.ndarray]:
    """Matrix with diagonal ``R_ii`` and off-diagonal ``-m_ij R_ij``, and ``r``."""
    m = np.asarray(m, dtype=float)
    Rs = -m * game.influence
    np.fill_diagonal(Rs, np.diag(game.influence))
    return Rs, game.returns.copy()


def brne_direct(game: SecurityGame, m) -> np.ndarray:
    Rs, r = effective_system(game, m)
    try:
        u = np.linalg.solve(Rs, r)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"effective system is singular: {exc}") from None
    if not np.all(np.isfinite(u)):
        raise SingularSystemError("effective system produced non-finite solution")
    return u


def _sweep_jacobi(D, C, r, u):
    return (C @ u + r) / D


def _sweep_gauss_seidel(D, C, r, u):
    u = u.copy()
    for i in range(len(u)):
        u[i] = (C[i] @ u + r[i]) / D[i]
    return u


def brne_iterate(game: SecurityGame, m, cfg: BrSolverConfig | None = None):
    """Bounded-rational best-response dynamics.

    Every agent replies to the perceived investments of the others. The Jacobi
    variant uses the previous sweep for everyone; Gauss-Seidel updates in
    place in ascending agent order.

    Returns
    -------
    u : ndarray
    trace : BrTrace
    """
    cfg = cfg or BrSolverConfig(method="gauss-seidel")
    if cfg.method == "direct":
        raise ValueError("brne_iterate needs an iterative method")
    D = np.diag(game.influence).copy()
    C = np.asarray(m, dtype=float) * game.influence
    np.fill_diagonal(C, 0.0)
    r = game.returns
    u = r / D if cfg.initial is None else np.array(cfg.initial, dtype=float)
    sweep = _sweep_jacobi if cfg.method == "jacobi" else _sweep_gauss_seidel

    trace = BrTrace(iterates=[u.copy()])
    for k in range(1, cfg.max_iters + 1):
        u_new = sweep(D, C, r, u)
        change = np.max(np.abs(u_new - u)) if len(u) else 0.0
        u = u_new
        trace.iterates.append(u.copy())
        trace.iterations_used = k
        if change < cfg.tol:
            trace.converged = True
            break
    else:
        warnings.warn(
            f"best-response dynamics did not converge in {cfg.max_iters} sweeps",
            RuntimeWarning,
            stacklevel=2,
        )
    return u, trace


def solve_brne(game: SecurityGame, m, cfg: BrSolverConfig | None = None):
    """Dispatch on ``cfg.method``; the direct path returns an empty trace."""
    cfg = cfg or BrSolverConfig()
    if cfg.method == "direct":
        u = brne_direct(game, m)
        return u, BrTrace(iterates=[u.copy()], converged=True, iterations_used=1)
    return brne_iterate(game, m, cfg)


def rational_ne(game: SecurityGame) -> np.ndarray:
    return brne_direct(game, full_attention(game.n_agents))
