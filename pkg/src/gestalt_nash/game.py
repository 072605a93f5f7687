"""Game data model, cost functions and the risk of bounded perception.

Agents are indexed from 0 in code. Human-facing messages number agents
from 1, which is how the case studies label households.

An investment profile is a length-N float array ``u``. A cognition profile is
an N x N float array ``m`` whose row ``i`` is agent ``i``'s attention vector;
the diagonal is structurally zero and ignored by every sum below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SecurityGame:
    """Interdependent security-investment game.

    Parameters
    ----------
    influence : (N, N) array
        ``influence[i, i]`` is the self cost coefficient, ``influence[i, j]``
        the influence of agent ``j`` on agent ``i``.
    returns : (N,) array
        Unit return of investment for each agent.
    budgets : (N,) array, optional
        Attention budgets. Defaults to full attention (N - 1).
    """

    influence: np.ndarray
    returns: np.ndarray
    budgets: np.ndarray | None = None

    def __post_init__(self):
        R = np.array(self.influence, dtype=float)
        r = np.array(self.returns, dtype=float).reshape(-1)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError(f"influence must be square, got shape {R.shape}")
        n = R.shape[0]
        if n < 1:
            raise ValueError("game needs at least one agent")
        if r.shape != (n,):
            raise ValueError(f"returns must have length {n}, got {r.shape[0]}")
        if self.budgets is None:
            b = np.full(n, float(n - 1))
        else:
            b = np.broadcast_to(np.asarray(self.budgets, dtype=float), (n,)).copy()
        for arr in (R, r, b):
            arr.setflags(write=False)
        object.__setattr__(self, "influence", R)
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "budgets", b)

    @property
    def n_agents(self) -> int:
        return self.influence.shape[0]

    @property
    def self_influence(self) -> np.ndarray:
        return np.diag(self.influence).copy()

    def off_diagonal(self) -> np.ndarray:
        """Influence matrix with the diagonal zeroed."""
        R = self.influence.copy()
        np.fill_diagonal(R, 0.0)
        return R

    def with_budgets(self, budgets) -> "SecurityGame":
        return SecurityGame(self.influence, self.returns, budgets)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else "; ".join(self.violations)


def validate_game(game: SecurityGame) -> ValidationReport:
    """Check positivity, sign and row diagonal-dominance conditions.

    Violations are collected, never raised.
    """
    report = ValidationReport()
    R = game.influence
    n = game.n_agents
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(game.returns))):
        report.violations.append("game data must be finite")
        return report
    diag = np.diag(R)
    off = game.off_diagonal()
    for i in range(n):
        if diag[i] <= 0:
            report.violations.append(f"row {i + 1}: diagonal entry must be positive")
        neg = np.nonzero(off[i] < 0)[0]
        for j in neg:
            report.violations.append(
                f"entry ({i + 1}, {j + 1}): off-diagonal influence must be nonnegative"
            )
        if diag[i] <= off[i].sum():
            report.violations.append(f"row {i + 1} not diagonally dominant")
    for i, ri in enumerate(game.returns):
        if not ri > 0:
            report.violations.append(f"agent {i + 1}: return must be positive")
    if n > 1:
        for i, b in enumerate(game.budgets):
            if not (0 < b <= n - 1):
                report.violations.append(
                    f"agent {i + 1}: budget {b:g} outside (0, {n - 1}]"
                )
    return report


def check_cognition(m: np.ndarray, n: int) -> np.ndarray:
    """Return ``m`` as a float array with zero diagonal, or raise."""
    m = np.array(m, dtype=float)
    if m.shape != (n, n):
        raise ValueError(f"cognition profile must be {n}x{n}, got {m.shape}")
    np.fill_diagonal(m, 0.0)
    if np.any(m < 0) or np.any(m > 1) or not np.all(np.isfinite(m)):
        raise ValueError("cognition entries must lie in [0, 1]")
    return m


def _check_index(game: SecurityGame, i: int):
    if not 0 <= i < game.n_agents:
        raise IndexError(f"agent index {i} out of range for N={game.n_agents}")


def _coupling(game, i, u, weights=None):
    row = game.influence[i] * np.asarray(u, dtype=float)
    if weights is not None:
        row = row * np.asarray(weights, dtype=float)
    return row.sum() - row[i]


def true_cost(game: SecurityGame, i: int, u) -> float:
    """Real-world cost of agent ``i`` at profile ``u``."""
    _check_index(game, i)
    u = np.asarray(u, dtype=float)
    Rii = game.influence[i, i]
    return 0.5 * Rii * u[i] ** 2 - game.returns[i] * u[i] - u[i] * _coupling(game, i, u)


def perceived_cost(game: SecurityGame, i: int, u, m_i) -> float:
    """Cost of agent ``i`` when neighbour ``j`` is seen as ``m_i[j] * u[j]``."""
    _check_index(game, i)
    u = np.asarray(u, dtype=float)
    Rii = game.influence[i, i]
    return (
        0.5 * Rii * u[i] ** 2
        - game.returns[i] * u[i]
        - u[i] * _coupling(game, i, u, m_i)
    )


def best_response(game: SecurityGame, i: int, u, m_i=None) -> float:
    """Minimiser of the perceived cost over ``u_i`` (true cost if ``m_i`` is None)."""
    _check_index(game, i)
    return (_coupling(game, i, u, m_i) + game.returns[i]) / game.influence[i, i]


def rbp(game: SecurityGame, i: int, u, m_i) -> float:
    """Risk of bounded perception of agent ``i``.

    Uses the factorised form ``(sum_j (1 - m_j) R_ij u_j)**2 / (2 R_ii)`` of
    the double sum, which makes nonnegativity evident.
    """
    _check_index(game, i)
    u = np.asarray(u, dtype=float)
    miss = 1.0 - np.asarray(m_i, dtype=float)
    w = game.influence[i] * miss * u
    s = w.sum() - w[i]
    return 0.5 * s * s / game.influence[i, i]


def rbp_all(game: SecurityGame, u, m) -> np.ndarray:
    return np.array([rbp(game, i, u, m[i]) for i in range(game.n_agents)])
