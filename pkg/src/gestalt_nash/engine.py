"""Alternating solver for the joint investment / attention equilibrium.

Each round solves the investment equilibrium for the current attention
profile, then lets every agent rebuild its attention vector against the new
investments (all agents from the same ``u``). Rounds stop when neither layer
moves.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import game as gm
from .cognition import (
    ApgConfig,
    calibrate_alpha,
    fixed_point_residual,
    solve_cognition,
    uniform_start,
)
from .equilibrium import BrSolverConfig, effective_system, solve_brne
from .prox import build_lambda, eval_Q, proj_box

log = logging.getLogger(__name__)

BUDGET_MODES = ("beta", "alpha")


@dataclass
class GneConfig:
    outer_tol: float = 1e-6
    max_rounds: int = 1000
    br_config: BrSolverConfig = field(default_factory=BrSolverConfig)
    apg_config: ApgConfig = field(default_factory=ApgConfig)
    budget_mode: str = "beta"
    alphas: np.ndarray | None = None  # fixed weights for budget_mode="alpha"
    calib_tol: float = 1e-9
    threads: int | None = None

    def __post_init__(self):
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if self.budget_mode not in BUDGET_MODES:
            raise ValueError(f"budget_mode must be one of {BUDGET_MODES}")
        if self.budget_mode == "alpha" and self.alphas is None:
            raise ValueError("budget_mode='alpha' needs alphas")


@dataclass
class GneOutcome:
    u_star: np.ndarray
    m_star: np.ndarray
    alphas: np.ndarray
    rbp: np.ndarray
    rounds_used: int
    converged: bool
    round_trace: list = field(default_factory=list)  # (u, m) per round
    q_traces: list = field(default_factory=list)  # last-round ApgTrace per agent


def initial_cognition(game: gm.SecurityGame) -> np.ndarray:
    n = game.n_agents
    m = np.zeros((n, n))
    for i in range(n):
        row = uniform_start(n - 1, game.budgets[i])
        m[i, [j for j in range(n) if j != i]] = row
    return m


def _agent_update(game, i, u, m_row, cfg: GneConfig, alpha=None):
    """Return (alpha_i, new attention row, trace) for agent ``i``."""
    n = game.n_agents
    idx = [j for j in range(n) if j != i]
    p = build_lambda(game, i, u)
    start = m_row[idx] if cfg.apg_config.initial_m is None else cfg.apg_config.initial_m
    apg = ApgConfig(
        tol=cfg.apg_config.tol,
        max_iters=cfg.apg_config.max_iters,
        initial_m=start,
        force_nonconvex_path=cfg.apg_config.force_nonconvex_path,
    )
    if alpha is None:
        alpha, _ = calibrate_alpha(p, game.budgets[i], apg, ftol=cfg.calib_tol)
    m_i, trace = solve_cognition(p.with_alpha(alpha), apg)
    row = np.zeros(n)
    row[idx] = m_i
    return float(alpha), row, trace


def _map(fn, items, threads):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def alternation_round(game, m, cfg: GneConfig, alphas_fixed=None):
    """One round: investments given ``m``, then every agent's attention."""
    u, _ = solve_brne(game, m, cfg.br_config)
    n = game.n_agents

    def work(i):
        a = None if alphas_fixed is None else alphas_fixed[i]
        return _agent_update(game, i, u, m[i], cfg, a)

    results = _map(work, list(range(n)), cfg.threads)
    alphas = np.array([r[0] for r in results])
    m_new = np.array([r[1] for r in results]).reshape(n, n)
    traces = [r[2] for r in results]
    return u, m_new, alphas, traces


def gne_solve(game: gm.SecurityGame, cfg: GneConfig | None = None) -> GneOutcome:
    cfg = cfg or GneConfig()
    n = game.n_agents
    fixed = None
    if cfg.budget_mode == "alpha":
        fixed = np.broadcast_to(np.asarray(cfg.alphas, dtype=float), (n,))

    m = initial_cognition(game)
    u = np.zeros(n)
    trace = []
    converged = False
    rounds = 0
    alphas = np.zeros(n)
    q_traces = []
    for rounds in range(1, cfg.max_rounds + 1):
        u_new, m_new, alphas, q_traces = alternation_round(game, m, cfg, fixed)
        change = max(np.max(np.abs(u_new - u)), np.max(np.abs(m_new - m)))
        u, m = u_new, m_new
        trace.append((u.copy(), m.copy()))
        log.debug("round %d: change %.3e", rounds, change)
        if change < cfg.outer_tol:
            converged = True
            break

    # investments consistent with the final attention profile
    u, _ = solve_brne(game, m, cfg.br_config)
    return GneOutcome(
        u_star=u,
        m_star=m,
        alphas=alphas,
        rbp=gm.rbp_all(game, u, m),
        rounds_used=rounds,
        converged=converged,
        round_trace=trace,
        q_traces=q_traces,
    )


@dataclass
class VerificationReport:
    ok: bool
    investment_residual: float
    cognition_residuals: list
    violations: list = field(default_factory=list)
    n_probes: int = 0
    seed: int = 0
    max_improvement: float = 0.0

    def as_dict(self):
        return {
            "ok": self.ok,
            "investment_residual": self.investment_residual,
            "cognition_residuals": list(self.cognition_residuals),
            "max_improvement": self.max_improvement,
            "n_probes": self.n_probes,
            "seed": self.seed,
            "violations": list(self.violations),
        }


def _cognition_objective(game, i, u, m_row, alpha):
    """Real cost after re-best-responding to ``m_row``, plus cognition cost."""
    u_dev = np.array(u, dtype=float)
    u_dev[i] = gm.best_response(game, i, u, m_row)
    mask = np.arange(game.n_agents) != i
    return gm.true_cost(game, i, u_dev) + alpha * np.abs(m_row[mask]).sum()


def verify_gne(
    game: gm.SecurityGame,
    outcome: GneOutcome,
    n_probes: int = 100,
    seed: int = 0,
    residual_tol: float = 1e-8,
    improve_tol: float = 1e-7,
) -> VerificationReport:
    """Check both equilibrium layers and probe unilateral deviations.

    u-probes scale ``u_i`` by a factor in [0.5, 1.5] with attention fixed and
    compare perceived costs. m-probes move ``m^i`` by a box-projected Gaussian
    step of scale 0.1, re-best-respond ``u_i`` and compare real cost plus
    cognition cost.
    """
    n = game.n_agents
    u, m = outcome.u_star, outcome.m_star
    violations = []

    Rs, r = effective_system(game, m)
    res_u = float(np.max(np.abs(Rs @ u - r)))
    if res_u >= residual_tol:
        violations.append(f"investment residual {res_u:.3e} >= {residual_tol:g}")

    cog_res = []
    for i in range(n):
        idx = [j for j in range(n) if j != i]
        p = build_lambda(game, i, u, outcome.alphas[i])
        res = fixed_point_residual(p, m[i, idx])
        cog_res.append(res)
        if res >= residual_tol:
            violations.append(f"agent {i + 1}: cognition residual {res:.3e}")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        base_u = gm.perceived_cost(game, i, u, m[i])
        base_m = _cognition_objective(game, i, u, m[i], outcome.alphas[i])
        idx = [j for j in range(n) if j != i]
        for _ in range(n_probes):
            u_dev = u.copy()
            u_dev[i] *= rng.uniform(0.5, 1.5)
            gain = base_u - gm.perceived_cost(game, i, u_dev, m[i])
            worst = max(worst, gain)
            if gain > improve_tol:
                violations.append(f"agent {i + 1}: investment deviation improves by {gain:.3e}")

            row = m[i].copy()
            row[idx] = proj_box(row[idx] + 0.1 * rng.standard_normal(n - 1))
            gain = base_m - _cognition_objective(game, i, u, row, outcome.alphas[i])
            worst = max(worst, gain)
            if gain > improve_tol:
                violations.append(f"agent {i + 1}: attention deviation improves by {gain:.3e}")

    return VerificationReport(
        ok=not violations,
        investment_residual=res_u,
        cognition_residuals=cog_res,
        violations=violations,
        n_probes=n_probes,
        seed=seed,
        max_improvement=worst,
    )


@dataclass
class PhenomenaReport:
    supports: list  # per agent, sorted indices j with m_ij > eps
    critical_set: list
    group_shares: np.ndarray | None = None  # (N, n_groups) attention share
    partisan_group: int | None = None
    fill_set: list | None = None

    @property
    def partisanship(self) -> bool:
        return self.partisan_group is not None

    def as_dict(self, one_based=True):
        off = 1 if one_based else 0
        return {
            "supports": [[j + off for j in s] for s in self.supports],
            "critical_set": [j + off for j in self.critical_set],
            "group_shares": None if self.group_shares is None else self.group_shares.tolist(),
            "partisanship": self.partisanship,
            "partisan_group": self.partisan_group,
            "fill_set": None if self.fill_set is None else [j + off for j in self.fill_set],
        }


def supports(m, eps):
    return [sorted(int(j) for j in np.nonzero(row > eps)[0]) for row in np.asarray(m)]


def detect_phenomena(
    game: gm.SecurityGame,
    outcome: GneOutcome,
    group_labels=None,
    support_eps: float = 1e-3,
    baseline: GneOutcome | None = None,
    share_tol: float = 1e-3,
) -> PhenomenaReport:
    """Partisanship, critical set and inattention filling.

    ``baseline`` is an outcome of the same game at a smaller budget; agents
    attended to by someone only in ``outcome`` form the fill set.
    """
    if not support_eps > 0:
        raise ValueError("support_eps must be positive")
    n = game.n_agents
    m = outcome.m_star
    sup = supports(m, support_eps)
    critical = [j for j in range(n) if all(j in sup[i] for i in range(n) if i != j)]

    shares, partisan = None, None
    if group_labels is not None:
        labels = np.asarray(group_labels)
        groups = sorted(set(labels.tolist()))
        mass = m.sum(axis=1)
        shares = np.zeros((n, len(groups)))
        for g_idx, g in enumerate(groups):
            shares[:, g_idx] = m[:, labels == g].sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            shares = np.where(mass[:, None] > 0, shares / mass[:, None], 0.0)
        for g_idx, g in enumerate(groups):
            if np.all(shares[:, g_idx] >= 1 - share_tol):
                partisan = g
                break

    fill = None
    if baseline is not None:
        before = set().union(*supports(baseline.m_star, support_eps))
        after = set().union(*sup)
        fill = sorted(after - before)

    return PhenomenaReport(sup, critical, shares, partisan, fill)


def homogeneous_closed_form(R1, R2, r, N, beta):
    """Attention per neighbour and investment at the symmetric equilibrium."""
    denom = R1 - beta * R2
    if denom <= 0:
        raise ValueError("R1 - beta * R2 must be positive")
    if N < 2:
        return 0.0, r / R1
    return beta / (N - 1), r / denom


def cognition_objective_at(game, outcome, i, m_row):
    """Q_i at ``outcome.u_star`` for a full-length attention row."""
    n = game.n_agents
    idx = [j for j in range(n) if j != i]
    p = build_lambda(game, i, outcome.u_star, outcome.alphas[i])
    return eval_Q(p, np.asarray(m_row)[idx])
