"""Accelerated proximal-gradient solvers for an agent's cognition problem.

Two recursions share the same extrapolation and prox step:

* the monitored path runs a plain prox-gradient step ``v`` from the last
  accepted iterate alongside the accelerated step ``z`` and keeps whichever
  has the lower objective, so descent holds even for indefinite matrices;
* the convex path drops the monitor and accepts ``z`` only if it does not
  increase the objective.

``calibrate_alpha`` bisects the L1 weight until the attention mass of the
solution matches a budget.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .prox import ProxProblem, eval_Q, is_psd, prox_grad_step, q_diff

log = logging.getLogger(__name__)

CONVEX = "convex"
NONCONVEX = "nonconvex"
RESIDUAL_FACTOR = 10.0


@dataclass
class ApgConfig:
    tol: float = 1e-10
    max_iters: int = 50_000
    initial_m: np.ndarray | None = None
    force_nonconvex_path: bool = False
    record_iterates: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.initial_m is not None:
            m0 = np.asarray(self.initial_m, dtype=float)
            if np.any(m0 < 0) or np.any(m0 > 1):
                raise ValueError("initial_m must lie in the unit box")


@dataclass
class ApgTrace:
    """Objective history of one solve.

    ``q_values`` holds Q(v_k) on the monitored path and Q(x_k) on the convex
    path. ``q_x[k]`` is Q at the k-th accepted iterate (``q_x[0]`` is the
    initial point); ``q_v[k]`` and ``monitor_steps[k]`` belong to the monitor
    step taken from ``x_k``.
    """

    path: str
    q_values: list = field(default_factory=list)
    q_x: list = field(default_factory=list)
    q_v: list = field(default_factory=list)
    monitor_steps: list = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False
    residual: float = math.inf
    y_iterates: list = field(default_factory=list)
    z_iterates: list = field(default_factory=list)


class CalibrationError(RuntimeError):
    def __init__(self, msg, scan):
        super().__init__(msg)
        self.scan = scan


def fixed_point_residual(p: ProxProblem, m) -> float:
    """Sup-norm distance between ``m`` and one prox-gradient step from it."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(prox_grad_step(p, m, p.step_x) - m)))


def _initial(p, cfg):
    if cfg.initial_m is None:
        return np.full(p.dim, 0.5)
    m0 = np.clip(np.asarray(cfg.initial_m, dtype=float), 0.0, 1.0)
    if m0.shape != (p.dim,):
        raise ValueError(f"initial_m must have length {p.dim}")
    return m0


def _apg(p: ProxProblem, cfg: ApgConfig, monitored: bool):
    trace = ApgTrace(path=NONCONVEX if monitored else CONVEX)
    x = _initial(p, cfg)
    if p.dim == 0:
        trace.converged, trace.residual = True, 0.0
        return x, trace

    # t0 = t1 = 1 and z1 = x0 = x1, so the first extrapolation is y1 = x1
    x_prev, z = x.copy(), x.copy()
    t_prev = t = 1.0
    qx = eval_Q(p, x)
    trace.q_x.append(qx)
    if not monitored:
        trace.q_values.append(qx)

    for k in range(1, cfg.max_iters + 1):
        y = x + (t_prev / t) * (z - x) + ((t_prev - 1.0) / t) * (x - x_prev)
        z = prox_grad_step(p, y, p.step_y)
        qz = eval_Q(p, z)
        if cfg.record_iterates:
            trace.y_iterates.append(y)
            trace.z_iterates.append(z)

        if monitored:
            v = prox_grad_step(p, x, p.step_x)
            qv = eval_Q(p, v)
            trace.q_v.append(qv)
            trace.q_values.append(qv)
            trace.monitor_steps.append(float(np.sum((v - x) ** 2)))
            # ties go to the accelerated step
            x_new, q_new = (z, qz) if q_diff(p, z, v) <= 0 else (v, qv)
        else:
            x_new, q_new = (z, qz) if q_diff(p, z, x) <= 0 else (x, qx)
            trace.q_values.append(q_new)

        t_prev, t = t, 0.5 * (1.0 + math.sqrt(4.0 * t * t + 1.0))
        change = float(np.max(np.abs(x_new - x)))
        x_prev, x, qx = x, x_new, q_new
        trace.q_x.append(qx)
        trace.iterations_used = k

        # a rejected step leaves x unchanged, so the residual must agree
        if change < cfg.tol:
            res = fixed_point_residual(p, x)
            if res < RESIDUAL_FACTOR * cfg.tol:
                trace.converged, trace.residual = True, res
                break
    else:
        trace.residual = fixed_point_residual(p, x)
        warnings.warn(
            f"cognition solve for agent {p.owner + 1} stopped at max_iters="
            f"{cfg.max_iters} (residual {trace.residual:.3e})",
            RuntimeWarning,
            stacklevel=3,
        )
    return x, trace


def apg_nonconvex(p: ProxProblem, cfg: ApgConfig | None = None):
    """Monitored accelerated proximal gradient; valid for any symmetric matrix."""
    return _apg(p, cfg or ApgConfig(), monitored=True)


def apg_convex(p: ProxProblem, cfg: ApgConfig | None = None):
    """Accelerated proximal gradient with objective-based acceptance.

    Requires a positive semidefinite quadratic.
    """
    return _apg(p, cfg or ApgConfig(), monitored=False)


def solve_cognition(p: ProxProblem, cfg: ApgConfig | None = None):
    cfg = cfg or ApgConfig()
    if cfg.force_nonconvex_path or not is_psd(p):
        return apg_nonconvex(p, cfg)
    return apg_convex(p, cfg)


def uniform_start(dim: int, beta: float) -> np.ndarray:
    if dim == 0:
        return np.zeros(0)
    return np.full(dim, min(max(beta / dim, 0.0), 1.0))


def calibrate_alpha(
    p: ProxProblem,
    beta: float,
    cfg: ApgConfig | None = None,
    ftol: float = 1e-9,
    width_tol: float = 1e-12,
    accept_tol: float = 1e-4,
):
    """Find the L1 weight whose solution spends an attention mass of ``beta``.

    Bracketing search on ``alpha`` over ``[0, max_j (L e)_j]``; at the upper
    end the zero vector is optimal. The attention mass is nonincreasing and
    piecewise linear in ``alpha`` for rank-one problems, so false-position
    steps (bisection as the fallback) converge in a few solves. Each trial
    is warm-started from the previous one.

    Returns
    -------
    alpha : float
    m : ndarray
    """
    cfg = cfg or ApgConfig()
    n = p.dim
    if not beta > 0:
        raise ValueError("beta must be positive")
    if n == 0:
        return 0.0, np.zeros(0)
    m0 = uniform_start(n, beta) if cfg.initial_m is None else np.asarray(cfg.initial_m)
    scan = []

    def solve(alpha, start):
        trial = ApgConfig(
            tol=cfg.tol,
            max_iters=cfg.max_iters,
            initial_m=start,
            force_nonconvex_path=cfg.force_nonconvex_path,
        )
        m, _ = solve_cognition(p.with_alpha(alpha), trial)
        mass = float(np.abs(m).sum())
        scan.append((alpha, mass))
        return m, mass - beta

    if beta >= n:
        m, _ = solve(0.0, m0)
        return 0.0, m

    alpha_hi = float(np.max(p.matvec(np.ones(n))))
    if not alpha_hi > 0:
        # any positive weight already empties m; for a zero matrix the
        # unpenalised solve keeps the starting point
        m, _ = solve(0.0, m0)
        return 0.0, m

    lo, hi = 0.0, alpha_hi
    m_lo, f_lo = solve(lo, m0)
    if abs(f_lo) < ftol:
        return lo, m_lo
    m_hi, f_hi = solve(hi, m0)
    if abs(f_hi) < ftol:
        return hi, m_hi
    if f_lo < 0 or f_hi > 0:
        raise CalibrationError(
            f"budget {beta:g} not bracketed on [0, {alpha_hi:g}]", scan
        )

    # bracketing search: Illinois false-position steps, with a plain
    # bisection whenever the bracket fails to halve over two steps
    m, f, mid = m0, math.inf, lo
    side = 0
    widths = [hi - lo]
    while hi - lo > width_tol * max(1.0, alpha_hi):
        stalled = len(widths) >= 3 and widths[-1] > 0.5 * widths[-3]
        mid = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if stalled or not lo < mid < hi:
            mid = 0.5 * (lo + hi)
        m, f = solve(mid, m)
        if abs(f) < ftol:
            return mid, m
        if f > 0:
            lo, f_lo = mid, f
            if side > 0:
                f_hi *= 0.5
            side = 1
        else:
            hi, f_hi = mid, f
            if side < 0:
                f_lo *= 0.5
            side = -1
        widths.append(hi - lo)
    if abs(f) < accept_tol:
        log.debug("calibration stopped on bracket width with |mass - beta| = %.2e", abs(f))
        return mid, m
    raise CalibrationError(
        f"attention mass jumps across budget {beta:g} near alpha={mid:.6g}", scan
    )
