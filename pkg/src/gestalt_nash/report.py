"""Running a resolved scenario and writing its outputs."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .engine import (
    GneOutcome,
    PhenomenaReport,
    VerificationReport,
    detect_phenomena,
    gne_solve,
    verify_gne,
)
from .scenarios import SCHEMA_VERSION, ScenarioSpec, build_scenario, gne_config

CSV_FMT = "{:.12g}"


@dataclass
class RunReport:
    outcome: GneOutcome
    phenomena: PhenomenaReport
    verification: VerificationReport
    wall_time: float
    config_echo: dict
    group_labels: list | None = None


def run_scenario(spec: ScenarioSpec, seed: int | None = None, threads=None) -> RunReport:
    if seed is not None:
        spec = replace(spec, rng_seed=int(seed))
    game, labels = build_scenario(spec)
    cfg = gne_config(spec, threads)
    t0 = time.perf_counter()
    outcome = gne_solve(game, cfg)
    baseline = None
    b0 = spec.phenomena.get("baseline_budget")
    if b0 is not None:
        baseline = gne_solve(game.with_budgets(b0), cfg)
    if outcome.converged:
        verification = verify_gne(game, outcome, spec.verification["n_probes"], spec.rng_seed)
    else:
        verification = VerificationReport(False, float("nan"), [], ["not converged"],
                                          0, spec.rng_seed)
    phenomena = detect_phenomena(game, outcome, labels, spec.phenomena["support_eps"], baseline)
    wall = time.perf_counter() - t0
    return RunReport(outcome, phenomena, verification, wall, spec.as_config(), labels)


def summary_dict(report: RunReport) -> dict:
    """Everything in summary.json. Wall time is left out so reruns compare equal."""
    o = report.outcome
    return {
        "schema_version": SCHEMA_VERSION,
        "units": {"investment": "k$", "cost": "unit"},
        "agent_numbering": "1-based",
        "n_agents": int(len(o.u_star)),
        "converged": bool(o.converged),
        "rounds": int(o.rounds_used),
        "u_star": o.u_star.tolist(),
        "m_star": o.m_star.tolist(),
        "alphas": o.alphas.tolist(),
        "rbp": o.rbp.tolist(),
        "phenomena": report.phenomena.as_dict(),
        "verification": report.verification.as_dict(),
        "config_echo": report.config_echo,
    }


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in rows:
            w.writerow([CSV_FMT.format(x) if isinstance(x, (float, np.floating)) else x
                        for x in row])


def emit_report(report: RunReport, out_dir, trace: bool = False) -> list[Path]:
    """Write summary.json, cognition.csv and, with ``trace``, the CSV traces."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    o = report.outcome
    n = len(o.u_star)

    def target(name):
        p = out / name
        written.append(p)
        return p

    try:
        with open(target("summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary_dict(report), fh, indent=2)
            fh.write("\n")
        _write_csv(target("cognition.csv"), None, (list(map(float, row)) for row in o.m_star))
        if trace:
            _write_csv(
                target("u_trace.csv"),
                ["round"] + [f"u{i + 1}" for i in range(n)],
                ([k + 1] + list(map(float, u)) for k, (u, _) in enumerate(o.round_trace)),
            )
            for i, tr in enumerate(o.q_traces):
                _write_csv(
                    target(f"q_trace_agent{i + 1}.csv"),
                    ["iteration", "q"],
                    ([k, float(q)] for k, q in enumerate(tr.q_values)),
                )
    except OSError as exc:
        raise OSError(f"failed writing {written[-1]}: {exc}") from exc
    return written
