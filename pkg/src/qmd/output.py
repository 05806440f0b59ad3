"""Experiment runs and their CSV / JSON / PGM artefacts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import Trace, VisitReport, restricted_marginal_max, run_walk, visit_report
from .config import ExperimentConfig
from .strategies import RestrictedSet

ZERO_CUTOFF = 1e-15


@dataclass
class Experiment:
    config: ExperimentConfig
    trace: Trace
    report: VisitReport
    restricted: Optional[RestrictedSet]


def run_experiment(cfg: ExperimentConfig) -> Experiment:
    responder = cfg.responder()
    trace = run_walk(cfg.dims, cfg.start, cfg.plan(), responder, cfg.steps)
    report = visit_report(trace, cfg.tolerances.visit, cfg.tolerances.attain)
    return Experiment(cfg, trace, report, responder.restricted)


def claimed_bounds(cfg: ExperimentConfig) -> Optional[dict]:
    """Visit/attain bounds claimed for this set-up, or None."""
    n, d = cfg.n, cfg.derek
    few = 1 if n % 2 else 2
    if d["kind"] == "strategy2":
        p, q = d["p"], d["q"]
        return {"max_visited": few, "max_attained": n - (n // q - n // (p * q))}
    if d["kind"] == "strategy3":
        return {"max_visited": few, "max_attained": n - n // d["p"]}
    if d["kind"] == "single_h":
        return {"max_visited": 2}
    if d["kind"] == "classical_greedy":
        return {"max_visited": n - n // d["p"], "max_attained": n - n // d["p"]}
    if d["kind"] == "strategy1" and cfg.magnus["kind"] == "ruler" and cfg.steps >= n - 1:
        return {"max_visited": n - 1, "min_attained": n}
    return None


def summary_dict(exp: Experiment) -> dict:
    cfg, rep = exp.config, exp.report
    restricted = None
    if exp.restricted is not None:
        members = list(exp.restricted.members)
        restricted = {
            "modulus": exp.restricted.modulus,
            "members": members,
            "max_marginal": restricted_marginal_max(exp.trace, members),
        }
    return {
        "n": cfg.n,
        "start": cfg.start,
        "steps": cfg.steps,
        "visited": [{"position": x, "step": t} for x, t in rep.visited.items()],
        "attained": [
            {"position": x, "round": t} for x, t in sorted(rep.attained.items())
        ],
        "restricted": restricted,
        "bounds": {
            "claimed": claimed_bounds(cfg),
            "observed": {"visited": len(rep.visited), "attained": len(rep.attained)},
        },
    }


def _fmt(p: float) -> str:
    # float noise from cancelling amplitudes is printed as an exact zero
    return "0" if abs(p) < ZERO_CUTOFF else f"{p:.12g}"


def trace_csv(trace: Trace) -> str:
    lines = ["step,position,probability"]
    for t, row in enumerate(trace.marginals):
        for x, p in enumerate(row):
            lines.append(f"{t},{x},{_fmt(p)}")
    return "\n".join(lines) + "\n"


def _round_half_away(v: float) -> int:
    return int(math.floor(abs(v) + 0.5)) * (1 if v >= 0 else -1)


def heatmap_pgm(trace: Trace, visit_tol: float = 1e-9) -> str:
    """Plain ``P2`` greyscale: one row per step, darker means more probable.

    Probabilities are taken at the 12 significant digits written to the CSV,
    so exact halves such as 0.4999999999999999 round as 0.5.  Cells where the
    position is measured with certainty are forced to black.
    """
    n = trace.dims.n
    rows = []
    for row in trace.marginals:
        px = [255 - _round_half_away(255 * float(_fmt(p))) for p in row]
        px = [0 if p >= 1 - visit_tol else max(0, min(255, v)) for v, p in zip(px, row)]
        rows.append(" ".join(str(v) for v in px))
    return f"P2\n{n} {len(rows)}\n255\n" + "\n".join(rows) + "\n"


def attain_table(exp: Experiment) -> str:
    horizon = exp.config.steps
    lines = ["position,attained,final_stop_prob"]
    for x in range(exp.config.n):
        t = exp.report.attained.get(x)
        when = str(t) if t is not None else f"never({horizon})"
        lines.append(f"{x},{when},{_fmt(exp.report.final_stop[x])}")
    return "\n".join(lines) + "\n"


def write_outputs(exp: Experiment, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    outs = exp.config.outputs
    written = []
    if outs.trace_csv:
        path = out_dir / outs.trace_csv
        path.write_text(trace_csv(exp.trace))
        written.append(path)
    if outs.summary_json:
        path = out_dir / outs.summary_json
        path.write_text(json.dumps(summary_dict(exp), indent=2) + "\n")
        written.append(path)
    if outs.heatmap_pgm:
        path = out_dir / outs.heatmap_pgm
        path.write_text(heatmap_pgm(exp.trace, exp.config.tolerances.visit))
        written.append(path)
    return written


def marginals_sum_ok(trace: Trace, tol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(trace.marginals.sum(axis=1) - 1) <= tol))
