"""Walk execution, visiting, measured walks and attainment."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import (
    Coin,
    GameDims,
    MagnitudeGate,
    QState,
    describe_coin,
    new_state,
    position_marginal,
    shift_array,
    any_coin_array,
    magnitude_array,
    step,
)
from .strategies import MagnusPlan, Responder, magnus_gates_from_magnitudes

VISIT_TOL = 1e-9
ATTAIN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Move:
    magnitude: int
    gate: MagnitudeGate
    coin: Coin


@dataclass(eq=False)
class Trace:
    dims: GameDims
    start: int
    moves: list[Move]
    states: list[QState]
    marginals: np.ndarray  # (T + 1, n); row 0 is the initial state

    @property
    def steps(self) -> int:
        return len(self.moves)

    @property
    def magnitude_log(self) -> list[int]:
        return [mv.magnitude for mv in self.moves]

    @property
    def coin_log(self) -> list[str]:
        return [describe_coin(mv.coin) for mv in self.moves]


@dataclass(eq=False)
class MeasuredWalkResult:
    target: int
    stop_prob: np.ndarray  # cumulative, rounds 0..T
    residual_norm: np.ndarray


@dataclass
class VisitReport:
    visited: dict[int, int]  # position -> first step with a point mass
    attained: dict[int, int] = field(default_factory=dict)  # position -> first round
    final_stop: dict[int, float] = field(default_factory=dict)


def play(
    dims: GameDims, plan: MagnusPlan, responder: Responder, steps: int
) -> list[Move]:
    """Ask Magnus and Derek for ``steps`` moves.  The responder is consumed."""
    mags = plan.magnitudes(dims.n, steps)
    gates = magnus_gates_from_magnitudes(mags, dims.mag_dim)
    moves = []
    for i, (m, gate) in enumerate(zip(mags, gates), start=1):
        coin = responder.respond(i, m, mags[:i])
        moves.append(Move(m, gate, coin))
    return moves


def evolve(dims: GameDims, start: int, moves: Sequence[Move]) -> Trace:
    state = new_state(dims, start)
    states = [state]
    for mv in moves:
        state = step(state, mv.gate, mv.coin)
        states.append(state)
    marginals = np.array([position_marginal(s) for s in states])
    return Trace(dims, start, list(moves), states, marginals)


def run_walk(
    dims: GameDims, start: int, plan: MagnusPlan, responder: Responder, steps: int
) -> Trace:
    return evolve(dims, start, play(dims, plan, responder, steps))


def visited_set(trace: Trace, tol: float = VISIT_TOL) -> dict[int, int]:
    """Positions measured with certainty at some step, mapped to the first such step."""
    out: dict[int, int] = {}
    hits = np.argwhere(trace.marginals >= 1 - tol)
    for t, x in hits:
        out.setdefault(int(x), int(t))
    return dict(sorted(out.items()))


def measured_walk_moves(
    dims: GameDims, start: int, moves: Sequence[Move], target: int
) -> MeasuredWalkResult:
    """Measure ``|target>`` on the position register, then step, round after round."""
    if not 0 <= target < dims.n:
        raise ValueError(f"target {target} out of range for n={dims.n}")
    psi = new_state(dims, start).tensor.copy()
    stop, residual = [], []
    acc = 0.0
    for t in range(len(moves) + 1):
        acc += float((np.abs(psi[:, :, target]) ** 2).sum())
        psi[:, :, target] = 0.0
        stop.append(acc)
        residual.append(float(np.linalg.norm(psi)))
        if t < len(moves):
            mv = moves[t]
            psi = step(QState.from_tensor(dims, psi), mv.gate, mv.coin).tensor.copy()
    return MeasuredWalkResult(target, np.array(stop), np.array(residual))


def measured_walk(
    dims: GameDims,
    start: int,
    plan: MagnusPlan,
    responder: Responder,
    target: int,
    steps: int,
) -> MeasuredWalkResult:
    return measured_walk_moves(dims, start, play(dims, plan, responder, steps), target)


def measured_walks_all(
    dims: GameDims, start: int, moves: Sequence[Move]
) -> list[MeasuredWalkResult]:
    """One measured walk per target position, evolved together as a batch."""
    n = dims.n
    psi = np.zeros((n,) + dims.shape, dtype=np.complex128)
    psi[:, 0, 0, start] = 1.0
    rows = np.arange(n)
    stop = np.zeros((len(moves) + 1, n))
    residual = np.zeros((len(moves) + 1, n))
    acc = np.zeros(n)
    for t in range(len(moves) + 1):
        hit = psi[rows, :, :, rows]
        acc = acc + (np.abs(hit) ** 2).sum(axis=(1, 2))
        psi[rows, :, :, rows] = 0.0
        stop[t] = acc
        residual[t] = np.sqrt((np.abs(psi) ** 2).sum(axis=(1, 2, 3)))
        if t < len(moves):
            mv = moves[t]
            psi = shift_array(any_coin_array(magnitude_array(psi, mv.gate.matrix), mv.coin))
    return [MeasuredWalkResult(x, stop[:, x].copy(), residual[:, x].copy()) for x in range(n)]


def concurrent_hitting_time(result: MeasuredWalkResult, p: float) -> Optional[int]:
    """Smallest round ``T`` with stopping probability at least ``p``."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    idx = np.flatnonzero(result.stop_prob >= p)
    return int(idx[0]) if idx.size else None


def attained(result: MeasuredWalkResult, tol: float = ATTAIN_TOL) -> Optional[int]:
    return concurrent_hitting_time(result, 1 - tol)


def visit_report(
    trace: Trace, visit_tol: float = VISIT_TOL, attain_tol: float = ATTAIN_TOL
) -> VisitReport:
    results = measured_walks_all(trace.dims, trace.start, trace.moves)
    report = VisitReport(visited_set(trace, visit_tol))
    for res in results:
        t = attained(res, attain_tol)
        if t is not None:
            report.attained[res.target] = t
        report.final_stop[res.target] = float(res.stop_prob[-1])
    return report


def restricted_marginal_max(
    trace: Trace, members: Iterable[int], from_step: int = 0
) -> float:
    """Largest probability mass on ``members`` over rows ``from_step..T``."""
    members = sorted(set(members))
    if not members:
        return 0.0
    return float(trace.marginals[from_step:, members].sum(axis=1).max())


def equal_amplitude_violation(state: QState) -> float:
    """Worst violation of ``|a(m,0,x)| = |a(m,1,x)|`` over entries where both are nonzero."""
    mags = np.abs(state.tensor)
    both = np.minimum(mags[:, 0, :], mags[:, 1, :])
    diff = np.abs(mags[:, 0, :] - mags[:, 1, :])
    return float(np.minimum(diff, both).max())
