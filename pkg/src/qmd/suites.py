"""Verification suites behind ``qmd verify``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from .analysis import (
    equal_amplitude_violation,
    restricted_marginal_max,
    run_walk,
    visit_report,
    visited_set,
)
from .classical import (
    f_star,
    is_power_of_two,
    minimax_value,
    oracle_horizon,
    simulate_classical,
)
from .engine import (
    CoinOp,
    GameDims,
    MagnitudeGate,
    QState,
    apply_coin,
    apply_magnitude_gate,
    apply_shift,
    new_state,
    position_marginal,
    step,
)
from .strategies import (
    MagnusPlan,
    Strategy2Responder,
    Strategy3Responder,
    classical_direction_ops,
    identity_responder,
    magnus_gates_from_magnitudes,
    ruler_sequence,
    single_hadamard_responder,
    strategy1_responder,
)

RESTRICTED_TOL = 1e-12
NORM_TOL = 1e-12
PLAN_N15 = (3, 6, 3, 1, 2, 7, 4, 5)
PLAN_N25 = (3, 5, 7, 2, 11, 6, 9, 1, 12, 4, 8, 10)
EXTENDED_HADAMARD_STEPS = (1, 2, 3, 4, 8, 9, 10, 11)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}" + (f" ({self.detail})" if self.detail else "")


# --------------------------------------------------------------------------
# random objects for the engine checks


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(dims: GameDims, rng: np.random.Generator) -> QState:
    v = rng.standard_normal(dims.total) + 1j * rng.standard_normal(dims.total)
    return QState(dims, v / np.linalg.norm(v))


def classical_embedding_marginals(
    n: int, start: int, mags: list[int], dirs: list[int]
) -> np.ndarray:
    dims = GameDims(n)
    gates = magnus_gates_from_magnitudes(mags, dims.mag_dim)
    state = new_state(dims, start)
    rows = [position_marginal(state)]
    for gate, op in zip(gates, classical_direction_ops(dirs)):
        state = step(state, gate, op)
        rows.append(position_marginal(state))
    return np.array(rows)


def engine_suite(seeds: int = 1000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(seeds):
        dims = GameDims(int(rng.integers(2, 17)))
        psi = random_state(dims, rng)
        kind = rng.integers(3)
        if kind == 0:
            out = apply_magnitude_gate(psi, MagnitudeGate(random_unitary(dims.mag_dim, rng)))
        elif kind == 1:
            out = apply_coin(psi, CoinOp(random_unitary(2, rng)))
        else:
            out = apply_shift(psi)
        worst = max(worst, abs(out.norm() - psi.norm()))
    checks = [Check("norm preservation", worst <= NORM_TOL, f"max deviation {worst:.2e}")]

    mismatches = 0
    for _ in range(seeds):
        n = int(rng.integers(2, 17))
        start = int(rng.integers(n))
        mags = [int(m) for m in rng.integers(1, n // 2 + 1, size=30)]
        dirs = [int(d) for d in rng.integers(0, 2, size=30)]
        _, path = simulate_classical(n, start, mags, dirs)
        expected = np.zeros((31, n))
        expected[np.arange(31), path] = 1.0
        if not np.array_equal(classical_embedding_marginals(n, start, mags, dirs), expected):
            mismatches += 1
    checks.append(Check("classical embedding", mismatches == 0, f"{mismatches} mismatches"))
    return checks


# --------------------------------------------------------------------------
# strategy claims


def prop1_suite(n: int) -> list[Check]:
    if not is_power_of_two(n) or n < 4:
        raise ValueError(f"prop1 needs n a power of two >= 4, got {n}")
    dims = GameDims(n)
    plan = MagnusPlan.ruler()
    checks = []

    classical = run_walk(dims, 0, plan, identity_responder(), n - 1)
    seen = visited_set(classical)
    checks.append(Check(
        "ruler + identity visits every position in n-1 steps",
        len(seen) == n, f"{len(seen)}/{n}",
    ))
    if n <= 16:
        mags = ruler_sequence(n)
        bad = sum(
            len(simulate_classical(n, 0, mags, dirs)[0]) != n
            for dirs in itertools.product((0, 1), repeat=n - 1)
        )
        checks.append(Check(
            "ruler visits every position for all direction sequences",
            bad == 0, f"{2 ** (n - 1)} sequences, {bad} failing",
        ))

    trace = run_walk(dims, 0, plan, strategy1_responder(), n - 1)
    rep = visit_report(trace)
    checks.append(Check(
        "strategy 1 prevents visiting all positions",
        len(rep.visited) < n, f"visited {sorted(rep.visited)}",
    ))
    late = [x for x in range(n) if rep.attained.get(x, n) > n - 1]
    checks.append(Check(
        "every position attained by round n-1 under strategy 1",
        not late, f"unattained {late}" if late else "",
    ))

    long = run_walk(dims, 0, plan, single_hadamard_responder(), 4 * n)
    seen = visited_set(long)
    checks.append(Check(
        "single Hadamard keeps visited positions <= 2 over 4n steps",
        len(seen) <= 2, f"visited {sorted(seen)}",
    ))
    return checks


def prop2_fixed_plan(n: int, p: int, q: int) -> tuple[int, ...]:
    if (n, p, q) == (15, 3, 5):
        return PLAN_N15
    base = [p * q, p * q] if p * q <= n // 2 else []
    base += [p, 2 * p, p, 1, q, 2, n // 2]
    return tuple(m for m in base if 1 <= m <= n // 2)


def _plans(fixed: Iterable[int], seeds: int) -> Iterator[tuple[str, MagnusPlan]]:
    yield "fixed", MagnusPlan.explicit(fixed)
    for s in range(seeds):
        yield f"seed {s}", MagnusPlan.random(s)


def prop2_suite(
    n: int, p: int, q: int, start: int = 0, seeds: int = 100, steps: int = 60
) -> list[Check]:
    dims = GameDims(n)
    allowed_visits = {start} if n % 2 else {start, (start + n // 2) % n}
    guaranteed = n // q - n // (p * q)
    failures: dict[str, list[str]] = {
        "visited": [], "restricted": [], "never-attained": [], "attained": []
    }
    runs = 0
    for label, plan in _plans(prop2_fixed_plan(n, p, q), seeds):
        responder = Strategy2Responder(n, p, q, start)
        trace = run_walk(dims, start, plan, responder, steps)
        rep = visit_report(trace)
        runs += 1
        if not set(rep.visited) <= allowed_visits:
            failures["visited"].append(label)
        members = responder.restricted.members if responder.restricted else ()
        if restricted_marginal_max(trace, members) > RESTRICTED_TOL:
            failures["restricted"].append(label)
        if n - len(rep.attained) < guaranteed:
            failures["never-attained"].append(label)
        if len(rep.attained) > n - guaranteed:
            failures["attained"].append(label)
    return [
        Check(f"{key} ({runs} runs)", not bad, ", ".join(bad[:5]))
        for key, bad in failures.items()
    ]


def prop3_suite(
    n: int,
    p: int,
    start: int = 0,
    seeds: int = 100,
    steps: int = 60,
    hadamard_steps: Iterable[int] = (1,),
    compare_steps: Optional[Iterable[int]] = EXTENDED_HADAMARD_STEPS,
) -> list[Check]:
    dims = GameDims(n)
    hs = tuple(hadamard_steps)
    allowed_visits = {start} if n % 2 else {start, (start + n // 2) % n}
    failures: dict[str, list[str]] = {
        "visited": [], "restricted": [], "never-attained": [], "equal amplitudes": []
    }
    fixed = tuple(m for m in PLAN_N25 if m <= n // 2)
    runs = 0
    for label, plan in _plans(fixed, seeds):
        responder = Strategy3Responder(n, p, start, hs)
        trace = run_walk(dims, start, plan, responder, steps)
        rep = visit_report(trace)
        runs += 1
        if not set(rep.visited) <= allowed_visits:
            failures["visited"].append(label)
        if restricted_marginal_max(trace, responder.restricted.members) > RESTRICTED_TOL:
            failures["restricted"].append(label)
        if n - len(rep.attained) < n // p:
            failures["never-attained"].append(label)
        if max(equal_amplitude_violation(s) for s in trace.states) > RESTRICTED_TOL:
            failures["equal amplitudes"].append(label)
    checks = [
        Check(f"{key} ({runs} runs)", not bad, ", ".join(bad[:5]))
        for key, bad in failures.items()
    ]
    if compare_steps is not None:
        a = Strategy3Responder(n, p, start, hs)
        b = Strategy3Responder(n, p, start, compare_steps)
        run_walk(dims, start, MagnusPlan.explicit(fixed), a, steps)
        run_walk(dims, start, MagnusPlan.explicit(fixed), b, steps)
        checks.append(Check(
            "restricted class independent of Hadamard schedule",
            a.restricted.members == b.restricted.members,
            f"{list(a.restricted.members)} vs {list(b.restricted.members)}",
        ))
    return checks


def classical_suite(max_n: int = 9) -> list[Check]:
    checks = []
    for n in range(2, max_n + 1):
        value = minimax_value(n, oracle_horizon(n))
        checks.append(Check(f"minimax value n={n}", value == f_star(n), f"{value} vs f*={f_star(n)}"))
    return checks
