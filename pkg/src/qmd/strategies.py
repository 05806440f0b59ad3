"""Magnus plans and Derek responders.

Responders never look at the quantum state.  They see the step index, the
magnitude Magnus announces, and the history of announced magnitudes.  Adaptive
responders keep their own classical bookkeeping of where the branches of the
walk sit, which is exact because every Magnus plan here is a permutation of
the magnitude register started in ``|0>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .classical import greedy_direction, is_power_of_two
from .engine import (
    HADAMARD,
    IDENTITY,
    NOT,
    Coin,
    CoinOp,
    MagnitudeGate,
    PositionControlledCoin,
    build_cyclic_permutation,
)

AMP_TOL = 1e-12
# NOT applied after H: merges (a, a) onto coin 1 and (a, -a) onto coin 0.
HADAMARD_NOT = HADAMARD.then(NOT)


class StrategyError(ValueError):
    """A strategy was misconfigured or its invariant cannot be maintained."""


# --------------------------------------------------------------------------
# Magnus


def ruler_sequence(n: int) -> list[int]:
    """Optimal classical magnitudes for ``n = 2^k``: ``n / 2^(t+1)``, t = trailing zeros of i."""
    if n < 2 or not is_power_of_two(n):
        raise ValueError(f"ruler sequence needs n a power of two >= 2, got {n}")
    return [n >> ((i & -i).bit_length()) for i in range(1, n)]


def magnus_gates_from_magnitudes(seq: Sequence[int], mag_dim: int) -> list[MagnitudeGate]:
    """Cyclic permutations stepping the magnitude register through ``seq`` from ``|0>``."""
    gates = []
    prev = 0
    for m in seq:
        if not 0 <= m < mag_dim:
            raise ValueError(f"magnitude {m} out of range for register dimension {mag_dim}")
        gates.append(build_cyclic_permutation(mag_dim, (m - prev) % mag_dim))
        prev = m
    return gates


@dataclass(frozen=True)
class MagnusPlan:
    """A classical (permutation-only) magnitude schedule.

    ``kind`` is one of ``list``, ``ruler``, ``constant`` or ``random``.  Finite
    schedules (``list``, ``ruler``) repeat cyclically when asked for more steps
    than they hold.
    """

    kind: str
    magnitudes_: tuple[int, ...] = ()
    seed: Optional[int] = None

    @classmethod
    def explicit(cls, magnitudes: Iterable[int]) -> "MagnusPlan":
        mags = tuple(int(m) for m in magnitudes)
        if not mags:
            raise ValueError("explicit plan needs at least one magnitude")
        return cls("list", mags)

    @classmethod
    def ruler(cls) -> "MagnusPlan":
        return cls("ruler")

    @classmethod
    def constant(cls, m: int) -> "MagnusPlan":
        return cls("constant", (int(m),))

    @classmethod
    def random(cls, seed: int, allowed: Optional[Iterable[int]] = None) -> "MagnusPlan":
        return cls("random", tuple(allowed) if allowed else (), int(seed))

    def magnitudes(self, n: int, steps: int) -> list[int]:
        if steps < 0:
            raise ValueError(f"steps must be >= 0, got {steps}")
        if self.kind == "list":
            base = list(self.magnitudes_)
        elif self.kind == "ruler":
            base = ruler_sequence(n)
        elif self.kind == "constant":
            base = list(self.magnitudes_)
        elif self.kind == "random":
            allowed = list(self.magnitudes_) or list(range(1, n // 2 + 1))
            rng = np.random.default_rng(self.seed)
            base = [int(allowed[i]) for i in rng.integers(0, len(allowed), size=steps)]
        else:
            raise ValueError(f"unknown plan kind {self.kind!r}")
        out = [base[i % len(base)] for i in range(steps)] if base else []
        for m in out:
            if not 1 <= m <= n // 2:
                raise ValueError(f"magnitude {m} outside 1..{n // 2} for n={n}")
        return out


# --------------------------------------------------------------------------
# restricted positions


@dataclass(frozen=True)
class RestrictedSet:
    """Positions ``x = anchor (mod modulus)``, minus ``x = anchor (mod excluded)`` if given."""

    n: int
    modulus: int
    anchor: int
    excluded: Optional[int] = None

    def __post_init__(self):
        if self.n % self.modulus:
            raise ValueError(f"modulus {self.modulus} does not divide n={self.n}")
        if self.excluded is not None and (
            self.n % self.excluded or self.excluded % self.modulus
        ):
            raise ValueError(
                f"excluded sublattice {self.excluded} must divide n and be a multiple "
                f"of {self.modulus}"
            )

    @property
    def members(self) -> tuple[int, ...]:
        out = []
        for x in range(self.n):
            if (x - self.anchor) % self.modulus:
                continue
            if self.excluded is not None and (x - self.anchor) % self.excluded == 0:
                continue
            out.append(x)
        return tuple(out)

    def __contains__(self, x: int) -> bool:
        x %= self.n
        if (x - self.anchor) % self.modulus:
            return False
        return self.excluded is None or (x - self.anchor) % self.excluded != 0


def choose_restricted_set(m: int, p: int, q: int, start: int, n: int) -> RestrictedSet:
    """Strategy 2 commitment once Magnus plays a magnitude that is not a multiple of ``pq``.

    A multiple of ``p`` protects the ``q``-class and vice versa; a magnitude
    coprime to both protects the larger ``p``-class.
    """
    if m % (p * q) == 0:
        raise StrategyError(f"magnitude {m} is a multiple of pq={p * q}; commitment not due")
    modulus = q if m % p == 0 else p
    return RestrictedSet(n, modulus, start % n, p * q)


# --------------------------------------------------------------------------
# Derek: simple responders


def derek_strategy1(i: int) -> CoinOp:
    if i < 1:
        raise ValueError(f"steps are numbered from 1, got {i}")
    return HADAMARD if i % 2 else IDENTITY


def derek_single_hadamard(i: int) -> CoinOp:
    if i < 1:
        raise ValueError(f"steps are numbered from 1, got {i}")
    return HADAMARD if i == 1 else IDENTITY


def derek_classical_greedy(modulus: int, forbidden: int, offset: int, m: int) -> int:
    """Direction (0 = +, 1 = -) keeping ``offset`` off ``forbidden`` mod an odd modulus."""
    try:
        return greedy_direction(modulus, forbidden, offset, m)
    except ValueError as exc:
        raise StrategyError(str(exc)) from exc


class Responder:
    """Base class: ``respond`` is called once per step, in order, starting at 1."""

    restricted: Optional[RestrictedSet] = None
    name = "responder"

    def respond(self, i: int, m: int, history: Sequence[int]) -> Coin:
        raise NotImplementedError


class FixedResponder(Responder):
    """Wraps a non-adaptive rule ``i -> CoinOp``."""

    def __init__(self, rule, name: str):
        self.rule = rule
        self.name = name

    def respond(self, i, m, history):
        return self.rule(i)


def identity_responder() -> FixedResponder:
    return FixedResponder(lambda i: IDENTITY, "identity")


def strategy1_responder() -> FixedResponder:
    return FixedResponder(derek_strategy1, "strategy1")


def single_hadamard_responder() -> FixedResponder:
    return FixedResponder(derek_single_hadamard, "single_h")


class ClassicalGreedyResponder(Responder):
    """Classical greedy Derek embedded in the walk through IDENTITY/NOT coin flips.

    The coin register keeps its value between steps, so setting direction ``d``
    means flipping only when the coin currently differs from ``d``.
    """

    name = "classical_greedy"

    def __init__(self, n: int, p: int, c: int, start: int = 0):
        if p % 2 == 0 or n % p:
            raise StrategyError(f"p={p} must be an odd divisor of n={n}")
        if (start - c) % p == 0:
            raise StrategyError(f"start {start} lies in the protected class {c} (mod {p})")
        self.n, self.p, self.c = n, p, c % p
        self.pos = start
        self.coin = 0
        self.restricted = RestrictedSet(n, p, self.c)

    def respond(self, i, m, history):
        d = derek_classical_greedy(self.p, self.c, self.pos, m)
        op = IDENTITY if d == self.coin else NOT
        self.coin = d
        self.pos = (self.pos + (m if d == 0 else -m)) % self.n
        return op


# --------------------------------------------------------------------------
# Derek: Strategy 2 (adaptive, global coin only)


@dataclass
class BranchTracker:
    """Two branches: coin 0 at ``start + offset`` and coin 1 at ``start - offset``.

    IDENTITY moves them to ``start +- (offset + m)``.  NOT swaps the coins before
    the shift, so the coin-0 branch ends at ``start - offset + m`` and the new
    offset is ``m - offset``.
    """

    n: int
    start: int
    offset: int = 0
    committed: bool = False
    modulus: Optional[int] = None

    @property
    def positions(self) -> tuple[int, int]:
        return ((self.start + self.offset) % self.n, (self.start - self.offset) % self.n)

    def advance(self, m: int, flip: bool) -> None:
        self.offset = (m - self.offset if flip else self.offset + m) % self.n


class Strategy2Responder(Responder):
    name = "strategy2"

    def __init__(self, n: int, p: int, q: int, start: int = 0):
        if not (2 < p < q) or p % 2 == 0 or q % 2 == 0:
            raise StrategyError(f"need odd p < q, got p={p}, q={q}")
        if n % (p * q):
            raise StrategyError(f"pq={p * q} does not divide n={n}")
        self.n, self.p, self.q = n, p, q
        self.start = start % n
        self.tracker = BranchTracker(n, self.start)
        self.restricted = None

    def respond(self, i, m, history):
        t = self.tracker
        if i == 1:
            t.advance(m, flip=False)
            if m % (self.p * self.q):
                self._commit(m)
            return HADAMARD
        if not t.committed:
            if m % (self.p * self.q) == 0:
                t.advance(m, flip=False)
                return IDENTITY
            # the offset is still a multiple of pq and m is not a multiple of
            # the new modulus, so IDENTITY already lands off the class
            self._commit(m)
            t.advance(m, flip=False)
            return IDENTITY
        d = derek_classical_greedy(t.modulus, 0, t.offset, m)
        t.advance(m, flip=bool(d))
        assert t.offset % t.modulus != 0
        return NOT if d else IDENTITY

    def _commit(self, m: int) -> None:
        self.restricted = choose_restricted_set(m, self.p, self.q, self.start, self.n)
        self.tracker.committed = True
        self.tracker.modulus = self.restricted.modulus


# --------------------------------------------------------------------------
# Derek: Strategy 3 (position-controlled)


@dataclass
class ShadowState:
    """Derek's classical copy of the walk: ``(position, coin) -> real amplitude``."""

    n: int
    amps: dict[tuple[int, int], float] = field(default_factory=dict)

    def positions(self) -> list[int]:
        return sorted({x for x, _ in self.amps})

    def components(self, x: int) -> tuple[float, float]:
        return self.amps.get((x, 0), 0.0), self.amps.get((x, 1), 0.0)

    def outputs(self, x: int, op: CoinOp, m: int) -> dict[tuple[int, int], float]:
        b0, b1 = op.matrix.real @ np.array(self.components(x))
        out = {}
        if abs(b0) > AMP_TOL:
            out[((x + m) % self.n, 0)] = float(b0)
        if abs(b1) > AMP_TOL:
            out[((x - m) % self.n, 1)] = float(b1)
        return out

    def apply(self, ops: dict[int, CoinOp], m: int) -> None:
        new: dict[tuple[int, int], float] = {}
        for x in self.positions():
            for key, a in self.outputs(x, ops.get(x, IDENTITY), m).items():
                new[key] = new.get(key, 0.0) + a
        self.amps = {k: a for k, a in sorted(new.items()) if abs(a) > AMP_TOL}

    def probability(self, x: int) -> float:
        a0, a1 = self.components(x)
        return a0 * a0 + a1 * a1


def equal_amplitude_condition(a0: float, a1: float, tol: float = AMP_TOL) -> bool:
    """Both coin components equal in magnitude, or one of them vanishes."""
    return abs(abs(a0) - abs(a1)) <= tol or abs(a0) <= tol or abs(a1) <= tol


class Strategy3Responder(Responder):
    """Position-controlled Derek that protects an equally spaced class mod ``p``.

    After the opening Hadamard the class is fixed to the first residue (counted
    from ``start + 1``) that misses every position visited or occupied so far.
    Each later step is planned on the shadow state: every occupied position
    gets one of I, X, H or H-then-X such that no amplitude reaches the class,
    the two coin components at every position keep equal magnitudes (or one
    vanishes), and no position collects the whole probability.  At steps in
    ``hadamard_steps`` single-component positions are split with H where
    that stays feasible.
    """

    name = "strategy3"
    SEARCH_LIMIT = 200_000
    POINT_MASS_TOL = 1e-9

    def __init__(self, n: int, p: int, start: int = 0, hadamard_steps: Iterable[int] = (1,)):
        hs = set(hadamard_steps)
        if p <= 3:
            raise StrategyError(f"strategy 3 needs p > 3, got {p}")
        if n % p:
            raise StrategyError(f"p={p} does not divide n={n}")
        if 1 not in hs:
            raise StrategyError("hadamard_steps must contain step 1")
        self.n, self.p = n, p
        self.start = start % n
        self.hadamard_steps = frozenset(hs)
        self.shadow = ShadowState(n, {(self.start, 0): 1.0})
        self.visited = {self.start}
        self.restricted = None

    def respond(self, i, m, history):
        if i == 1:
            ops = {self.start: HADAMARD}
            self._advance(ops, m)
            if self.n % 2 or m != self.n // 2:
                self._commit()
            return PositionControlledCoin(ops)
        if self.restricted is None:
            # even n: wait while Magnus keeps playing n/2
            ops = {x: IDENTITY for x in self.shadow.positions()}
            self._advance(ops, m)
            if m != self.n // 2:
                self._commit()
            return PositionControlledCoin(ops)
        ops = self._plan(m, split=i in self.hadamard_steps)
        self._advance(ops, m)
        return PositionControlledCoin(ops)

    def _advance(self, ops, m):
        self.shadow.apply(ops, m)
        for x in self.shadow.positions():
            if self.shadow.probability(x) >= 1 - self.POINT_MASS_TOL:
                self.visited.add(x)

    def _commit(self):
        blocked = {x % self.p for x in self.visited | set(self.shadow.positions())}
        for k in range(1, self.p):
            anchor = (self.start + k) % self.n
            if anchor % self.p not in blocked:
                self.restricted = RestrictedSet(self.n, self.p, anchor % self.p)
                return
        raise StrategyError("no residue class disjoint from the occupied positions")

    def _options(self, x: int, split: bool) -> list[CoinOp]:
        a0, a1 = self.shadow.components(x)
        single = abs(a0) <= AMP_TOL or abs(a1) <= AMP_TOL
        if single:
            keep = [IDENTITY, NOT]
            return [HADAMARD] + keep if split else keep
        if not equal_amplitude_condition(a0, a1):
            return [IDENTITY, NOT]
        merge = [HADAMARD, HADAMARD_NOT]
        return [IDENTITY, NOT] + merge if split else merge + [IDENTITY, NOT]

    def _plan(self, m: int, split: bool) -> dict[int, CoinOp]:
        positions = self.shadow.positions()
        occupied = set(positions)
        restricted = self.restricted
        choices: list[list[tuple[CoinOp, dict]]] = []
        for x in positions:
            opts = []
            for op in self._options(x, split):
                out = self.shadow.outputs(x, op, m)
                if not any(y in restricted for y, _ in out):
                    opts.append((op, out))
            if not opts:
                raise StrategyError(f"no safe coin operation at position {x} for m={m}")
            choices.append(opts)

        n = self.n
        order = {x: k for k, x in enumerate(positions)}
        # slot (y, 0) is fed only from y - m and slot (y, 1) only from y + m
        sources = lambda y: ((y - m) % n, (y + m) % n)  # noqa: E731

        def settled(y: int, depth: int) -> bool:
            return all(s not in occupied or order[s] <= depth for s in sources(y))

        landed: dict[tuple[int, int], float] = {}
        picked: list[CoinOp] = []
        budget = [self.SEARCH_LIMIT]

        def check(y: int) -> bool:
            a0, a1 = landed.get((y, 0), 0.0), landed.get((y, 1), 0.0)
            if a0 * a0 + a1 * a1 >= 1 - self.POINT_MASS_TOL:
                return False
            return equal_amplitude_condition(a0, a1)

        def search(depth: int) -> bool:
            if depth == len(positions):
                return True
            budget[0] -= 1
            if budget[0] < 0:
                return False
            for op, out in choices[depth]:
                for key, a in out.items():
                    landed[key] = landed.get(key, 0.0) + a
                x = positions[depth]
                targets = {(x + m) % n, (x - m) % n}
                if all(check(y) for y in targets if settled(y, depth)):
                    picked.append(op)
                    if search(depth + 1):
                        return True
                    picked.pop()
                for key, a in out.items():
                    landed[key] -= a
                    if abs(landed[key]) <= AMP_TOL:
                        del landed[key]
            return False

        if not search(0):
            raise StrategyError(f"no admissible position-controlled move for m={m}")
        return dict(zip(positions, picked))


def classical_direction_ops(directions: Sequence[int]) -> list[CoinOp]:
    """IDENTITY/NOT sequence steering the coin register through ``directions`` from 0."""
    ops, coin = [], 0
    for d in directions:
        ops.append(IDENTITY if d == coin else NOT)
        coin = d
    return ops
