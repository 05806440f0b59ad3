"""Classical Magnus-Derek baseline and a brute-force minimax oracle."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Sequence

MAX_ORACLE_N = 9


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def smallest_odd_prime_factor(n: int) -> Optional[int]:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    while n % 2 == 0:
        n //= 2
    if n == 1:
        return None
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


def f_star(n: int) -> int:
    """Number of positions visited under optimal play by both sides."""
    p = smallest_odd_prime_factor(n)
    if p is None:
        return n
    return (p - 1) * n // p


def r_opt_pow2(n: int) -> int:
    if n < 2 or not is_power_of_two(n):
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    return n - 1


def hurkens_bound(n: int) -> int:
    """Upper bound on the moves Magnus needs to reach ``f_star(n)`` positions."""
    if n < 3 or is_power_of_two(n):
        raise ValueError(f"bound defined for n >= 3 not a power of two, got {n}")
    return f_star(n) * math.ceil(math.log2(n - 1))


def oracle_horizon(n: int) -> int:
    return r_opt_pow2(n) if is_power_of_two(n) else hurkens_bound(n)


def _move(pos: int, m: int, d: int, n: int) -> int:
    return (pos + (m if d == 0 else -m)) % n


def simulate_classical(
    n: int, start: int, magnitudes: Sequence[int], directions: Sequence[int]
) -> tuple[set[int], list[int]]:
    """Play the given moves; returns ``(visited, trace)`` with ``trace[0] == start``."""
    if len(magnitudes) != len(directions):
        raise ValueError(
            f"{len(magnitudes)} magnitudes but {len(directions)} directions"
        )
    if not 0 <= start < n:
        raise ValueError(f"start {start} out of range for n={n}")
    trace = [start]
    for m, d in zip(magnitudes, directions):
        if not 0 <= m <= n // 2:
            raise ValueError(f"magnitude {m} out of range 0..{n // 2}")
        if d not in (0, 1):
            raise ValueError(f"direction must be 0 or 1, got {d!r}")
        trace.append(_move(trace[-1], m, d, n))
    return set(trace), trace


def greedy_direction(modulus: int, forbidden: int, offset: int, m: int) -> int:
    """Direction keeping ``offset`` off the ``forbidden`` residue mod an odd modulus.

    Returns 0 (clockwise) when ``offset + m`` is safe, otherwise 1.  Both
    directions cannot be blocked: that would force ``2m = 0`` and hence
    ``offset = forbidden`` for odd moduli.
    """
    if modulus % 2 == 0:
        raise ValueError(f"modulus must be odd, got {modulus}")
    offset %= modulus
    forbidden %= modulus
    if offset == forbidden:
        raise ValueError(f"offset already on forbidden residue {forbidden} (mod {modulus})")
    if (offset + m) % modulus != forbidden:
        return 0
    assert (offset - m) % modulus != forbidden
    return 1


def greedy_derek_classical(
    n: int, p: int, c: int, magnitudes: Sequence[int], start: int = 0
) -> tuple[list[int], set[int]]:
    """Derek keeps the token out of the class ``x = c (mod p)``."""
    if p % 2 == 0 or n % p:
        raise ValueError(f"p={p} must be an odd divisor of n={n}")
    if start % p == c % p:
        raise ValueError(f"start {start} lies in the protected class {c} (mod {p})")
    pos = start
    directions = []
    for m in magnitudes:
        d = greedy_direction(p, c, pos, m)
        directions.append(d)
        pos = _move(pos, m, d, n)
    visited, _ = simulate_classical(n, start, magnitudes, directions)
    return directions, visited


def minimax_value(n: int, horizon: int) -> int:
    """Exact game value (positions visited) with adaptive play over ``horizon`` moves."""
    if n > MAX_ORACLE_N:
        raise ValueError(f"oracle limited to n <= {MAX_ORACLE_N}, got {n}")
    if n < 2 or horizon < 1:
        raise ValueError(f"need n >= 2 and horizon >= 1, got n={n}, horizon={horizon}")
    full = (1 << n) - 1
    moves = range(1, n // 2 + 1)

    def rotate(mask: int, k: int) -> int:
        k %= n
        return ((mask >> k) | (mask << (n - k))) & full

    def reflect(mask: int) -> int:
        out = 0
        for x in range(n):
            if mask >> x & 1:
                out |= 1 << (-x % n)
        return out

    # Keys are normalised so the token sits at 0; the mirror image is equivalent.
    @lru_cache(maxsize=None)
    def value(mask: int, steps: int) -> int:
        if steps == 0 or mask == full:
            return bin(mask).count("1")
        best = 0
        for m in moves:
            worst = n
            for shift in (m, -m):
                nxt = rotate(mask, shift)
                nxt |= 1
                worst = min(worst, value(min(nxt, reflect(nxt)), steps - 1))
                if worst <= best:
                    break
            best = max(best, worst)
        return best

    return value(1, horizon)
