import itertools

import numpy as np
import pytest

from qmd.classical import (
    f_star,
    greedy_derek_classical,
    hurkens_bound,
    minimax_value,
    oracle_horizon,
    r_opt_pow2,
    simulate_classical,
    smallest_odd_prime_factor,
)
from qmd.strategies import ruler_sequence


@pytest.mark.parametrize("n,expected", [(8, 8), (15, 10), (6, 4), (2, 2), (9, 6), (35, 28)])
def test_f_star(n, expected):
    assert f_star(n) == expected


@pytest.mark.parametrize("n,expected", [(15, 3), (16, None), (35, 5), (2, None), (49, 7), (12, 3)])
def test_smallest_odd_prime_factor(n, expected):
    assert smallest_odd_prime_factor(n) == expected


def test_r_opt_pow2():
    assert [r_opt_pow2(n) for n in (2, 8, 16)] == [1, 7, 15]
    with pytest.raises(ValueError):
        r_opt_pow2(6)


def test_hurkens_bound():
    assert hurkens_bound(15) == 40
    assert hurkens_bound(6) == 12
    assert hurkens_bound(9) == 18
    for bad in (2, 8, 16):
        with pytest.raises(ValueError):
            hurkens_bound(bad)


def test_simulate_classical():
    visited, trace = simulate_classical(4, 0, [2, 1, 2], [0, 0, 0])
    assert trace == [0, 2, 3, 1] and visited == {0, 1, 2, 3}
    visited, trace = simulate_classical(4, 0, [2, 1, 2], [0, 1, 1])
    assert trace == [0, 2, 1, 3] and visited == {0, 1, 2, 3}
    assert simulate_classical(5, 3, [], []) == ({3}, [3])
    with pytest.raises(ValueError):
        simulate_classical(4, 0, [1, 2], [0])


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_ruler_visits_everything_for_every_direction_sequence(n):
    mags = ruler_sequence(n)
    for dirs in itertools.product((0, 1), repeat=n - 1):
        assert len(simulate_classical(n, 0, mags, dirs)[0]) == n


def test_greedy_constant_magnitudes():
    _, visited = greedy_derek_classical(15, 3, 1, [1] * 30)
    assert not visited & {1, 4, 7, 10, 13}


def test_greedy_soundness_randomised():
    rng = np.random.default_rng(2024)
    cases = 0
    for n, p in [(9, 3), (15, 3), (15, 5), (25, 5), (21, 7), (12, 3), (45, 5)]:
        for _ in range(200):
            c = int(rng.integers(1, p))
            mags = [int(m) for m in rng.integers(1, n // 2 + 1, size=40)]
            _, visited = greedy_derek_classical(n, p, c, mags)
            assert all(x % p != c for x in visited)
            assert len(visited) <= n - n // p
            cases += 1
    assert cases >= 1000


def test_greedy_rejects_start_in_class():
    with pytest.raises(ValueError):
        greedy_derek_classical(9, 3, 0, [1, 2])


def test_minimax_examples():
    assert minimax_value(4, 3) == 4
    assert minimax_value(3, 2) == 2
    assert minimax_value(6, hurkens_bound(6)) == 4


def test_minimax_short_horizon_is_smaller():
    # one move can visit at most two positions
    assert minimax_value(8, 1) == 2


def test_minimax_brute_force_agreement():
    """Unmemoised full game tree on tiny instances."""

    def brute(n, pos, visited, steps):
        if steps == 0:
            return len(visited)
        return max(
            min(brute(n, (pos + s) % n, visited | {(pos + s) % n}, steps - 1) for s in (m, -m))
            for m in range(1, n // 2 + 1)
        )

    for n in range(2, 7):
        for h in range(1, 5):
            assert minimax_value(n, h) == brute(n, 0, frozenset({0}), h)


def test_minimax_guard():
    with pytest.raises(ValueError):
        minimax_value(10, 3)


@pytest.mark.parametrize("n", range(2, 10))
def test_oracle_equals_f_star(n):
    assert minimax_value(n, oracle_horizon(n)) == f_star(n)
