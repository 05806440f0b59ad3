import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmd.classical import simulate_classical
from qmd.engine import (
    HADAMARD,
    IDENTITY,
    NOT,
    CoinOp,
    GameDims,
    MagnitudeGate,
    PositionControlledCoin,
    QState,
    apply_coin,
    apply_controlled_coin,
    apply_magnitude_gate,
    apply_shift,
    build_classical_move_operator,
    build_cyclic_permutation,
    new_state,
    position_marginal,
    step,
)
from qmd.strategies import classical_direction_ops, magnus_gates_from_magnitudes
from qmd.suites import random_state, random_unitary

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=2, max_value=16)


def basis(dims, m, d, x):
    amp = np.zeros(dims.total, dtype=complex)
    amp[dims.index(m, d, x)] = 1
    return QState(dims, amp)


def dense_shift(dims):
    """Shift operator assembled term by term as a dense permutation matrix."""
    n = dims.n
    S = np.zeros((dims.total, dims.total))
    for m in range(dims.mag_dim):
        for k in range(n):
            S[dims.index(m, 0, (k + m) % n), dims.index(m, 0, k)] = 1
            S[dims.index(m, 1, (k - m) % n), dims.index(m, 1, k)] = 1
    return S


def dense_step(dims, M, D):
    return dense_shift(dims) @ np.kron(np.kron(M, D), np.eye(dims.n))


def test_dims():
    d = GameDims(15)
    assert (d.mag_dim, d.coin_dim, d.total) == (8, 2, 240)
    assert GameDims(8).mag_dim == 5
    with pytest.raises(ValueError):
        GameDims(1)


def test_index_layout_matches_tensor():
    d = GameDims(5)
    s = basis(d, 2, 1, 3)
    assert s.tensor[2, 1, 3] == 1
    assert d.index(2, 1, 3) == 2 * 10 + 5 + 3


def test_new_state():
    s = new_state(GameDims(4), 0)
    assert s.amplitude(0, 0, 0) == 1 and s.norm() == 1
    s = new_state(GameDims(15), 7)
    assert s.amplitude(0, 0, 7) == 1
    with pytest.raises(ValueError):
        new_state(GameDims(4), 5)


def test_state_is_immutable():
    s = new_state(GameDims(4))
    with pytest.raises(ValueError):
        s.amp[0] = 2


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        CoinOp([[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        MagnitudeGate(np.ones((3, 3)))
    with pytest.raises(ValueError):
        CoinOp(np.eye(3))


def test_named_coins():
    np.testing.assert_allclose(HADAMARD.matrix, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    np.testing.assert_array_equal(NOT.matrix, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(IDENTITY.matrix, np.eye(2))


def test_magnitude_gate_examples():
    d = GameDims(8)
    s = new_state(d)
    same = apply_magnitude_gate(s, MagnitudeGate(np.eye(5)))
    np.testing.assert_array_equal(same.amp, s.amp)
    out = apply_magnitude_gate(s, build_cyclic_permutation(5, 4))
    np.testing.assert_array_equal(out.amp, basis(d, 4, 0, 0).amp)
    with pytest.raises(ValueError):
        apply_magnitude_gate(s, build_cyclic_permutation(4, 1))


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=sizes)
def test_magnitude_gate_preserves_norm(seed, n):
    rng = np.random.default_rng(seed)
    dims = GameDims(n)
    psi = random_state(dims, rng)
    out = apply_magnitude_gate(psi, MagnitudeGate(random_unitary(dims.mag_dim, rng)))
    assert abs(out.norm() - psi.norm()) <= 1e-12


def test_coin_examples():
    d = GameDims(4)
    s = new_state(d)
    np.testing.assert_array_equal(apply_coin(s, IDENTITY).amp, s.amp)
    h = apply_coin(s, HADAMARD)
    expected = (basis(d, 0, 0, 0).amp + basis(d, 0, 1, 0).amp) / np.sqrt(2)
    np.testing.assert_allclose(h.amp, expected, atol=1e-15)
    out = apply_coin(basis(d, 0, 1, 0), NOT)
    np.testing.assert_array_equal(out.amp, basis(d, 0, 0, 0).amp)


def test_controlled_coin_examples():
    d = GameDims(4)
    psi = random_state(d, np.random.default_rng(1))
    np.testing.assert_array_equal(
        apply_controlled_coin(psi, PositionControlledCoin({})).amp, psi.amp
    )
    flip0 = PositionControlledCoin({0: NOT})
    np.testing.assert_array_equal(
        apply_controlled_coin(basis(d, 0, 0, 0), flip0).amp, basis(d, 0, 1, 0).amp
    )
    np.testing.assert_array_equal(
        apply_controlled_coin(basis(d, 0, 0, 1), flip0).amp, basis(d, 0, 0, 1).amp
    )
    with pytest.raises(ValueError):
        apply_controlled_coin(psi, PositionControlledCoin({4: NOT}))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=sizes)
def test_global_coin_equals_controlled_everywhere(seed, n):
    rng = np.random.default_rng(seed)
    dims = GameDims(n)
    psi = random_state(dims, rng)
    D = CoinOp(random_unitary(2, rng))
    a = apply_coin(psi, D)
    b = apply_controlled_coin(psi, PositionControlledCoin({x: D for x in range(n)}))
    assert np.abs(a.amp - b.amp).max() <= 1e-15


def test_shift_examples():
    d = GameDims(8)
    np.testing.assert_array_equal(apply_shift(basis(d, 2, 0, 3)).amp, basis(d, 2, 0, 5).amp)
    np.testing.assert_array_equal(apply_shift(basis(d, 1, 1, 0)).amp, basis(d, 1, 1, 7).amp)
    psi = random_state(d, np.random.default_rng(3))
    out = apply_shift(psi)
    np.testing.assert_array_equal(out.tensor[0], psi.tensor[0])


@pytest.mark.parametrize("n", [2, 3, 4, 7, 8, 15])
def test_shift_matches_dense_permutation(n):
    dims = GameDims(n)
    S = dense_shift(dims)
    assert sorted(np.flatnonzero(S.sum(axis=0))) == list(range(dims.total))
    psi = random_state(dims, np.random.default_rng(n))
    np.testing.assert_allclose(apply_shift(psi).amp, S @ psi.amp, atol=1e-15)


def test_step_hand_example():
    d = GameDims(4)
    out = step(new_state(d), build_cyclic_permutation(3, 2), HADAMARD)
    expected = (basis(d, 2, 0, 2).amp + basis(d, 2, 1, 2).amp) / np.sqrt(2)
    np.testing.assert_allclose(out.amp, expected, atol=1e-15)


def test_step_identity_on_zero_magnitude():
    d = GameDims(6)
    psi = random_state(d, np.random.default_rng(0)).tensor.copy()
    psi[1:] = 0
    psi /= np.linalg.norm(psi)
    s = QState.from_tensor(d, psi)
    out = step(s, MagnitudeGate(np.eye(4)), IDENTITY)
    np.testing.assert_allclose(out.amp, s.amp, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(min_value=2, max_value=9))
def test_step_matches_kronecker_oracle(seed, n):
    rng = np.random.default_rng(seed)
    dims = GameDims(n)
    M = random_unitary(dims.mag_dim, rng)
    D = random_unitary(2, rng)
    psi = random_state(dims, rng)
    out = step(psi, MagnitudeGate(M), CoinOp(D))
    np.testing.assert_allclose(out.amp, dense_step(dims, M, D) @ psi.amp, atol=1e-12)


def test_k_steps_equal_operator_product():
    rng = np.random.default_rng(11)
    dims = GameDims(5)
    ops = [(random_unitary(dims.mag_dim, rng), random_unitary(2, rng)) for _ in range(4)]
    psi = new_state(dims, 2)
    product = np.eye(dims.total)
    for M, D in ops:
        psi = step(psi, MagnitudeGate(M), CoinOp(D))
        product = dense_step(dims, M, D) @ product
    np.testing.assert_allclose(psi.amp, product @ new_state(dims, 2).amp, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=sizes)
def test_step_is_linear(seed, n):
    rng = np.random.default_rng(seed)
    dims = GameDims(n)
    M = MagnitudeGate(random_unitary(dims.mag_dim, rng))
    D = CoinOp(random_unitary(2, rng))
    psi, phi = random_state(dims, rng), random_state(dims, rng)
    a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
    lhs = step(QState(dims, a * psi.amp + b * phi.amp), M, D).amp
    rhs = a * step(psi, M, D).amp + b * step(phi, M, D).amp
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_position_marginal_examples():
    d = GameDims(4)
    np.testing.assert_array_equal(position_marginal(basis(d, 0, 0, 3)), [0, 0, 0, 1])
    s = QState(d, (basis(d, 0, 0, 1).amp + basis(d, 0, 1, 3).amp) / np.sqrt(2))
    np.testing.assert_allclose(position_marginal(s), [0, 0.5, 0, 0.5])


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=sizes)
def test_marginal_sums_to_one(seed, n):
    psi = random_state(GameDims(n), np.random.default_rng(seed))
    assert abs(position_marginal(psi).sum() - 1) <= 1e-12


def test_cyclic_permutation():
    np.testing.assert_array_equal(build_cyclic_permutation(4, 0).matrix, np.eye(4))
    g = build_cyclic_permutation(5, 4)
    assert g.matrix[4, 0] == 1
    for dim in range(1, 8):
        for shift in range(dim):
            mat = build_cyclic_permutation(dim, shift).matrix
            assert set(np.unique(mat.real)) <= {0, 1}
    with pytest.raises(ValueError):
        build_cyclic_permutation(3, 3)


def test_classical_move_operator():
    A = build_classical_move_operator(4, 2, 0)
    assert A[1, 3] == 1
    A = build_classical_move_operator(5, 1, 1)
    assert A[4, 0] == 1
    with pytest.raises(ValueError):
        build_classical_move_operator(5, 3, 0)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=sizes)
def test_classical_operator_product_matches_simulation(seed, n):
    rng = np.random.default_rng(seed)
    mags = [int(m) for m in rng.integers(0, n // 2 + 1, size=12)]
    dirs = [int(d) for d in rng.integers(0, 2, size=12)]
    v = np.zeros(n)
    v[0] = 1
    for m, d in zip(mags, dirs):
        v = build_classical_move_operator(n, m, d) @ v
    _, path = simulate_classical(n, 0, mags, dirs)
    assert np.argmax(v) == path[-1] and v.sum() == 1


@settings(max_examples=100, deadline=None)
@given(seed=seeds, n=sizes)
def test_classical_embedding(seed, n):
    rng = np.random.default_rng(seed)
    start = int(rng.integers(n))
    mags = [int(m) for m in rng.integers(1, n // 2 + 1, size=30)]
    dirs = [int(d) for d in rng.integers(0, 2, size=30)]
    _, path = simulate_classical(n, start, mags, dirs)
    dims = GameDims(n)
    psi = new_state(dims, start)
    gates = magnus_gates_from_magnitudes(mags, dims.mag_dim)
    for t, (g, op) in enumerate(zip(gates, classical_direction_ops(dirs)), start=1):
        psi = step(psi, g, op)
        expected = np.zeros(n)
        expected[path[t]] = 1
        assert np.array_equal(position_marginal(psi), expected)
