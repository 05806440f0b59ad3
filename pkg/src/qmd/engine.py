"""Dense state-vector simulation of the three-register walk on an n-cycle.

The state lives in ``C^(n//2 + 1) (x) C^2 (x) C^n`` (magnitude, coin, position)
and is stored flat with ``idx(m, d, x) = m * 2n + d * n + x``.  Every public
operation is pure: it returns a new :class:`QState`.

The ``*_array`` kernels operate on arrays whose trailing axes are
``(mag_dim, 2, n)``; leading axes are treated as a batch.  The measured-walk
code in :mod:`qmd.analysis` uses them to evolve one residual per target at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Union

import numpy as np

UNITARY_TOL = 1e-12


def _check_unitary(matrix: np.ndarray, what: str) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {matrix.shape}")
    err = np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])).max()
    if err > UNITARY_TOL:
        raise ValueError(f"{what} is not unitary (max deviation {err:.3e})")


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GameDims:
    """Register sizes for an ``n``-node cycle."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"node count must be an integer >= 2, got {self.n!r}")

    @property
    def mag_dim(self) -> int:
        return self.n // 2 + 1

    @property
    def coin_dim(self) -> int:
        return 2

    @property
    def total(self) -> int:
        return self.mag_dim * 2 * self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.mag_dim, 2, self.n)

    def index(self, m: int, d: int, x: int) -> int:
        return m * 2 * self.n + d * self.n + x


@dataclass(frozen=True, eq=False)
class QState:
    dims: GameDims
    amp: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amp, dtype=np.complex128).reshape(-1)
        if amp.shape[0] != self.dims.total:
            raise ValueError(
                f"amplitude vector has length {amp.shape[0]}, expected {self.dims.total}"
            )
        amp.flags.writeable = False
        object.__setattr__(self, "amp", amp)

    @classmethod
    def from_tensor(cls, dims: GameDims, tensor: np.ndarray) -> "QState":
        return cls(dims, np.asarray(tensor).reshape(-1))

    @property
    def tensor(self) -> np.ndarray:
        """Read-only view with axes ``(magnitude, coin, position)``."""
        return self.amp.reshape(self.dims.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def amplitude(self, m: int, d: int, x: int) -> complex:
        return complex(self.amp[self.dims.index(m, d, x)])


@dataclass(frozen=True, eq=False)
class MagnitudeGate:
    """Magnus's unitary on the magnitude register."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        _check_unitary(mat, "magnitude gate")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class CoinOp:
    """Derek's 2x2 unitary on the coin register."""

    matrix: np.ndarray
    name: str = "U"

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.shape != (2, 2):
            raise ValueError(f"coin operator must be 2x2, got {mat.shape}")
        _check_unitary(mat, "coin operator")
        object.__setattr__(self, "matrix", mat)

    def then(self, other: "CoinOp") -> "CoinOp":
        """Operator applying ``self`` first and ``other`` second."""
        return CoinOp(other.matrix @ self.matrix, f"{other.name}{self.name}")

    def __repr__(self) -> str:
        return f"CoinOp({self.name})"


IDENTITY = CoinOp(np.eye(2), "I")
NOT = CoinOp([[0, 1], [1, 0]], "X")
HADAMARD = CoinOp(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")


@dataclass(frozen=True, eq=False)
class PositionControlledCoin:
    """``sum_x 1 (x) D^(x) (x) |x><x|``; positions not listed get the identity."""

    per_position: Mapping[int, CoinOp] = field(default_factory=dict)

    def __post_init__(self):
        for x, op in self.per_position.items():
            if int(x) != x or x < 0:
                raise ValueError(f"invalid position key {x!r}")
            if not isinstance(op, CoinOp):
                raise TypeError(f"position {x}: expected CoinOp, got {type(op).__name__}")
        object.__setattr__(self, "per_position", dict(sorted(self.per_position.items())))

    def matrices(self, n: int) -> np.ndarray:
        """Stack of per-position coin matrices with shape ``(n, 2, 2)``."""
        out = np.broadcast_to(np.eye(2, dtype=np.complex128), (n, 2, 2)).copy()
        for x, op in self.per_position.items():
            if x >= n:
                raise ValueError(f"position key {x} out of range for n={n}")
            out[x] = op.matrix
        return out

    def describe(self) -> str:
        if not self.per_position:
            return "I"
        return " ".join(f"{x}:{op.name}" for x, op in self.per_position.items())


Coin = Union[CoinOp, PositionControlledCoin]


def describe_coin(coin: Coin) -> str:
    if isinstance(coin, PositionControlledCoin):
        return coin.describe()
    return coin.name


# --------------------------------------------------------------------------
# array kernels (trailing axes: magnitude, coin, position)


def magnitude_array(arr: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    shape = arr.shape
    flat = arr.reshape(shape[:-3] + (shape[-3], shape[-2] * shape[-1]))
    return (matrix @ flat).reshape(shape)


def coin_array(arr: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return matrix @ arr


def controlled_coin_array(arr: np.ndarray, stack: np.ndarray) -> np.ndarray:
    a, b = arr[..., 0, :], arr[..., 1, :]
    out = np.empty_like(arr)
    out[..., 0, :] = stack[:, 0, 0] * a + stack[:, 0, 1] * b
    out[..., 1, :] = stack[:, 1, 0] * a + stack[:, 1, 1] * b
    return out


@lru_cache(maxsize=None)
def _shift_sources(mag_dim: int, n: int) -> np.ndarray:
    # out[m, 0, x] takes from x - m, out[m, 1, x] from x + m
    x = np.arange(n)
    m = np.arange(mag_dim)[:, None]
    idx = np.stack([(x - m) % n, (x + m) % n], axis=1)
    idx.flags.writeable = False
    return idx


def shift_array(arr: np.ndarray) -> np.ndarray:
    idx = _shift_sources(arr.shape[-3], arr.shape[-1])
    return np.take_along_axis(arr, np.broadcast_to(idx, arr.shape), axis=-1)


def any_coin_array(arr: np.ndarray, coin: Coin) -> np.ndarray:
    if isinstance(coin, PositionControlledCoin):
        return controlled_coin_array(arr, coin.matrices(arr.shape[-1]))
    if isinstance(coin, CoinOp):
        return coin_array(arr, coin.matrix)
    raise TypeError(f"expected CoinOp or PositionControlledCoin, got {type(coin).__name__}")


def step_array(arr: np.ndarray, gate: MagnitudeGate, coin: Coin) -> np.ndarray:
    if gate.dim != arr.shape[-3]:
        raise ValueError(
            f"magnitude gate has dimension {gate.dim}, register has {arr.shape[-3]}"
        )
    return shift_array(any_coin_array(magnitude_array(arr, gate.matrix), coin))


# --------------------------------------------------------------------------
# state-level operations


def new_state(dims: GameDims, start: int = 0) -> QState:
    """Basis state ``|0, 0, start>``."""
    if int(start) != start or not 0 <= start < dims.n:
        raise ValueError(f"start position {start!r} out of range for n={dims.n}")
    amp = np.zeros(dims.total, dtype=np.complex128)
    amp[dims.index(0, 0, start)] = 1.0
    return QState(dims, amp)


def apply_magnitude_gate(state: QState, gate: MagnitudeGate) -> QState:
    if gate.dim != state.dims.mag_dim:
        raise ValueError(
            f"magnitude gate has dimension {gate.dim}, register has {state.dims.mag_dim}"
        )
    return QState.from_tensor(state.dims, magnitude_array(state.tensor, gate.matrix))


def apply_coin(state: QState, coin: CoinOp) -> QState:
    return QState.from_tensor(state.dims, coin_array(state.tensor, coin.matrix))


def apply_controlled_coin(state: QState, coin: PositionControlledCoin) -> QState:
    stack = coin.matrices(state.dims.n)
    return QState.from_tensor(state.dims, controlled_coin_array(state.tensor, stack))


def apply_shift(state: QState) -> QState:
    return QState.from_tensor(state.dims, shift_array(state.tensor))


def step(state: QState, gate: MagnitudeGate, coin: Coin) -> QState:
    """One move: magnitude gate, then Derek's coin, then the shift."""
    return QState.from_tensor(state.dims, step_array(state.tensor, gate, coin))


def position_marginal(state: QState) -> np.ndarray:
    """Diagonal of the reduced position density matrix."""
    return (np.abs(state.tensor) ** 2).sum(axis=(0, 1))


def build_cyclic_permutation(dim: int, shift: int) -> MagnitudeGate:
    """Gate mapping ``|j> -> |(j + shift) mod dim>``."""
    if not 0 <= shift < dim:
        raise ValueError(f"shift {shift} out of range for dimension {dim}")
    mat = np.zeros((dim, dim))
    for j in range(dim):
        mat[(j + shift) % dim, j] = 1.0
    return MagnitudeGate(mat)


def build_classical_move_operator(n: int, m: int, d: int) -> np.ndarray:
    """Permutation ``|k> -> |k + (-1)^d m mod n>`` acting on positions only."""
    if not 0 <= m <= n // 2:
        raise ValueError(f"magnitude {m} out of range 0..{n // 2}")
    if d not in (0, 1):
        raise ValueError(f"direction must be 0 or 1, got {d!r}")
    sign = -1 if d else 1
    mat = np.zeros((n, n))
    for k in range(n):
        mat[(k + sign * m) % n, k] = 1.0
    return mat
