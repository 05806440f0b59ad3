"""Simulator for the quantum Magnus-Derek game on an n-cycle."""

from .engine import (
    HADAMARD,
    IDENTITY,
    NOT,
    CoinOp,
    GameDims,
    MagnitudeGate,
    PositionControlledCoin,
    QState,
    new_state,
    position_marginal,
    step,
)
from .strategies import MagnusPlan, RestrictedSet, StrategyError
from .analysis import (
    Trace,
    attained,
    concurrent_hitting_time,
    measured_walk,
    run_walk,
    visit_report,
    visited_set,
)

__version__ = "0.1.0"
