"""Pseudopure-state bookkeeping for bulk-ensemble NMR.

A room-temperature N-spin liquid sample prepared in a pseudopure state
is (1 - epsilon) of the maximally mixed state plus epsilon of the pure
target. The polarization epsilon falls off as alpha * N / 2^N, and two
thresholds split parameter space: at or below
eta = 1 / (1 + 2^(2N-1)) every canonical weight vector is nonnegative
(so the state is unentangleable and the hidden-variable engine applies),
while above eta_prime = 1 / (1 + 2^(N-1)) entangled states of the
pseudopure form exist. Between the two nothing is settled; we only
label the region.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadEpsilon, NegativeQuasiWeight
from .quasi import QuasiState

# room-temperature proton polarization scale at ~10 T
DEFAULT_ALPHA = 2e-5

CLAMP_TOL = 1e-12


class Regime(enum.Enum):
    UNENTANGLEABLE = "unentangleable"  # epsilon <= eta
    OPEN_REGION = "open_region"  # eta < epsilon <= eta_prime
    ENTANGLED_STATES_EXIST = "entangled_states_exist"  # epsilon > eta_prime


@dataclass(frozen=True)
class NmrParams:
    """Sample parameters: polarization scale and register width."""

    alpha: float
    num_qubits: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha {self.alpha} outside (0, 1)")
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits {self.num_qubits} < 1")


@dataclass(frozen=True)
class Thresholds:
    """A polarization classified against the two N-dependent bounds."""

    epsilon: float
    eta: float
    eta_prime: float
    regime: Regime


def epsilon_pseudopure(params: NmrParams) -> float:
    """Achievable polarization alpha * N / 2^N for an N-spin sample."""
    n = params.num_qubits
    return params.alpha * n / 2.0**n


def thresholds(epsilon: float, num_qubits: int) -> Thresholds:
    if not 0.0 <= epsilon <= 1.0:
        raise BadEpsilon(f"epsilon {epsilon} outside [0, 1]")
    if num_qubits < 1:
        raise ValueError(f"num_qubits {num_qubits} < 1")
    eta = 1.0 / (1.0 + 2.0 ** (2 * num_qubits - 1))
    eta_prime = 1.0 / (1.0 + 2.0 ** (num_qubits - 1))
    if epsilon <= eta:
        regime = Regime.UNENTANGLEABLE
    elif epsilon <= eta_prime:
        regime = Regime.OPEN_REGION
    else:
        regime = Regime.ENTANGLED_STATES_EXIST
    return Thresholds(
        epsilon=epsilon, eta=eta, eta_prime=eta_prime, regime=regime
    )


def assert_lrhv_admissible(state: QuasiState, tol: float = CLAMP_TOL) -> None:
    """Raise unless every weight is nonnegative (weights are sampling
    probabilities for the hidden-variable model). Tolerates roundoff
    down to -tol."""
    w = state.weights
    idx = int(np.argmin(w))
    if w[idx] < -tol:
        raise NegativeQuasiWeight(idx, float(w[idx]))


def clamped_probabilities(state: QuasiState, tol: float = CLAMP_TOL) -> np.ndarray:
    """Weights with roundoff negatives in [-tol, 0) clamped to zero and
    renormalized, for use as sampling probabilities. Raises on any
    weight below -tol."""
    assert_lrhv_admissible(state, tol)
    probs = np.maximum(state.weights, 0.0)
    return probs / probs.sum()


def largest_unentangleable_n(alpha: float = DEFAULT_ALPHA, n_max: int = 64) -> int:
    """Largest register width whose achievable polarization stays at or
    below eta. epsilon falls like N / 2^N but eta falls like 4^-N, so
    the scan stops at the first width past the crossover."""
    last_ok = 0
    for n in range(1, n_max + 1):
        eps = epsilon_pseudopure(NmrParams(alpha=alpha, num_qubits=n))
        if thresholds(eps, n).regime is Regime.UNENTANGLEABLE:
            last_ok = n
        elif last_ok:
            break
    return last_ok
