"""Dense density-matrix simulator: the ground truth the quasidistribution
and hidden-variable engines are checked against.

States are 2^N x 2^N complex Hermitian matrices with qubit 0 as the most
significant bit of the basis index. Gates are applied by index-strided
block updates (never by building the full 2^N x 2^N gate matrix), which
keeps N = 10 tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDensityOperator, BadEpsilon, BadTargets, ShapeError
from .gates import check_unitary, gate_matrix, num_gate_qubits, pauli_dot

DENSITY_TOL = 1e-10
MAX_ORACLE_QUBITS = 10

#: Axis marker for "this spin is not measured" (the zero direction).
ZERO = None


@dataclass(frozen=True)
class Gate:
    """One circuit element: a unitary acting on an ordered set of qubits."""

    name: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = None  # raw gates only; named gates look up

    def resolve(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return gate_matrix(self.name, self.params)


@dataclass
class Circuit:
    """Ordered gate list on an N-qubit register.

    Construction validates unitarity and target indices for every gate.
    """

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate):
        u = check_unitary(gate.resolve())
        k = num_gate_qubits(u)
        if len(gate.targets) != k:
            raise BadTargets(
                f"gate {gate.name}: {len(gate.targets)} targets for a {k}-qubit matrix"
            )
        if len(set(gate.targets)) != len(gate.targets):
            raise BadTargets(f"gate {gate.name}: duplicate targets {gate.targets}")
        for t in gate.targets:
            if not 0 <= t < self.num_qubits:
                raise BadTargets(
                    f"gate {gate.name}: target {t} outside register of {self.num_qubits}"
                )

    def add(self, name: str, *targets: int, params: tuple = (), matrix=None):
        gate = Gate(name, tuple(int(t) for t in targets), tuple(params), matrix)
        self._check(gate)
        self.gates.append(gate)
        return self


def num_qubits_of(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = int(round(np.log2(dim)))
    if rho.ndim != 2 or rho.shape != (dim, dim) or 2**n != dim:
        raise ShapeError(f"operator shape {rho.shape} is not 2^N x 2^N")
    return n


def check_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> np.ndarray:
    """Validate Hermiticity and unit trace; return as complex array."""
    rho = np.asarray(rho, dtype=complex)
    num_qubits_of(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise BadDensityOperator(f"not Hermitian (residual {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise BadDensityOperator(f"trace {tr} differs from 1")
    return rho


def pseudopure_state(rho1: np.ndarray, epsilon: float) -> np.ndarray:
    """Mix a desired state with the maximally mixed background:
    (1 - epsilon) * 1/2^N + epsilon * rho1."""
    if not 0.0 <= epsilon <= 1.0:
        raise BadEpsilon(f"epsilon {epsilon} outside [0, 1]")
    rho1 = check_density(rho1)
    dim = rho1.shape[0]
    return (1.0 - epsilon) * np.eye(dim, dtype=complex) / dim + epsilon * rho1


def apply_unitary(rho: np.ndarray, u: np.ndarray, targets) -> np.ndarray:
    """U rho U^dag with a k-qubit U applied on `targets` by strided
    tensor contraction. Targets need not be adjacent or ordered."""
    n = num_qubits_of(rho)
    targets = tuple(int(t) for t in targets)
    k = num_gate_qubits(u)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise BadTargets(f"bad targets {targets} for {n} qubits")
    if len(targets) != k:
        raise ShapeError(f"{k}-qubit matrix with {len(targets)} targets")
    t = np.asarray(rho, dtype=complex).reshape((2,) * (2 * n))
    uk = np.asarray(u, dtype=complex).reshape((2,) * (2 * k))
    # row (ket) indices
    t = np.tensordot(uk, t, axes=(list(range(k, 2 * k)), list(targets)))
    t = np.moveaxis(t, list(range(k)), list(targets))
    # column (bra) indices contract against conj(U)
    cols = [n + q for q in targets]
    t = np.tensordot(t, uk.conj(), axes=(cols, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), cols)
    return t.reshape(2**n, 2**n)


def evolve(rho: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Run the circuit gate by gate. The maximally mixed component is
    unaffected, so pseudopure inputs keep their mixing parameter."""
    n = num_qubits_of(rho)
    if circuit.num_qubits != n:
        raise ShapeError(
            f"circuit on {circuit.num_qubits} qubits, state on {n}"
        )
    out = np.asarray(rho, dtype=complex)
    for gate in circuit.gates:
        out = apply_unitary(out, gate.resolve(), gate.targets)
    return out


def correlation_trace(rho: np.ndarray, spec) -> float:
    """Expectation value of the product of spin components, one per qubit.

    `spec` supplies one axis per qubit: a spatial unit 3-vector, or ZERO
    (None) meaning the qubit does not contribute (identity factor).
    Computed as tr(rho * prod_r O_r) by per-qubit tensor contraction.
    """
    n = num_qubits_of(rho)
    axes = list(spec.axes) if hasattr(spec, "axes") else list(spec)
    if len(axes) != n:
        raise ShapeError(f"spec of length {len(axes)} for {n} qubits")
    t = np.asarray(rho, dtype=complex).reshape((2,) * (2 * n))
    for axis in axes:
        op = np.eye(2, dtype=complex) if axis is ZERO else pauli_dot(axis)
        # contract this qubit's (row, col) pair with O[col, row]: a partial trace
        t = np.tensordot(t, op, axes=([0, t.ndim // 2], [1, 0]))
    return float(np.asarray(t).real)


def random_state(num_qubits: int, rank: int, seed) -> np.ndarray:
    """Reproducible random density operator of the given rank
    (Ginibre factor G: rho = G G^dag / tr)."""
    dim = 2**num_qubits
    if not 1 <= rank <= dim:
        raise ShapeError(f"rank {rank} outside [1, {dim}]")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(num_qubits: int, seed) -> np.ndarray:
    """Haar-distributed random unitary (QR of a complex Ginibre matrix
    with the R-diagonal phase fix)."""
    dim = 2**num_qubits
    rng = np.random.default_rng(seed)
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases.conj()
