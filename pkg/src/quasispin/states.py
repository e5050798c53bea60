"""Named initial states, as density operators and as weight vectors.

The weight-vector forms are built directly in quasi space so registers
too wide for a dense density operator (up to 12 qubits here) still get
exact initial states. For each named state the per-qubit factors are
closed-form functions of the frame directions; products over qubits
assemble the full vector.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .frames import Frame
from .quasi import QuasiState, quasi_from_density

NAMED_STATES = ("zero", "ghz", "singlet_pair")


def check_named_state(name: str, num_qubits: int) -> str:
    """Validate a named-state request, returning the normalized name."""
    name = name.lower()
    if name not in NAMED_STATES:
        raise ValueError(f"unknown named state {name!r}; choose from {NAMED_STATES}")
    if num_qubits < 1:
        raise ValueError(f"num_qubits {num_qubits} < 1")
    if name == "ghz" and num_qubits < 2:
        raise ValueError("ghz needs at least 2 qubits")
    if name == "singlet_pair" and num_qubits % 2:
        raise ValueError("singlet_pair needs an even qubit count")
    return name


def named_state_density(name: str, num_qubits: int) -> np.ndarray:
    """Dense density operator of a named state (for oracle-sized
    registers)."""
    name = check_named_state(name, num_qubits)
    dim = 2**num_qubits
    if name == "zero":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
    elif name == "ghz":
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0 / np.sqrt(2.0)
        psi[-1] = 1.0 / np.sqrt(2.0)
    else:  # singlet_pair
        pair = np.zeros(4, dtype=complex)
        pair[1] = 1.0 / np.sqrt(2.0)
        pair[2] = -1.0 / np.sqrt(2.0)
        psi = np.ones(1, dtype=complex)
        for _ in range(num_qubits // 2):
            psi = np.kron(psi, pair)
    return np.outer(psi, psi.conj())


def _kron_reduce(factors) -> np.ndarray:
    out = np.ones(1)
    for f in factors:
        out = np.kron(out, f)
    return out


def named_state_quasi(name: str, num_qubits: int, frame: Frame) -> QuasiState:
    """Weight vector of a named state, built without forming the
    density operator."""
    name = check_named_state(name, num_qubits)
    size = frame.size
    nx, ny, nz = frame.vectors[:, 0], frame.vectors[:, 1], frame.vectors[:, 2]
    if name == "zero":
        # product of single-qubit |0> weights (1 + 3 n_z) / size
        w1 = (1.0 + 3.0 * nz) / size
        weights = _kron_reduce([w1] * num_qubits)
    elif name == "ghz":
        # (|0..0><0..0| + |1..1><1..1| + cross terms) / 2; per qubit the
        # diagonal blocks give (1 ± 3 n_z)/size and the cross term gives
        # 3 (n_x + i n_y)/size, whose product enters through its real part
        up = (1.0 + 3.0 * nz) / size
        down = (1.0 - 3.0 * nz) / size
        cross = 3.0 * (nx + 1j * ny) / size
        weights = 0.5 * (
            _kron_reduce([up] * num_qubits)
            + _kron_reduce([down] * num_qubits)
            + 2.0 * _kron_reduce([cross] * num_qubits).real
        )
    else:  # singlet_pair
        pair = quasi_from_density(named_state_density("singlet_pair", 2), frame)
        weights = _kron_reduce([pair.weights] * (num_qubits // 2))
    return QuasiState(weights=weights, frame=frame, num_qubits=num_qubits)


def load_density_matrix(path, num_qubits: int | None = None) -> np.ndarray:
    """Read a dense complex matrix from a whitespace-separated text
    file (entries in Python complex syntax, one row per line)."""
    rho = np.atleast_2d(np.loadtxt(path, dtype=complex))
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"{path}: matrix shape {rho.shape} is not square")
    if num_qubits is not None and rho.shape[0] != 2**num_qubits:
        raise ShapeError(
            f"{path}: dimension {rho.shape[0]} does not match {num_qubits} qubits"
        )
    return rho
