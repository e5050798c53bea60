"""Standard gate matrices and unitarity checks.

Matrices act on the tensor product of their target qubits in the order
the targets are listed (first target = most significant local bit).
"""

from __future__ import annotations

import numpy as np

from .errors import BadUnitary

UNITARY_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])  # (3, 2, 2)


def pauli_dot(axis) -> np.ndarray:
    """2x2 matrix for the spin component along a spatial 3-vector."""
    a = np.asarray(axis, dtype=float)
    return np.tensordot(a, PAULIS, axes=(0, 0))


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def _cphase(theta: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * theta)]).astype(complex)


_FIXED = {
    "I": np.eye(2, dtype=complex),
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    "S": np.diag([1, 1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}

_PARAMETRIC = {"RX": _rx, "RY": _ry, "RZ": _rz, "CPHASE": _cphase}

GATE_NAMES = tuple(sorted(_FIXED)) + tuple(sorted(_PARAMETRIC))


def gate_matrix(name: str, params: tuple = ()) -> np.ndarray:
    """Look up a gate matrix by name, applying parameters if any."""
    key = name.upper()
    if key in _FIXED:
        if params:
            raise ValueError(f"gate {name} takes no parameters")
        return _FIXED[key].copy()
    if key in _PARAMETRIC:
        if len(params) != 1:
            raise ValueError(f"gate {name} takes exactly one parameter")
        return _PARAMETRIC[key](float(params[0]))
    raise ValueError(f"unknown gate {name!r}")


def check_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate that `matrix` is a square unitary on k qubits; return it
    as a complex array. Raises BadUnitary otherwise."""
    u = np.asarray(matrix, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise BadUnitary(f"matrix shape {u.shape} is not square")
    dim = u.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise BadUnitary(f"dimension {dim} is not a power of two")
    err = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if err > tol:
        raise BadUnitary(f"U^dag U deviates from identity by {err:.3e}")
    return u


def num_gate_qubits(matrix: np.ndarray) -> int:
    return int(round(np.log2(matrix.shape[0])))
