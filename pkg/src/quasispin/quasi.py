"""Quasidistribution engine.

An N-qubit state is represented by a real weight vector of length
size^N over direction tuples, where `size` is the frame size. The
weights sum to one but may be negative. Conversions to and from density
operators are exact; unitaries act through real transition matrices
contracted gate-locally against the weight vector.

Direction tuples are indexed as radix-`size` integers with qubit 0 as
the most significant digit, so a weight vector reshaped to
(size,) * N in C order has axis r for qubit r.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadDensityOperator,
    BadDirectionIndex,
    BadTargets,
    ShapeError,
)
from .frames import Frame, build_frame
from .gates import PAULIS, check_unitary, num_gate_qubits
from .oracle import ZERO, check_density, num_qubits_of

NORMALIZATION_TOL = 1e-10

_WEIGHTS_MAGIC = b"QLRW"
_WEIGHTS_VERSION = 1


@dataclass(frozen=True)
class QuasiState:
    """Real weight vector over direction tuples, plus its frame."""

    weights: np.ndarray  # (size**num_qubits,) float64
    frame: Frame
    num_qubits: int

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if w.shape != (self.frame.size**self.num_qubits,):
            raise ShapeError(
                f"weight vector of length {w.shape} for "
                f"{self.num_qubits} qubits over {self.frame.size} directions"
            )
        total = w.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise BadDensityOperator(f"weights sum to {total}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def tensor(self) -> np.ndarray:
        """Weights viewed as an N-axis tensor, one axis per qubit."""
        return self.weights.reshape((self.frame.size,) * self.num_qubits)

    def min_weight(self) -> float:
        return float(self.weights.min())


@dataclass(frozen=True)
class TransitionMatrix:
    """Real matrix propagating weight vectors under a k-qubit unitary.

    Column ndx holds the quasidistribution of U |ndx><ndx| U^dag, so
    every column sums to one; entries may be negative.
    """

    entries: np.ndarray  # (size**k, size**k)
    targets: tuple[int, ...]
    source_unitary: np.ndarray
    frame: Frame

    @property
    def num_gate_qubits(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class MeasurementSpec:
    """One measurement axis per qubit: a spatial unit 3-vector, or ZERO
    (None) for a qubit that does not contribute to the product."""

    axes: tuple

    def __post_init__(self):
        checked = []
        for axis in self.axes:
            if axis is ZERO:
                checked.append(ZERO)
                continue
            v = np.asarray(axis, dtype=float)
            if v.shape != (3,):
                raise ShapeError(f"axis shape {v.shape}, expected (3,)")
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ShapeError(f"axis {v} is not unit norm")
            v.setflags(write=False)
            checked.append(v)
        object.__setattr__(self, "axes", tuple(checked))

    @classmethod
    def from_letters(cls, letters: str) -> "MeasurementSpec":
        """Build from a compact string like "zx0" (0 = not measured)."""
        named = {
            "x": np.array([1.0, 0.0, 0.0]),
            "y": np.array([0.0, 1.0, 0.0]),
            "z": np.array([0.0, 0.0, 1.0]),
            "0": ZERO,
        }
        try:
            return cls(tuple(named[c] for c in letters.lower()))
        except KeyError as exc:
            raise ValueError(f"unknown axis letter {exc.args[0]!r}") from None

    def __len__(self) -> int:
        return len(self.axes)


def _check_directions(frame: Frame, directions, num_qubits: int) -> tuple[int, ...]:
    dirs = tuple(int(d) for d in directions)
    if len(dirs) != num_qubits:
        raise BadDirectionIndex(
            f"tuple of length {len(dirs)} for {num_qubits} qubits"
        )
    for d in dirs:
        if not 0 <= d < frame.size:
            raise BadDirectionIndex(f"index {d} outside frame of {frame.size}")
    return dirs


def dual_operator(frame: Frame, directions, num_qubits: int | None = None) -> np.ndarray:
    """Hermitian operator whose trace pairing with a density operator
    yields the weight at this direction tuple:
    (1/size^N) * tensor_r (1 + 3 n_r . sigma). Trace is (2/size)^N."""
    if num_qubits is None:
        num_qubits = len(directions)
    dirs = _check_directions(frame, directions, num_qubits)
    out = np.ones((1, 1), dtype=complex)
    for d in dirs:
        n = frame.vectors[d]
        factor = np.eye(2, dtype=complex) + 3.0 * np.tensordot(n, PAULIS, axes=(0, 0))
        out = np.kron(out, factor)
    return out / float(frame.size) ** num_qubits


def direction_projector(frame: Frame, directions, num_qubits: int | None = None) -> np.ndarray:
    """Projector onto the product of spin-up states along the tuple's
    directions: tensor_r (1 + n_r . sigma) / 2."""
    if num_qubits is None:
        num_qubits = len(directions)
    dirs = _check_directions(frame, directions, num_qubits)
    out = np.ones((1, 1), dtype=complex)
    for d in dirs:
        n = frame.vectors[d]
        factor = (np.eye(2, dtype=complex) + np.tensordot(n, PAULIS, axes=(0, 0))) / 2.0
        out = np.kron(out, factor)
    return out


def min_weight_bound(num_qubits: int, frame_size: int) -> float:
    """Lower bound on any weight derived from a density operator:
    the minimum eigenvalue of the dual operator, -2^(2N-1) / size^N."""
    if num_qubits < 1 or frame_size < 4:
        raise ValueError("need num_qubits >= 1 and frame_size >= 4")
    return -(2.0 ** (2 * num_qubits - 1)) / float(frame_size) ** num_qubits


# Per-direction single-qubit operators used by the fast converters:
#   dual factor  A[d] = 1 + 3 n_d . sigma      (weights from operators)
#   projector    P[d] = (1 + n_d . sigma) / 2  (operators from weights)
def _dual_factors(frame: Frame) -> np.ndarray:
    return np.eye(2, dtype=complex) + 3.0 * np.tensordot(
        frame.vectors, PAULIS, axes=(1, 0)
    )


def _projector_factors(frame: Frame) -> np.ndarray:
    return (
        np.eye(2, dtype=complex) + np.tensordot(frame.vectors, PAULIS, axes=(1, 0))
    ) / 2.0


def quasi_from_density(rho: np.ndarray, frame: Frame) -> QuasiState:
    """Weight vector of a density operator over the frame's direction
    tuples: w(ndx) = tr(rho * dual_operator(ndx)).

    Contracts qubit by qubit, so the cost is O(N * size * 4^N) rather
    than size^N full traces.
    """
    rho = check_density(rho)
    n = num_qubits_of(rho)
    duals = _dual_factors(frame)  # (size, 2, 2)
    t = rho.reshape((2,) * (2 * n))
    for k in range(n):
        # contract this qubit's (row, col) axes with A[d, col, row]; the
        # col axis sits after the n-k remaining row axes, and the new
        # direction axis lands at the end, giving axes in qubit order
        # once all contractions are done.
        t = np.tensordot(t, duals, axes=([0, n - k], [2, 1]))
    imag = float(np.max(np.abs(t.imag))) if t.size else 0.0
    if imag > NORMALIZATION_TOL:
        raise BadDensityOperator(f"weights came out complex (imag {imag:.3e})")
    weights = t.real.reshape(-1) / float(frame.size) ** n
    return QuasiState(weights=weights, frame=frame, num_qubits=n)


def density_from_quasi(state: QuasiState) -> np.ndarray:
    """Reconstruct the density operator: sum over direction tuples of
    weight * projector. Exact for weights produced by quasi_from_density."""
    n = state.num_qubits
    projs = _projector_factors(state.frame)  # (size, 2, 2)
    t = state.tensor
    for _ in range(n):
        t = np.tensordot(t, projs, axes=([0], [0]))
    # axes are now (i_1, j_1, ..., i_N, j_N); split rows from columns
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return t.transpose(order).reshape(2**n, 2**n)


def _axis_gains(state_frame: Frame, axis) -> np.ndarray:
    """Per-direction factor contributed by one qubit's measurement axis:
    axis . direction for spatial axes, 1 for ZERO."""
    if axis is ZERO:
        return np.ones(state_frame.size)
    return state_frame.vectors @ np.asarray(axis, dtype=float)


def correlation_quasi(state: QuasiState, spec: MeasurementSpec) -> float:
    """Correlation coefficient from the weight vector: the weighted sum
    of per-qubit axis factors."""
    if len(spec) != state.num_qubits:
        raise ShapeError(
            f"spec of length {len(spec)} for {state.num_qubits} qubits"
        )
    t = state.tensor
    for axis in spec.axes:
        t = np.tensordot(t, _axis_gains(state.frame, axis), axes=([0], [0]))
    return float(t)


def transition_matrix(
    unitary: np.ndarray, frame: Frame, targets=None
) -> TransitionMatrix:
    """Transition matrix of a k-qubit unitary over the frame.

    Column ndx is the quasidistribution of U P(ndx) U^dag where P is the
    direction-tuple projector. `targets` names the register qubits the
    gate acts on (defaults to 0..k-1); the matrix itself only depends on
    the unitary and the frame.
    """
    u = check_unitary(unitary)
    k = num_gate_qubits(u)
    if targets is None:
        targets = tuple(range(k))
    targets = tuple(int(t) for t in targets)
    if len(targets) != k:
        raise BadTargets(f"{k}-qubit unitary with targets {targets}")
    if len(set(targets)) != k:
        raise BadTargets(f"duplicate targets {targets}")
    size = frame.size
    dim = size**k
    entries = np.empty((dim, dim))
    shape = (size,) * k
    for col in range(dim):
        dirs = np.unravel_index(col, shape)
        proj = direction_projector(frame, dirs, k)
        evolved = u @ proj @ u.conj().T
        entries[:, col] = quasi_from_density(evolved, frame).weights
    return TransitionMatrix(
        entries=entries, targets=targets, source_unitary=u, frame=frame
    )


def identity_transition(frame: Frame) -> np.ndarray:
    """Single-qubit identity transition matrix (1 + 3 n_i . n_j) / size.

    The identity map on weight vectors only when the frame is minimal;
    otherwise an idempotent projection onto canonical weight vectors.
    """
    gram = frame.vectors @ frame.vectors.T
    return (1.0 + 3.0 * gram) / frame.size


def apply_gate(state: QuasiState, tm: TransitionMatrix) -> QuasiState:
    """Contract a transition matrix against the target-qubit axes of the
    weight vector, leaving all other axes untouched."""
    if tm.frame != state.frame:
        raise ShapeError("transition matrix built over a different frame")
    n = state.num_qubits
    k = tm.num_gate_qubits
    targets = tm.targets
    if any(not 0 <= t < n for t in targets):
        raise BadTargets(f"targets {targets} outside register of {n}")
    size = state.frame.size
    t = np.tensordot(
        tm.entries.reshape((size,) * (2 * k)),
        state.tensor,
        axes=(list(range(k, 2 * k)), list(targets)),
    )
    t = np.moveaxis(t, list(range(k)), list(targets))
    return QuasiState(
        weights=np.ascontiguousarray(t).reshape(-1),
        frame=state.frame,
        num_qubits=n,
    )


def canonicalize(state: QuasiState) -> QuasiState:
    """Project a weight vector onto its canonical representative by
    applying the identity transition to every qubit. A no-op for
    minimal (size-4) frames; for larger frames this removes the
    non-canonical component gate-local updates leave behind."""
    tid = identity_transition(state.frame)
    t = state.tensor
    n = state.num_qubits
    for q in range(n):
        t = np.moveaxis(np.tensordot(tid, t, axes=([1], [q])), 0, q)
    return QuasiState(
        weights=np.ascontiguousarray(t).reshape(-1),
        frame=state.frame,
        num_qubits=n,
    )


def uniform_state(frame: Frame, num_qubits: int) -> QuasiState:
    """Weights of the maximally mixed state: all equal."""
    count = frame.size**num_qubits
    return QuasiState(
        weights=np.full(count, 1.0 / count), frame=frame, num_qubits=num_qubits
    )


def mix_with_uniform(state: QuasiState, epsilon: float) -> QuasiState:
    """Weights of (1 - epsilon) * maximally mixed + epsilon * state;
    conversion is linear, so this mirrors the operator-level mixture."""
    if not 0.0 <= epsilon <= 1.0:
        from .errors import BadEpsilon

        raise BadEpsilon(f"epsilon {epsilon} outside [0, 1]")
    count = state.weights.shape[0]
    weights = (1.0 - epsilon) / count + epsilon * state.weights
    return QuasiState(weights=weights, frame=state.frame, num_qubits=state.num_qubits)


def save_weights(state: QuasiState, path) -> None:
    """Write a weight vector to the flat binary format: magic "QLRW",
    version, qubit count, frame size, frame label, then little-endian
    float64 weights in radix-size tuple order."""
    label = state.frame.label.encode("utf-8")
    header = struct.pack(
        f"<4sIIII{len(label)}s",
        _WEIGHTS_MAGIC,
        _WEIGHTS_VERSION,
        state.num_qubits,
        state.frame.size,
        len(label),
        label,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(state.weights.astype("<f8").tobytes())


def load_weights(path, frame: Frame | None = None) -> QuasiState:
    """Read a weight vector written by save_weights.

    If `frame` is omitted the label must name a built-in frame; a
    supplied frame must match the stored size.
    """
    with open(path, "rb") as fh:
        magic, version, n, size, label_len = struct.unpack("<4sIIII", fh.read(20))
        if magic != _WEIGHTS_MAGIC:
            raise ValueError(f"{path}: not a weight vector file (magic {magic!r})")
        if version != _WEIGHTS_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        label = fh.read(label_len).decode("utf-8")
        payload = fh.read(8 * size**n)
        weights = np.frombuffer(payload, dtype="<f8").astype(float)
    if frame is None:
        if label not in ("tetrahedron", "cardinal6"):
            raise ValueError(
                f"{path}: label {label!r} is not built in; pass the frame explicitly"
            )
        frame = build_frame(label)
    if frame.size != size:
        raise ShapeError(
            f"{path}: stored frame size {size}, supplied frame has {frame.size}"
        )
    return QuasiState(weights=weights, frame=frame, num_qubits=n)
