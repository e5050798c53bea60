"""Discrete spin-direction sets (frames).

A frame is a set of unit 3-vectors that sums to zero and whose scaled
outer products resolve the 3x3 identity, i.e.

    sum_n n_j            = 0           for j in {x, y, z}
    (1/size) sum_n n_j n_k = delta_jk / 3

Every qubit shares one frame; direction tuples over N qubits are indexed
as radix-`size` integers with qubit 0 as the most significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameInvalid

# Acceptance tolerance for user-supplied frames; built-ins land at ~1e-16.
CUSTOM_TOL = 1e-10
BUILTIN_TOL = 1e-12

_TETRAHEDRON = np.array(
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
) / np.sqrt(3.0)

_CARDINAL6 = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)


@dataclass(frozen=True)
class Frame:
    """An ordered set of spin directions, immutable after construction."""

    vectors: np.ndarray  # (size, 3), unit rows
    label: str = "custom"

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vectors, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Frame)
            and self.label == other.label
            and np.array_equal(self.vectors, other.vectors)
        )


@dataclass(frozen=True)
class ValidationReport:
    """Worst-case absolute residuals of the frame conditions."""

    max_zero_sum_residual: float
    max_isotropy_residual: float
    max_norm_error: float

    @property
    def max_residual(self) -> float:
        return max(
            self.max_zero_sum_residual,
            self.max_isotropy_residual,
            self.max_norm_error,
        )


@dataclass(frozen=True)
class FrameGram:
    """Pairwise dot products of the frame vectors."""

    dot: np.ndarray  # (size, size), symmetric, unit diagonal


def validate_frame(frame: Frame) -> ValidationReport:
    """Report the residuals of the two frame conditions and of unit norms.

    Pure report: never raises, even for badly broken inputs.
    """
    v = frame.vectors
    norms = np.linalg.norm(v, axis=1)
    zero_sum = v.sum(axis=0)
    second_moment = (v.T @ v) / frame.size
    return ValidationReport(
        max_zero_sum_residual=float(np.max(np.abs(zero_sum))),
        max_isotropy_residual=float(np.max(np.abs(second_moment - np.eye(3) / 3.0))),
        max_norm_error=float(np.max(np.abs(norms - 1.0))),
    )


def build_frame(kind: str, vectors=None, label: str | None = None) -> Frame:
    """Construct a frame.

    kind is "tetrahedron", "cardinal6", or "custom" (with `vectors`, a
    list of at least four 3-vectors). Custom inputs are validated against
    both frame conditions at the 1e-10 acceptance tolerance.
    """
    if kind == "tetrahedron":
        return Frame(_TETRAHEDRON, "tetrahedron")
    if kind == "cardinal6":
        return Frame(_CARDINAL6, "cardinal6")
    if kind != "custom":
        raise ValueError(f"unknown frame kind {kind!r}")
    if vectors is None:
        raise ValueError("custom frame requires vectors")
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FrameInvalid("shape (must be (n, 3))", float("nan"))
    if arr.shape[0] < 4:
        raise FrameInvalid(
            f"minimum size (got {arr.shape[0]} vectors, need >= 4)", float("nan")
        )
    frame = Frame(arr, label or "custom")
    report = validate_frame(frame)
    if report.max_norm_error > CUSTOM_TOL:
        raise FrameInvalid("unit norm", report.max_norm_error)
    if report.max_zero_sum_residual > CUSTOM_TOL:
        raise FrameInvalid("zero-sum condition", report.max_zero_sum_residual)
    if report.max_isotropy_residual > CUSTOM_TOL:
        raise FrameInvalid("isotropy condition", report.max_isotropy_residual)
    return frame


def frame_gram(frame: Frame) -> FrameGram:
    """Pairwise dot-product matrix of the frame vectors."""
    return FrameGram(dot=frame.vectors @ frame.vectors.T)


def load_frame(path, label: str | None = None) -> Frame:
    """Load a custom frame from a plain-text file.

    One vector per line, three whitespace-separated decimal components;
    lines beginning with '#' are ignored.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise FrameInvalid(
                    f"line {line_no} of {path} (expected 3 components, got {len(parts)})",
                    float("nan"),
                )
            rows.append([float(p) for p in parts])
    return build_frame("custom", rows, label=label or str(path))
