"""Bell-type quantities: spatial CHSH combinations from single-time
correlators and the three-time temporal combination from trajectories.

The hidden-variable construction assigns every molecule simultaneous
definite outcomes for all axes, so no admissible state can beat the
classical bounds: |S| <= 2 for CHSH and K3 <= 1 for the temporal
combination. The operations here measure both quantities so tests can
verify the bounds hold (and that the quantum values reappear when the
correlators come from the exact engines at full polarization).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadTrajectory, ShapeError
from .lrhv import CorrelationEstimate, Ensemble, Trajectory, qubit_outcomes
from .oracle import ZERO, correlation_trace
from .quasi import MeasurementSpec, QuasiState, correlation_quasi

CHSH_BOUND = 2.0
TEMPORAL_BOUND = 1.0


def _unit_axis(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ShapeError(f"axis shape {a.shape}, expected (3,)")
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ShapeError(f"axis {a} is not unit norm")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChshSetting:
    """CHSH measurement choice: a qubit pair and four spatial axes
    (a, a_prime on the first qubit; b, b_prime on the second)."""

    qubit_pair: tuple[int, int]
    axes: tuple  # (a, a_prime, b, b_prime)

    def __post_init__(self):
        pair = tuple(int(q) for q in self.qubit_pair)
        if len(pair) != 2 or pair[0] == pair[1]:
            raise ShapeError(f"qubit pair {pair} must name two distinct qubits")
        if len(self.axes) != 4:
            raise ShapeError(f"{len(self.axes)} axes, expected 4")
        object.__setattr__(self, "qubit_pair", pair)
        object.__setattr__(self, "axes", tuple(_unit_axis(a) for a in self.axes))


@dataclass(frozen=True)
class TemporalSetting:
    """Three snapshot indices into a trajectory, one qubit, one axis."""

    times: tuple[int, int, int]
    qubit: int
    axis: object

    def __post_init__(self):
        t = tuple(int(x) for x in self.times)
        if len(t) != 3 or not t[0] < t[1] < t[2]:
            raise ShapeError(f"times {t} must be three increasing indices")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "axis", _unit_axis(self.axis))


def optimal_singlet_setting(qubit_pair=(0, 1)) -> ChshSetting:
    """The angles maximizing S for the singlet: a=z, a'=x,
    b=-(z+x)/sqrt2, b'=(x-z)/sqrt2."""
    z = np.array([0.0, 0.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    s = np.sqrt(2.0)
    return ChshSetting(
        qubit_pair=qubit_pair, axes=(z, x, -(z + x) / s, (x - z) / s)
    )


def chsh_value(correlator, setting: ChshSetting) -> float:
    """S = C(a,b) + C(a,b') + C(a',b) - C(a',b') with C supplied as a
    function of the two axes."""
    a, ap, b, bp = setting.axes
    return float(
        correlator(a, b) + correlator(a, bp) + correlator(ap, b) - correlator(ap, bp)
    )


def _pair_spec(num_qubits: int, pair, axis_a, axis_b) -> MeasurementSpec:
    axes = [ZERO] * num_qubits
    axes[pair[0]] = axis_a
    axes[pair[1]] = axis_b
    return MeasurementSpec(tuple(axes))


def pair_correlator_oracle(rho: np.ndarray, qubit_pair=(0, 1)):
    """Two-axis correlator function backed by the density-matrix
    oracle; all other qubits take the ZERO axis."""
    n = int(np.asarray(rho).shape[0]).bit_length() - 1

    def correlator(axis_a, axis_b) -> float:
        return correlation_trace(rho, _pair_spec(n, qubit_pair, axis_a, axis_b))

    return correlator


def pair_correlator_quasi(state: QuasiState, qubit_pair=(0, 1)):
    """Two-axis correlator function backed by the exact weight vector."""

    def correlator(axis_a, axis_b) -> float:
        return correlation_quasi(
            state, _pair_spec(state.num_qubits, qubit_pair, axis_a, axis_b)
        )

    return correlator


class OraclePairSource:
    """Batch pair correlators from the density-matrix oracle (exact, so
    standard errors are zero)."""

    def __init__(self, rho: np.ndarray, qubit_pair=(0, 1)):
        self.rho = np.asarray(rho, dtype=complex)
        self.qubit_pair = tuple(qubit_pair)
        self.num_qubits = int(self.rho.shape[0]).bit_length() - 1

    def correlation_matrix(self, axes_a, axes_b):
        c = np.empty((len(axes_a), len(axes_b)))
        for i, aa in enumerate(axes_a):
            for j, ab in enumerate(axes_b):
                c[i, j] = correlation_trace(
                    self.rho, _pair_spec(self.num_qubits, self.qubit_pair, aa, ab)
                )
        return c, np.zeros_like(c)


class QuasiPairSource:
    """Batch pair correlators from the exact weight vector."""

    def __init__(self, state: QuasiState, qubit_pair=(0, 1)):
        self.state = state
        self.qubit_pair = tuple(qubit_pair)

    def correlation_matrix(self, axes_a, axes_b):
        c = np.empty((len(axes_a), len(axes_b)))
        for i, aa in enumerate(axes_a):
            for j, ab in enumerate(axes_b):
                c[i, j] = correlation_quasi(
                    self.state,
                    _pair_spec(self.state.num_qubits, self.qubit_pair, aa, ab),
                )
        return c, np.zeros_like(c)


class LrhvPairSource:
    """Batch pair correlators from a hidden-variable ensemble. Outcome
    columns are computed once per axis and crossed in one matrix
    product, so a full angle grid costs two passes over the ensemble.
    Outcome products are ±1, so each entry's standard error follows
    from its mean alone: se = sqrt((1 - C^2) / (M - 1))."""

    def __init__(self, ensemble: Ensemble, qubit_pair=(0, 1)):
        self.ensemble = ensemble
        self.qubit_pair = tuple(qubit_pair)

    def _outcome_columns(self, qubit: int, axes) -> np.ndarray:
        cols = np.empty((self.ensemble.num_molecules, len(axes)))
        for j, axis in enumerate(axes):
            cols[:, j] = qubit_outcomes(self.ensemble, qubit, axis)
        return cols

    def correlation_matrix(self, axes_a, axes_b):
        m = self.ensemble.num_molecules
        oa = self._outcome_columns(self.qubit_pair[0], axes_a)
        ob = self._outcome_columns(self.qubit_pair[1], axes_b)
        c = (oa.T @ ob) / m
        if m > 1:
            se = np.sqrt(np.maximum(1.0 - c * c, 0.0) / (m - 1))
        else:
            se = np.zeros_like(c)
        return c, se


@dataclass(frozen=True)
class ChshScanResult:
    max_abs_s: float
    setting: ChshSetting
    std_error: float  # aggregate MC error of the maximizing S


def _grid_axes(resolution: int, full_sphere: bool) -> list[np.ndarray]:
    if full_sphere:
        axes = []
        for theta in np.linspace(0.0, np.pi, resolution):
            for phi in np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False):
                axes.append(
                    np.array(
                        [
                            np.sin(theta) * np.cos(phi),
                            np.sin(theta) * np.sin(phi),
                            np.cos(theta),
                        ]
                    )
                )
        return axes
    thetas = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
    return [np.array([np.sin(t), 0.0, np.cos(t)]) for t in thetas]


def scan_max_chsh(
    source,
    resolution: int = 16,
    qubit_pair=(0, 1),
    full_sphere: bool = False,
) -> ChshScanResult:
    """Maximize |S| over a product grid of axis angles (x-z plane by
    default). `source` provides correlation_matrix(axes_a, axes_b);
    the same grid serves both sides of the pair."""
    if resolution < 8:
        raise ValueError(f"resolution {resolution} < 8 points per angle")
    axes = _grid_axes(resolution, full_sphere)
    c, se = source.correlation_matrix(axes, axes)
    var = se * se
    best = (-1.0, 0, 0, 0, 0)
    g = len(axes)
    for i in range(g):
        # S[i', j, j'] for this i
        s = (
            c[i, :][None, :, None]
            + c[i, :][None, None, :]
            + c[:, :, None]
            - c[:, None, :]
        )
        flat = int(np.argmax(np.abs(s)))
        ip, j, jp = np.unravel_index(flat, (g, g, g))
        val = abs(float(s[ip, j, jp]))
        if val > best[0]:
            best = (val, i, int(ip), int(j), int(jp))
    _, i, ip, j, jp = best
    setting = ChshSetting(
        qubit_pair=tuple(qubit_pair),
        axes=(axes[i], axes[ip], axes[j], axes[jp]),
    )
    agg = float(np.sqrt(var[i, j] + var[i, jp] + var[ip, j] + var[ip, jp]))
    return ChshScanResult(max_abs_s=best[0], setting=setting, std_error=agg)


def temporal_correlation(
    trajectory: Trajectory, first: int, second: int, qubit: int, axis
) -> CorrelationEstimate:
    """Two-time correlator: ensemble mean of the product of one spin's
    outcomes at two snapshots."""
    outcomes = []
    for index in (first, second):
        if not 0 <= index < len(trajectory.snapshots):
            raise BadTrajectory(f"snapshot index {index} not recorded")
        outcomes.append(qubit_outcomes(trajectory.snapshots[index], qubit, axis))
    products = outcomes[0] * outcomes[1]
    m = products.shape[0]
    se = float(products.std(ddof=1)) / float(np.sqrt(m)) if m > 1 else 0.0
    return CorrelationEstimate(mean=float(products.mean()), std_error=se)


def leggett_garg(trajectory: Trajectory, setting: TemporalSetting) -> CorrelationEstimate:
    """Three-time combination K3 = C(t1,t2) + C(t2,t3) - C(t1,t3) from
    per-molecule outcome records; per molecule the combination is
    either 1 or -3, so K3 <= 1 for any ensemble."""
    t1, t2, t3 = setting.times
    outs = []
    for index in (t1, t2, t3):
        if not 0 <= index < len(trajectory.snapshots):
            raise BadTrajectory(f"snapshot index {index} not recorded")
        outs.append(qubit_outcomes(trajectory.snapshots[index], setting.qubit, setting.axis))
    o1, o2, o3 = outs
    per_molecule = o1 * o2 + o2 * o3 - o1 * o3
    m = per_molecule.shape[0]
    se = float(per_molecule.std(ddof=1)) / float(np.sqrt(m)) if m > 1 else 0.0
    return CorrelationEstimate(mean=float(per_molecule.mean()), std_error=se)


def chsh_report(setting: ChshSetting, s: float, std_error: float) -> dict:
    return {
        "kind": "chsh",
        "setting": {
            "qubit_pair": list(setting.qubit_pair),
            "axes": [list(map(float, a)) for a in setting.axes],
        },
        "S": s,
        "std_error": std_error,
        "bound": CHSH_BOUND,
        "violated": bool(abs(s) > CHSH_BOUND + 5.0 * std_error),
    }


def temporal_report(setting: TemporalSetting, estimate: CorrelationEstimate) -> dict:
    return {
        "kind": "leggett_garg",
        "setting": {
            "times": list(setting.times),
            "qubit": setting.qubit,
            "axis": [float(x) for x in setting.axis],
        },
        "K3": estimate.mean,
        "std_error": estimate.std_error,
        "bound": TEMPORAL_BOUND,
        "violated": bool(estimate.mean > TEMPORAL_BOUND + 5.0 * estimate.std_error),
    }


def write_bell_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
