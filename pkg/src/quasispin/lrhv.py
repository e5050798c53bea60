"""Deterministic local hidden-variable engine.

Each molecule in the ensemble carries a direction tuple drawn from the
shared nonnegative weight vector and one threshold variable per spin,
uniform on [-1, 1]. A measurement along axis a on a spin pointing
along n deterministically yields +1 when the threshold is at least
-a.n, else -1; the unmeasured axis always yields +1. Averaging the
per-molecule outcome products over the ensemble reproduces the quantum
correlators of the represented state.

Under a gate, the weight vector advances through the transition matrix
and molecules redraw their hidden variables, either all at once
(discrete) or each with probability gamma*dt per time step
(quasicontinuous), with a forced redraw at the end of each pulse so no
molecule leaves a pulse stale.

All randomness is counter-based: a molecule's draws depend only on
(seed, purpose, molecule index, update ordinal), so results are
independent of batching and thread count.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import BadTrajectory, ShapeError
from .nmr import clamped_probabilities
from .oracle import ZERO, Circuit
from .quasi import MeasurementSpec, QuasiState, TransitionMatrix, apply_gate, transition_matrix
from .rng import (
    PURPOSE_DIRECTIONS,
    PURPOSE_LAMBDAS,
    PURPOSE_UPDATE_COIN,
    counter_uniform,
)


@dataclass(frozen=True)
class Molecule:
    """One molecule's hidden variables: per-spin direction indices into
    the frame and per-spin thresholds in [-1, 1]."""

    directions: tuple[int, ...]
    lambdas: tuple[float, ...]

    def __post_init__(self):
        if len(self.directions) != len(self.lambdas):
            raise ShapeError("directions and lambdas of different lengths")
        for lam in self.lambdas:
            if not -1.0 <= lam <= 1.0:
                raise ShapeError(f"lambda {lam} outside [-1, 1]")


@dataclass(frozen=True)
class Ensemble:
    """M molecules sharing one nonnegative weight vector.

    Hidden variables are stored as arrays: direction indices (M, N) and
    per-molecule update ordinals (M,). The ordinal plus the master seed
    is the whole RNG state: thresholds are recomputed on demand from
    (seed, molecule, ordinal, spin), so they need no storage.
    """

    hidden_vector: QuasiState
    directions: np.ndarray  # (M, N) uint8 indices into the frame
    update_ordinals: np.ndarray  # (M,) uint64
    seed: int
    num_qubits: int

    def __post_init__(self):
        from .nmr import assert_lrhv_admissible

        assert_lrhv_admissible(self.hidden_vector)
        d = np.ascontiguousarray(self.directions)
        o = np.ascontiguousarray(self.update_ordinals)
        if d.ndim != 2 or d.shape[1] != self.num_qubits:
            raise ShapeError(f"directions shape {d.shape}")
        if o.shape != (d.shape[0],):
            raise ShapeError(f"update_ordinals shape {o.shape}")
        d.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "update_ordinals", o)

    @property
    def num_molecules(self) -> int:
        return self.directions.shape[0]

    def lambdas_for(self, qubit: int) -> np.ndarray:
        """Threshold variables of one spin across all molecules, in
        [-1, 1], recomputed from the counter stream."""
        mols = np.arange(self.num_molecules, dtype=np.uint64)
        u = counter_uniform(
            self.seed, PURPOSE_LAMBDAS, mols, self.update_ordinals, qubit
        )
        return 2.0 * u - 1.0

    def molecule(self, index: int) -> Molecule:
        dirs = tuple(int(d) for d in self.directions[index])
        lams = tuple(
            float(self.lambdas_for(q)[index]) for q in range(self.num_qubits)
        )
        return Molecule(directions=dirs, lambdas=lams)


@dataclass(frozen=True)
class CorrelationEstimate:
    """Monte Carlo estimate of a correlator: sample mean and standard
    error of the per-molecule outcome products."""

    mean: float
    std_error: float


class ScheduleMode(enum.Enum):
    DISCRETE = "discrete"
    QUASICONTINUOUS = "quasicontinuous"


@dataclass(frozen=True)
class UpdateSchedule:
    """Quasicontinuous timeline: num_steps steps of length dt, each
    molecule updating with probability gamma*dt per step. Pulses are
    (start_step, end_step, gate_index) half-open step ranges during
    which the given circuit gate's transition matrix applies; gamma*dt
    may equal 1, in which case every molecule updates every step and a
    one-step pulse reduces to a discrete update."""

    mode: ScheduleMode
    gamma: float = 1.0
    dt: float = 1.0
    num_steps: int = 0
    pulse_intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "pulse_intervals",
            tuple((int(a), int(b), int(g)) for a, b, g in self.pulse_intervals),
        )
        if self.mode is ScheduleMode.DISCRETE:
            return
        if not 0.0 < self.gamma * self.dt <= 1.0:
            raise ValueError(
                f"update probability gamma*dt = {self.gamma * self.dt} outside (0, 1]"
            )
        if self.num_steps < 0:
            raise ValueError(f"num_steps {self.num_steps} < 0")
        prev_end = 0
        for start, end, gate_index in self.pulse_intervals:
            if not (0 <= start < end <= self.num_steps):
                raise ValueError(f"pulse ({start}, {end}) outside the timeline")
            if start < prev_end:
                raise ValueError(f"pulse ({start}, {end}) overlaps the previous one")
            if gate_index < 0:
                raise ValueError(f"gate index {gate_index} < 0")
            prev_end = end


@dataclass(frozen=True)
class Trajectory:
    """Ensemble snapshots along a schedule, one per recorded step."""

    times: tuple[float, ...]
    steps: tuple[int, ...]
    snapshots: tuple[Ensemble, ...]
    schedule: UpdateSchedule
    seed: int

    def __post_init__(self):
        if not len(self.times) == len(self.steps) == len(self.snapshots):
            raise BadTrajectory("times, steps and snapshots of different lengths")


def _draw_directions(
    seed: int,
    probabilities: np.ndarray,
    size: int,
    num_qubits: int,
    mol_indices: np.ndarray,
    ordinals: np.ndarray,
) -> np.ndarray:
    """Inverse-CDF draw of direction tuples, one uniform per molecule,
    in radix-size tuple order. Returns (len(mol_indices), N) uint8."""
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0  # guard the top edge against cumsum roundoff
    u = counter_uniform(seed, PURPOSE_DIRECTIONS, mol_indices, ordinals)
    flat = np.searchsorted(cdf, u, side="right")
    return np.stack(
        np.unravel_index(flat, (size,) * num_qubits), axis=1
    ).astype(np.uint8)


def init_ensemble(state: QuasiState, num_molecules: int, seed: int) -> Ensemble:
    """Draw an ensemble from an admissible weight vector: each
    molecule's direction tuple with probability w, thresholds uniform."""
    if num_molecules < 1:
        raise ValueError(f"num_molecules {num_molecules} < 1")
    probs = clamped_probabilities(state)
    mols = np.arange(num_molecules, dtype=np.uint64)
    ordinals = np.zeros(num_molecules, dtype=np.uint64)
    directions = _draw_directions(
        seed, probs, state.frame.size, state.num_qubits, mols, ordinals
    )
    return Ensemble(
        hidden_vector=state,
        directions=directions,
        update_ordinals=ordinals,
        seed=seed,
        num_qubits=state.num_qubits,
    )


def spin_wheel(state: QuasiState, rng: np.random.Generator) -> tuple[int, ...]:
    """One roulette-wheel draw of a direction tuple, consuming exactly
    one uniform variate from the supplied generator."""
    probs = clamped_probabilities(state)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    flat = int(np.searchsorted(cdf, rng.random(), side="right"))
    idx = np.unravel_index(flat, (state.frame.size,) * state.num_qubits)
    return tuple(int(i) for i in idx)


def measure_component(axis, lam: float, direction) -> int:
    """Deterministic outcome of one spin: +1 when lam >= -a.m, else -1,
    where a.m is a.n for a spatial axis and 1 for the unmeasured ZERO
    axis (so ZERO always yields +1)."""
    if not -1.0 <= lam <= 1.0:
        raise ShapeError(f"lambda {lam} outside [-1, 1]")
    if axis is ZERO:
        return 1
    gain = float(np.dot(np.asarray(axis, dtype=float), np.asarray(direction, dtype=float)))
    return 1 if lam >= -gain else -1


def qubit_outcomes(ensemble: Ensemble, qubit: int, axis) -> np.ndarray:
    """Per-molecule outcomes of one spin along one axis, as float ±1.
    Depends only on that spin's axis, threshold and direction."""
    m = ensemble.num_molecules
    if axis is ZERO:
        return np.ones(m)
    gains = ensemble.hidden_vector.frame.vectors @ np.asarray(axis, dtype=float)
    per_mol_gain = gains[ensemble.directions[:, qubit]]
    lams = ensemble.lambdas_for(qubit)
    return np.where(lams >= -per_mol_gain, 1.0, -1.0)


def outcome_products(ensemble: Ensemble, spec: MeasurementSpec) -> np.ndarray:
    """Per-molecule products of spin outcomes over the spec's axes."""
    if len(spec) != ensemble.num_qubits:
        raise ShapeError(
            f"spec of length {len(spec)} for {ensemble.num_qubits} qubits"
        )
    products = np.ones(ensemble.num_molecules)
    for qubit, axis in enumerate(spec.axes):
        if axis is ZERO:
            continue
        products *= qubit_outcomes(ensemble, qubit, axis)
    return products


def estimate_correlation(
    ensemble: Ensemble, spec: MeasurementSpec
) -> CorrelationEstimate:
    """Ensemble average of the outcome products, read-only: repeated
    calls with different specs see the same per-molecule outcomes."""
    products = outcome_products(ensemble, spec)
    m = products.shape[0]
    mean = float(products.mean())
    if m > 1:
        std_error = float(products.std(ddof=1)) / float(np.sqrt(m))
    else:
        std_error = 0.0
    return CorrelationEstimate(mean=mean, std_error=std_error)


def update_discrete(ensemble: Ensemble, tm: TransitionMatrix) -> Ensemble:
    """Advance the weight vector through the transition matrix, then
    have every molecule redraw its direction tuple from the new vector
    and refresh all thresholds (one ordinal tick per molecule)."""
    new_state = apply_gate(ensemble.hidden_vector, tm)
    probs = clamped_probabilities(new_state)  # raises if the gate left the domain
    mols = np.arange(ensemble.num_molecules, dtype=np.uint64)
    ordinals = ensemble.update_ordinals + np.uint64(1)
    directions = _draw_directions(
        ensemble.seed, probs, new_state.frame.size, ensemble.num_qubits, mols, ordinals
    )
    return Ensemble(
        hidden_vector=new_state,
        directions=directions,
        update_ordinals=ordinals,
        seed=ensemble.seed,
        num_qubits=ensemble.num_qubits,
    )


def run_quasicontinuous(
    ensemble: Ensemble,
    schedule: UpdateSchedule,
    circuit: Circuit,
    snapshot_steps=None,
) -> Trajectory:
    """Walk the schedule step by step. At a pulse's first step the
    weight vector advances through the gate's transition matrix; from
    then on every molecule that updates redraws from the completed
    vector. Per step each molecule updates with probability gamma*dt
    (counter coin keyed on the step index), and molecules that reach a
    pulse's last step without updating are forced to, so none leaves a
    pulse stale.

    Snapshots are recorded after each step index in snapshot_steps
    (default: step 0, every pulse end, and the final step).
    """
    if schedule.mode is not ScheduleMode.QUASICONTINUOUS:
        raise ValueError("schedule mode must be QUASICONTINUOUS")
    for _, _, gate_index in schedule.pulse_intervals:
        if gate_index >= len(circuit.gates):
            raise ValueError(f"gate index {gate_index} outside the circuit")
    if snapshot_steps is None:
        snapshot_steps = {0, schedule.num_steps}
        snapshot_steps.update(end for _, end, _ in schedule.pulse_intervals)
    snapshot_steps = sorted(set(int(s) for s in snapshot_steps))
    for s in snapshot_steps:
        if not 0 <= s <= schedule.num_steps:
            raise BadTrajectory(f"snapshot step {s} outside the timeline")

    state = ensemble.hidden_vector
    frame = state.frame
    probs = clamped_probabilities(state)
    directions = ensemble.directions.copy()
    ordinals = ensemble.update_ordinals.copy()
    mols = np.arange(ensemble.num_molecules, dtype=np.uint64)
    update_prob = schedule.gamma * schedule.dt

    starts = {start: gate_index for start, _, gate_index in schedule.pulse_intervals}
    ends = {end - 1 for _, end, _ in schedule.pulse_intervals}
    transition_cache: dict[int, TransitionMatrix] = {}
    pending = np.zeros(ensemble.num_molecules, dtype=bool)

    def snapshot() -> Ensemble:
        return Ensemble(
            hidden_vector=state,
            directions=directions.copy(),
            update_ordinals=ordinals.copy(),
            seed=ensemble.seed,
            num_qubits=ensemble.num_qubits,
        )

    steps_out: list[int] = []
    snaps: list[Ensemble] = []
    if snapshot_steps and snapshot_steps[0] == 0:
        steps_out.append(0)
        snaps.append(snapshot())

    for step in range(schedule.num_steps):
        if step in starts:
            gate = circuit.gates[starts[step]]
            tm = transition_cache.get(starts[step])
            if tm is None:
                tm = transition_matrix(gate.resolve(), frame, gate.targets)
                transition_cache[starts[step]] = tm
            state = apply_gate(state, tm)
            probs = clamped_probabilities(state)
            pending[:] = True
        coins = counter_uniform(ensemble.seed, PURPOSE_UPDATE_COIN, mols, step)
        updating = coins < update_prob
        if step in ends:
            updating |= pending
            pending[:] = False
        else:
            pending &= ~updating
        if updating.any():
            ordinals[updating] += np.uint64(1)
            directions[updating] = _draw_directions(
                ensemble.seed,
                probs,
                frame.size,
                ensemble.num_qubits,
                mols[updating],
                ordinals[updating],
            )
        if step + 1 in snapshot_steps:
            steps_out.append(step + 1)
            snaps.append(snapshot())

    return Trajectory(
        times=tuple(s * schedule.dt for s in steps_out),
        steps=tuple(steps_out),
        snapshots=tuple(snaps),
        schedule=schedule,
        seed=ensemble.seed,
    )


def write_trajectory_csv(trajectory: Trajectory, specs, path) -> None:
    """Correlator estimates along the trajectory as CSV rows of
    (time, spec_id, mean, std_error). `specs` is a sequence of
    (spec_id, MeasurementSpec) pairs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "spec_id", "mean", "std_error"])
        for time, snap in zip(trajectory.times, trajectory.snapshots):
            for spec_id, spec in specs:
                est = estimate_correlation(snap, spec)
                writer.writerow([repr(float(time)), spec_id, repr(est.mean), repr(est.std_error)])


def write_trajectory_sidecar(trajectory: Trajectory, path) -> None:
    """JSON sidecar describing the schedule and seed of a trajectory."""
    schedule = trajectory.schedule
    payload = {
        "seed": trajectory.seed,
        "num_molecules": trajectory.snapshots[0].num_molecules
        if trajectory.snapshots
        else 0,
        "num_qubits": trajectory.snapshots[0].num_qubits
        if trajectory.snapshots
        else 0,
        "snapshot_steps": list(trajectory.steps),
        "schedule": {
            "mode": schedule.mode.value,
            "gamma": schedule.gamma,
            "dt": schedule.dt,
            "num_steps": schedule.num_steps,
            "pulse_intervals": [list(p) for p in schedule.pulse_intervals],
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
