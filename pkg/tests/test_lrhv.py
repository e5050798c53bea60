"""Hidden-variable engine: sampling, deterministic outcomes, discrete
and quasicontinuous updates, trajectories."""

import csv
import json

import numpy as np
import pytest

from quasispin import (
    ZERO,
    BadTrajectory,
    apply_gate,
    Circuit,
    Ensemble,
    MeasurementSpec,
    Molecule,
    NegativeQuasiWeight,
    QuasiState,
    ScheduleMode,
    ShapeError,
    UpdateSchedule,
    estimate_correlation,
    init_ensemble,
    measure_component,
    mix_with_uniform,
    named_state_quasi,
    outcome_products,
    qubit_outcomes,
    quasi_from_density,
    run_quasicontinuous,
    spin_wheel,
    transition_matrix,
    uniform_state,
    update_discrete,
    write_trajectory_csv,
    write_trajectory_sidecar,
)
from quasispin.gates import gate_matrix, pauli_dot

Z = np.array([0.0, 0.0, 1.0])


def antialigned_state(frame, epsilon: float) -> QuasiState:
    """Pseudopure state anti-aligned with the frame's vertex 0: its
    weight at tuple 0 is (1 - 3 epsilon) / 4 on a tetrahedron."""
    _, eigvecs = np.linalg.eigh(pauli_dot(frame.vectors[0]))
    down = eigvecs[:, 0]
    rho1 = np.outer(down, down.conj())
    return mix_with_uniform(quasi_from_density(rho1, frame), epsilon)


def freq_within_5_sigma(counts: np.ndarray, probs: np.ndarray, total: int) -> bool:
    freqs = counts / total
    limits = 5.0 * np.sqrt(probs * (1.0 - probs) / total) + 1e-12
    return bool(np.all(np.abs(freqs - probs) <= limits))


# === molecules and ensembles ===


def test_molecule_validation():
    Molecule(directions=(0, 1), lambdas=(0.5, -0.5))
    with pytest.raises(ShapeError):
        Molecule(directions=(0,), lambdas=(0.5, 0.5))
    with pytest.raises(ShapeError):
        Molecule(directions=(0,), lambdas=(1.5,))


def test_init_ensemble_deterministic(tetra):
    state = uniform_state(tetra, 2)
    a = init_ensemble(state, 500, seed=42)
    b = init_ensemble(state, 500, seed=42)
    assert np.array_equal(a.directions, b.directions)
    assert np.array_equal(a.update_ordinals, b.update_ordinals)
    c = init_ensemble(state, 500, seed=43)
    assert not np.array_equal(a.directions, c.directions)


def test_init_ensemble_rejects_inadmissible(tetra):
    state = antialigned_state(tetra, 0.9)
    with pytest.raises(NegativeQuasiWeight):
        init_ensemble(state, 10, seed=0)


def test_ensemble_construction_checks(tetra):
    state = uniform_state(tetra, 2)
    with pytest.raises(ShapeError):
        Ensemble(
            hidden_vector=state,
            directions=np.zeros((5, 3), dtype=np.uint8),
            update_ordinals=np.zeros(5, dtype=np.uint64),
            seed=0,
            num_qubits=2,
        )
    with pytest.raises(ValueError):
        init_ensemble(state, 0, seed=0)


def test_molecule_accessor(tetra):
    ens = init_ensemble(uniform_state(tetra, 3), 50, seed=7)
    mol = ens.molecule(13)
    assert mol.directions == tuple(int(d) for d in ens.directions[13])
    for q in range(3):
        assert mol.lambdas[q] == pytest.approx(float(ens.lambdas_for(q)[13]), abs=0)


def test_direction_frequencies_uniform(tetra):
    m = 200_000
    state = uniform_state(tetra, 2)
    ens = init_ensemble(state, m, seed=11)
    flat = ens.directions[:, 0].astype(int) * 4 + ens.directions[:, 1].astype(int)
    counts = np.bincount(flat, minlength=16)
    assert freq_within_5_sigma(counts, state.weights, m)


def test_zero_weight_tuple_never_sampled(tetra):
    weights = np.array([0.5, 0.5, 0.0, 0.0])
    state = QuasiState(weights=weights, frame=tetra, num_qubits=1)
    ens = init_ensemble(state, 100_000, seed=3)
    assert set(np.unique(ens.directions)) == {0, 1}


def test_spin_wheel_delta(tetra):
    weights = np.zeros(16)
    weights[9] = 1.0  # tuple (2, 1)
    state = QuasiState(weights=weights, frame=tetra, num_qubits=2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert spin_wheel(state, rng) == (2, 1)


def test_spin_wheel_consumes_one_variate(tetra):
    probe = np.random.default_rng(123)
    probe.random()
    expected_next = probe.random()
    rng = np.random.default_rng(123)
    spin_wheel(uniform_state(tetra, 2), rng)
    assert rng.random() == expected_next


def test_spin_wheel_frequencies(tetra):
    state = quasi_from_density(np.diag([0.7, 0.3]).astype(complex), tetra)
    rng = np.random.default_rng(29)
    m = 50_000
    counts = np.zeros(4)
    for _ in range(m):
        counts[spin_wheel(state, rng)[0]] += 1
    assert freq_within_5_sigma(counts, state.weights, m)


# === deterministic outcomes ===


def test_measure_component_zero_axis():
    for lam in (-1.0, -0.3, 0.0, 1.0):
        assert measure_component(ZERO, lam, (0.0, 0.0, 1.0)) == 1


def test_measure_component_threshold():
    axis = np.array([1.0, 0.0, 0.0])
    direction = np.array([0.3, 0.0, np.sqrt(1 - 0.09)])  # axis . n = 0.3
    assert measure_component(axis, -0.5, direction) == -1
    assert measure_component(axis, -0.2, direction) == 1
    assert measure_component(axis, -0.3, direction) == 1  # boundary: >=
    assert measure_component(axis, -0.3 - 1e-9, direction) == -1
    with pytest.raises(ShapeError):
        measure_component(axis, 1.5, direction)


def test_measure_component_mean_is_dot_product():
    # averaging the sign over uniform lambda recovers axis . n
    axis = np.array([0.0, 0.0, 1.0])
    direction = np.array([np.sin(1.0), 0.0, np.cos(1.0)])
    lams = np.linspace(-1.0, 1.0, 200_001)
    outs = np.array([measure_component(axis, lam, direction) for lam in lams[::100]])
    assert outs.mean() == pytest.approx(np.cos(1.0), abs=2e-3)


def test_qubit_outcomes_match_scalar_rule(tetra):
    ens = init_ensemble(uniform_state(tetra, 2), 200, seed=17)
    axis = np.array([0.6, 0.0, 0.8])
    outs = qubit_outcomes(ens, 1, axis)
    lams = ens.lambdas_for(1)
    for i in range(200):
        direction = tetra.vectors[ens.directions[i, 1]]
        assert outs[i] == measure_component(axis, float(lams[i]), direction)


def test_outcomes_are_local(tetra):
    # a spin's outcome column never depends on which axes the other
    # spins get; products factor exactly
    ens = init_ensemble(uniform_state(tetra, 2), 1000, seed=19)
    a = np.array([1.0, 0.0, 0.0])
    b1 = np.array([0.0, 0.0, 1.0])
    b2 = np.array([0.0, 1.0, 0.0])
    o0 = qubit_outcomes(ens, 0, a)
    for b in (b1, b2):
        products = outcome_products(ens, MeasurementSpec((a, b)))
        assert np.array_equal(products, o0 * qubit_outcomes(ens, 1, b))


def test_marginal_consistency(tetra):
    ens = init_ensemble(uniform_state(tetra, 2), 1000, seed=23)
    a = np.array([0.0, 1.0, 0.0])
    products = outcome_products(ens, MeasurementSpec((a, ZERO)))
    assert np.array_equal(products, qubit_outcomes(ens, 0, a))


def test_estimate_all_zero_spec(tetra):
    ens = init_ensemble(uniform_state(tetra, 2), 100, seed=29)
    est = estimate_correlation(ens, MeasurementSpec((ZERO, ZERO)))
    assert est.mean == 1.0
    assert est.std_error == 0.0


def test_estimate_single_qubit(tetra):
    state = mix_with_uniform(
        quasi_from_density(np.diag([1.0, 0.0]).astype(complex), tetra), 1.0 / 3.0
    )
    ens = init_ensemble(state, 200_000, seed=31)
    est = estimate_correlation(ens, MeasurementSpec((Z,)))
    assert abs(est.mean - 1.0 / 3.0) <= 5.0 * est.std_error


def test_estimate_singlet_zz(tetra):
    state = mix_with_uniform(
        named_state_quasi("singlet_pair", 2, tetra), 1.0 / 9.0
    )
    ens = init_ensemble(state, 200_000, seed=37)
    est = estimate_correlation(ens, MeasurementSpec.from_letters("zz"))
    assert abs(est.mean - (-1.0 / 9.0)) <= 5.0 * est.std_error


def test_estimate_spec_length(tetra):
    ens = init_ensemble(uniform_state(tetra, 2), 10, seed=0)
    with pytest.raises(ShapeError):
        estimate_correlation(ens, MeasurementSpec((Z,)))


# === discrete updates ===


def test_update_discrete_advances(tetra):
    state = mix_with_uniform(named_state_quasi("zero", 2, tetra), 1.0 / 9.0)
    ens = init_ensemble(state, 100_000, seed=41)
    tm = transition_matrix(gate_matrix("H"), tetra, targets=(0,))
    out = update_discrete(ens, tm)
    assert np.array_equal(out.update_ordinals, ens.update_ordinals + 1)
    expected_state = apply_gate(ens.hidden_vector, tm)
    np.testing.assert_allclose(
        out.hidden_vector.weights, expected_state.weights, atol=0
    )
    # directions redrawn from the new vector
    flat = out.directions[:, 0].astype(int) * 4 + out.directions[:, 1].astype(int)
    counts = np.bincount(flat, minlength=16)
    assert freq_within_5_sigma(counts, np.maximum(expected_state.weights, 0), 100_000)
    # thresholds refreshed along with the ordinals
    assert not np.array_equal(out.lambdas_for(0), ens.lambdas_for(0))


def test_update_discrete_identity_keeps_distribution(tetra):
    ens = init_ensemble(uniform_state(tetra, 2), 1000, seed=43)
    tm = transition_matrix(np.eye(2), tetra, targets=(1,))
    out = update_discrete(ens, tm)
    np.testing.assert_allclose(
        out.hidden_vector.weights, ens.hidden_vector.weights, atol=1e-14
    )
    # molecules still redraw: same distribution, fresh sample
    assert not np.array_equal(out.directions, ens.directions)


def test_update_discrete_rejects_leaving_domain(tetra):
    # rotating the zero state onto the anti-aligned direction at
    # epsilon = 0.5 pushes a weight negative
    state = mix_with_uniform(named_state_quasi("zero", 1, tetra), 0.5)
    ens = init_ensemble(state, 100, seed=47)
    _, eigvecs = np.linalg.eigh(pauli_dot(tetra.vectors[0]))
    down = eigvecs[:, 0]
    u = np.column_stack([down, eigvecs[:, 1]])  # maps |0> onto |-n0>
    tm = transition_matrix(u, tetra, targets=(0,))
    with pytest.raises(NegativeQuasiWeight):
        update_discrete(ens, tm)


def test_update_discrete_deterministic(tetra):
    state = mix_with_uniform(named_state_quasi("zero", 2, tetra), 0.1)
    tm = transition_matrix(gate_matrix("H"), tetra, targets=(0,))
    a = update_discrete(init_ensemble(state, 300, seed=53), tm)
    b = update_discrete(init_ensemble(state, 300, seed=53), tm)
    assert np.array_equal(a.directions, b.directions)
    assert np.array_equal(a.lambdas_for(0), b.lambdas_for(0))


# === schedules ===


def test_schedule_validation():
    with pytest.raises(ValueError):
        UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS, gamma=2.0, dt=1.0, num_steps=10
        )
    with pytest.raises(ValueError):
        UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS, gamma=0.0, dt=1.0, num_steps=10
        )
    with pytest.raises(ValueError):
        UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS,
            gamma=0.5,
            dt=1.0,
            num_steps=10,
            pulse_intervals=((8, 12, 0),),
        )
    with pytest.raises(ValueError):
        UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS,
            gamma=0.5,
            dt=1.0,
            num_steps=10,
            pulse_intervals=((0, 4, 0), (3, 6, 1)),
        )
    with pytest.raises(ValueError):
        UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS,
            gamma=0.5,
            dt=1.0,
            num_steps=10,
            pulse_intervals=((0, 2, -1),),
        )
    # discrete mode ignores step geometry entirely
    UpdateSchedule(mode=ScheduleMode.DISCRETE)


def bell_setup(tetra, m: int, seed: int):
    state = mix_with_uniform(named_state_quasi("zero", 2, tetra), 1.0 / 9.0)
    circuit = Circuit(num_qubits=2).add("H", 0).add("CNOT", 0, 1)
    return init_ensemble(state, m, seed), circuit


def test_quasicontinuous_single_step_matches_discrete(tetra):
    # gamma*dt = 1 with one step per pulse is the discrete walk, bit for bit
    ens, circuit = bell_setup(tetra, 2000, seed=59)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS,
        gamma=1.0,
        dt=1.0,
        num_steps=2,
        pulse_intervals=((0, 1, 0), (1, 2, 1)),
    )
    traj = run_quasicontinuous(ens, schedule, circuit, snapshot_steps=(0, 1, 2))
    step = ens
    for gate, snap in zip(circuit.gates, traj.snapshots[1:]):
        tm = transition_matrix(gate.resolve(), tetra, gate.targets)
        step = update_discrete(step, tm)
        assert np.array_equal(snap.directions, step.directions)
        assert np.array_equal(snap.update_ordinals, step.update_ordinals)
        np.testing.assert_allclose(
            snap.hidden_vector.weights, step.hidden_vector.weights, atol=0
        )


def test_quasicontinuous_no_gates_static_distribution(tetra):
    state = mix_with_uniform(named_state_quasi("zero", 2, tetra), 0.1)
    ens = init_ensemble(state, 5000, seed=61)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=0.3, dt=1.0, num_steps=10
    )
    traj = run_quasicontinuous(ens, schedule, Circuit(num_qubits=2))
    assert traj.steps == (0, 10)
    first, last = traj.snapshots
    np.testing.assert_allclose(
        last.hidden_vector.weights, first.hidden_vector.weights, atol=0
    )
    assert not np.array_equal(last.directions, first.directions)


def test_quasicontinuous_update_rate(tetra):
    m = 100_000
    num_steps, gamma = 40, 0.25
    ens = init_ensemble(uniform_state(tetra, 1), m, seed=67)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=gamma, dt=1.0, num_steps=num_steps
    )
    traj = run_quasicontinuous(ens, schedule, Circuit(num_qubits=1))
    ordinals = traj.snapshots[-1].update_ordinals.astype(float)
    expected = num_steps * gamma
    se = np.sqrt(num_steps * gamma * (1 - gamma) / m)
    assert abs(ordinals.mean() - expected) <= 5.0 * se


def test_quasicontinuous_forced_update_at_pulse_end(tetra):
    # even at a tiny update rate nobody leaves a pulse stale
    ens, circuit = bell_setup(tetra, 3000, seed=71)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS,
        gamma=0.05,
        dt=1.0,
        num_steps=8,
        pulse_intervals=((0, 4, 0), (4, 8, 1)),
    )
    traj = run_quasicontinuous(ens, schedule, circuit, snapshot_steps=(4, 8))
    assert traj.snapshots[0].update_ordinals.min() >= 1
    assert traj.snapshots[1].update_ordinals.min() >= 2
    expected = ens.hidden_vector
    for gate in circuit.gates:
        expected = apply_gate(
            expected, transition_matrix(gate.resolve(), tetra, gate.targets)
        )
    np.testing.assert_allclose(
        traj.snapshots[-1].hidden_vector.weights, expected.weights, atol=1e-15
    )


def test_quasicontinuous_argument_errors(tetra):
    ens, circuit = bell_setup(tetra, 50, seed=73)
    discrete = UpdateSchedule(mode=ScheduleMode.DISCRETE)
    with pytest.raises(ValueError):
        run_quasicontinuous(ens, discrete, circuit)
    bad_gate = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS,
        gamma=1.0,
        dt=1.0,
        num_steps=2,
        pulse_intervals=((0, 1, 7),),
    )
    with pytest.raises(ValueError):
        run_quasicontinuous(ens, bad_gate, circuit)
    ok = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=1.0, dt=1.0, num_steps=2
    )
    with pytest.raises(BadTrajectory):
        run_quasicontinuous(ens, ok, circuit, snapshot_steps=(5,))


def test_trajectory_times_scale_with_dt(tetra):
    ens, circuit = bell_setup(tetra, 50, seed=79)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS,
        gamma=1.0,
        dt=0.25,
        num_steps=4,
        pulse_intervals=((0, 2, 0), (2, 4, 1)),
    )
    traj = run_quasicontinuous(ens, schedule, circuit)
    assert traj.steps == (0, 2, 4)
    assert traj.times == (0.0, 0.5, 1.0)


def test_trajectory_outputs(tmp_path, tetra):
    ens, circuit = bell_setup(tetra, 400, seed=83)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS,
        gamma=1.0,
        dt=1.0,
        num_steps=2,
        pulse_intervals=((0, 1, 0), (1, 2, 1)),
    )
    traj = run_quasicontinuous(ens, schedule, circuit)
    specs = [("zz", MeasurementSpec.from_letters("zz")), ("x0", MeasurementSpec.from_letters("x0"))]
    csv_path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, specs, csv_path)
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "spec_id", "mean", "std_error"]
    assert len(rows) == 1 + len(traj.steps) * len(specs)
    float(rows[1][2])  # cells parse as floats

    sidecar = tmp_path / "traj.json"
    write_trajectory_sidecar(traj, sidecar)
    payload = json.loads(sidecar.read_text())
    assert payload["schedule"]["num_steps"] == 2
    assert payload["snapshot_steps"] == [0, 1, 2]
    assert payload["num_molecules"] == 400

    # identical rerun produces identical bytes
    ens2, _ = bell_setup(tetra, 400, seed=83)
    traj2 = run_quasicontinuous(ens2, schedule, circuit)
    csv2 = tmp_path / "traj2.csv"
    write_trajectory_csv(traj2, specs, csv2)
    assert csv2.read_bytes() == csv_path.read_bytes()
