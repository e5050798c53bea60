"""CHSH and temporal Bell-type combinations across the three engines."""

import json

import numpy as np
import pytest

from quasispin import (
    CHSH_BOUND,
    TEMPORAL_BOUND,
    BadTrajectory,
    ChshSetting,
    Circuit,
    LrhvPairSource,
    MeasurementSpec,
    OraclePairSource,
    QuasiPairSource,
    ScheduleMode,
    ShapeError,
    TemporalSetting,
    UpdateSchedule,
    chsh_report,
    chsh_value,
    estimate_correlation,
    init_ensemble,
    leggett_garg,
    mix_with_uniform,
    named_state_density,
    named_state_quasi,
    optimal_singlet_setting,
    pair_correlator_oracle,
    pair_correlator_quasi,
    pseudopure_state,
    quasi_from_density,
    qubit_outcomes,
    run_quasicontinuous,
    scan_max_chsh,
    temporal_correlation,
    temporal_report,
    uniform_state,
    write_bell_report,
)

ROOT8 = 2.0 * np.sqrt(2.0)
Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


def singlet_rho(epsilon: float) -> np.ndarray:
    return pseudopure_state(named_state_density("singlet_pair", 2), epsilon)


# === settings ===


def test_chsh_setting_validation():
    axes = (Z, X, Z, X)
    ChshSetting(qubit_pair=(0, 1), axes=axes)
    with pytest.raises(ShapeError):
        ChshSetting(qubit_pair=(1, 1), axes=axes)
    with pytest.raises(ShapeError):
        ChshSetting(qubit_pair=(0, 1), axes=(Z, X, Z))
    with pytest.raises(ShapeError):
        ChshSetting(qubit_pair=(0, 1), axes=(Z, X, Z, 2.0 * X))


def test_temporal_setting_validation():
    TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z)
    with pytest.raises(ShapeError):
        TemporalSetting(times=(0, 2, 1), qubit=0, axis=Z)
    with pytest.raises(ShapeError):
        TemporalSetting(times=(0, 0, 1), qubit=0, axis=Z)
    with pytest.raises(ShapeError):
        TemporalSetting(times=(0, 1, 2), qubit=0, axis=2.0 * Z)


def test_optimal_singlet_setting_axes():
    setting = optimal_singlet_setting()
    a, ap, b, bp = setting.axes
    np.testing.assert_allclose(a, Z, atol=0)
    np.testing.assert_allclose(ap, X, atol=0)
    np.testing.assert_allclose(b, -(Z + X) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(bp, (X - Z) / np.sqrt(2), atol=1e-15)


# === exact-engine values ===


def test_singlet_chsh_quantum_value():
    setting = optimal_singlet_setting()
    s_full = chsh_value(pair_correlator_oracle(singlet_rho(1.0)), setting)
    assert s_full == pytest.approx(ROOT8, abs=1e-12)
    s_ninth = chsh_value(pair_correlator_oracle(singlet_rho(1.0 / 9.0)), setting)
    assert s_ninth == pytest.approx(ROOT8 / 9.0, abs=1e-12)


def test_singlet_chsh_quasi_matches_oracle(tetra, cardinal):
    setting = optimal_singlet_setting()
    for frame in (tetra, cardinal):
        state = quasi_from_density(singlet_rho(1.0 / 9.0), frame)
        s = chsh_value(pair_correlator_quasi(state), setting)
        assert s == pytest.approx(ROOT8 / 9.0, abs=1e-10)


def test_maximally_mixed_chsh_is_zero():
    setting = optimal_singlet_setting()
    s = chsh_value(pair_correlator_oracle(np.eye(4) / 4.0), setting)
    assert s == pytest.approx(0.0, abs=1e-12)


def test_pair_sources_agree(tetra):
    rho = singlet_rho(0.5)
    state = quasi_from_density(rho, tetra)
    axes = [Z, X, (Z + X) / np.sqrt(2)]
    c_oracle, se_oracle = OraclePairSource(rho).correlation_matrix(axes, axes)
    c_quasi, se_quasi = QuasiPairSource(state).correlation_matrix(axes, axes)
    np.testing.assert_allclose(c_oracle, c_quasi, atol=1e-10)
    assert not se_oracle.any() and not se_quasi.any()


# === scans ===


def test_scan_finds_singlet_optimum():
    # the x-z grid at resolution 8 contains the optimal angles exactly
    result = scan_max_chsh(OraclePairSource(singlet_rho(1.0)), resolution=8)
    assert result.max_abs_s == pytest.approx(ROOT8, abs=1e-9)
    assert result.std_error == 0.0
    finer = scan_max_chsh(OraclePairSource(singlet_rho(1.0)), resolution=16)
    assert finer.max_abs_s == pytest.approx(ROOT8, abs=1e-9)


def test_scan_resolution_floor():
    with pytest.raises(ValueError):
        scan_max_chsh(OraclePairSource(singlet_rho(1.0)), resolution=4)


def test_scan_product_state_classical():
    rho = pseudopure_state(named_state_density("zero", 2), 1.0)
    result = scan_max_chsh(OraclePairSource(rho), resolution=12)
    assert result.max_abs_s <= CHSH_BOUND + 1e-9


def test_scan_full_sphere_option():
    result = scan_max_chsh(
        OraclePairSource(singlet_rho(1.0)), resolution=8, full_sphere=True
    )
    assert CHSH_BOUND < result.max_abs_s <= ROOT8 + 1e-9


def test_lrhv_pair_source_matches_estimates(tetra):
    state = mix_with_uniform(named_state_quasi("singlet_pair", 2, tetra), 1.0 / 9.0)
    ens = init_ensemble(state, 20_000, seed=5)
    source = LrhvPairSource(ens)
    axes = [Z, X]
    c, se = source.correlation_matrix(axes, axes)
    for i, aa in enumerate(axes):
        for j, ab in enumerate(axes):
            est = estimate_correlation(ens, MeasurementSpec((aa, ab)))
            assert c[i, j] == pytest.approx(est.mean, abs=1e-12)
            assert se[i, j] == pytest.approx(est.std_error, abs=1e-12)


def test_lrhv_scan_respects_classical_bound(tetra):
    state = mix_with_uniform(named_state_quasi("singlet_pair", 2, tetra), 1.0 / 9.0)
    ens = init_ensemble(state, 100_000, seed=7)
    result = scan_max_chsh(LrhvPairSource(ens), resolution=12)
    assert result.max_abs_s <= CHSH_BOUND + 5.0 * result.std_error


def test_lrhv_singlet_optimum_value(tetra):
    state = mix_with_uniform(named_state_quasi("singlet_pair", 2, tetra), 1.0 / 9.0)
    ens = init_ensemble(state, 200_000, seed=11)
    setting = optimal_singlet_setting()
    a, ap, b, bp = setting.axes
    ests = [
        estimate_correlation(ens, MeasurementSpec(pair))
        for pair in ((a, b), (a, bp), (ap, b), (ap, bp))
    ]
    s = ests[0].mean + ests[1].mean + ests[2].mean - ests[3].mean
    se = float(np.sqrt(sum(e.std_error**2 for e in ests)))
    assert abs(s - ROOT8 / 9.0) <= 5.0 * se
    assert abs(s) <= CHSH_BOUND


# === temporal correlations ===


def static_trajectory(tetra, m=1000, seed=13):
    state = mix_with_uniform(named_state_quasi("zero", 1, tetra), 0.2)
    ens = init_ensemble(state, m, seed=seed)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=1e-9, dt=1.0, num_steps=2
    )
    return run_quasicontinuous(ens, schedule, Circuit(num_qubits=1), snapshot_steps=(0, 1, 2))


def test_static_trajectory_perfect_memory(tetra):
    traj = static_trajectory(tetra)
    # the fixed seed produces no updates at this rate, so outcomes repeat
    assert traj.snapshots[-1].update_ordinals.max() == 0
    est = temporal_correlation(traj, 0, 2, qubit=0, axis=Z)
    assert est.mean == 1.0
    assert est.std_error == 0.0
    k3 = leggett_garg(traj, TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z))
    assert k3.mean == 1.0


def test_leggett_garg_per_molecule_values(tetra):
    state = uniform_state(tetra, 1)
    ens = init_ensemble(state, 5000, seed=17)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=0.5, dt=1.0, num_steps=4
    )
    traj = run_quasicontinuous(
        ens, schedule, Circuit(num_qubits=1), snapshot_steps=(0, 2, 4)
    )
    o1 = qubit_outcomes(traj.snapshots[0], 0, Z)
    o2 = qubit_outcomes(traj.snapshots[1], 0, Z)
    o3 = qubit_outcomes(traj.snapshots[2], 0, Z)
    per_molecule = o1 * o2 + o2 * o3 - o1 * o3
    assert set(np.unique(per_molecule)) <= {1.0, -3.0}
    k3 = leggett_garg(traj, TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z))
    assert k3.mean == pytest.approx(per_molecule.mean(), abs=1e-12)
    assert k3.mean <= TEMPORAL_BOUND + 5.0 * k3.std_error


def test_decorrelating_trajectory(tetra):
    # full refresh every step on the maximally mixed state: no memory
    ens = init_ensemble(uniform_state(tetra, 1), 100_000, seed=19)
    schedule = UpdateSchedule(
        mode=ScheduleMode.QUASICONTINUOUS, gamma=1.0, dt=1.0, num_steps=2
    )
    traj = run_quasicontinuous(
        ens, schedule, Circuit(num_qubits=1), snapshot_steps=(0, 1, 2)
    )
    est = temporal_correlation(traj, 0, 1, qubit=0, axis=Z)
    assert abs(est.mean) <= 5.0 * est.std_error
    k3 = leggett_garg(traj, TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z))
    assert abs(k3.mean) <= 5.0 * k3.std_error


def test_temporal_bound_across_schedules(tetra):
    state = mix_with_uniform(named_state_quasi("zero", 1, tetra), 0.25)
    circuit = Circuit(num_qubits=1).add("H", 0)
    for gamma, steps, pulses in (
        (0.3, 6, ((2, 4, 0),)),
        (1.0, 3, ((1, 2, 0),)),
        (0.1, 10, ()),
    ):
        ens = init_ensemble(state, 50_000, seed=23)
        schedule = UpdateSchedule(
            mode=ScheduleMode.QUASICONTINUOUS,
            gamma=gamma,
            dt=1.0,
            num_steps=steps,
            pulse_intervals=pulses,
        )
        traj = run_quasicontinuous(
            ens, schedule, circuit, snapshot_steps=(0, steps // 2, steps)
        )
        k3 = leggett_garg(traj, TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z))
        assert k3.mean <= TEMPORAL_BOUND + 5.0 * k3.std_error


def test_temporal_index_errors(tetra):
    traj = static_trajectory(tetra, m=50)
    with pytest.raises(BadTrajectory):
        temporal_correlation(traj, 0, 9, qubit=0, axis=Z)
    with pytest.raises(BadTrajectory):
        leggett_garg(traj, TemporalSetting(times=(0, 1, 9), qubit=0, axis=Z))


# === reports ===


def test_chsh_report_fields(tmp_path):
    setting = optimal_singlet_setting()
    report = chsh_report(setting, s=0.31, std_error=0.004)
    assert report["kind"] == "chsh"
    assert report["bound"] == CHSH_BOUND
    assert report["violated"] is False
    inflated = chsh_report(setting, s=2.5, std_error=0.01)
    assert inflated["violated"] is True
    path = tmp_path / "bell.json"
    write_bell_report(report, path)
    assert json.loads(path.read_text())["S"] == 0.31


def test_temporal_report_fields(tetra):
    traj = static_trajectory(tetra, m=50)
    setting = TemporalSetting(times=(0, 1, 2), qubit=0, axis=Z)
    report = temporal_report(setting, leggett_garg(traj, setting))
    assert report["kind"] == "leggett_garg"
    assert report["bound"] == TEMPORAL_BOUND
    assert report["K3"] == 1.0
    assert report["violated"] is False
