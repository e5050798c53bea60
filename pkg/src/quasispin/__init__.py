"""Quasidistribution simulator for bulk-ensemble NMR registers.

Three engines over the same states: a dense density-matrix oracle, an
exact weight-vector (quasidistribution) propagator, and a deterministic
local hidden-variable Monte Carlo whose correlators reproduce the
quantum predictions for every admissible pseudopure state.

Attributes are loaded lazily so the command-line entry point can pin
the BLAS thread environment before numpy is imported.
"""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

# public name -> defining submodule
_EXPORTS = {
    # frames
    "Frame": "frames",
    "FrameGram": "frames",
    "ValidationReport": "frames",
    "build_frame": "frames",
    "frame_gram": "frames",
    "load_frame": "frames",
    "validate_frame": "frames",
    # gates
    "GATE_NAMES": "gates",
    "gate_matrix": "gates",
    "check_unitary": "gates",
    # oracle
    "ZERO": "oracle",
    "Circuit": "oracle",
    "Gate": "oracle",
    "apply_unitary": "oracle",
    "check_density": "oracle",
    "correlation_trace": "oracle",
    "evolve": "oracle",
    "pseudopure_state": "oracle",
    "random_state": "oracle",
    "random_unitary": "oracle",
    # quasi
    "MeasurementSpec": "quasi",
    "QuasiState": "quasi",
    "TransitionMatrix": "quasi",
    "apply_gate": "quasi",
    "canonicalize": "quasi",
    "correlation_quasi": "quasi",
    "density_from_quasi": "quasi",
    "dual_operator": "quasi",
    "direction_projector": "quasi",
    "identity_transition": "quasi",
    "load_weights": "quasi",
    "min_weight_bound": "quasi",
    "mix_with_uniform": "quasi",
    "quasi_from_density": "quasi",
    "save_weights": "quasi",
    "transition_matrix": "quasi",
    "uniform_state": "quasi",
    # nmr
    "NmrParams": "nmr",
    "Regime": "nmr",
    "Thresholds": "nmr",
    "assert_lrhv_admissible": "nmr",
    "clamped_probabilities": "nmr",
    "epsilon_pseudopure": "nmr",
    "largest_unentangleable_n": "nmr",
    "thresholds": "nmr",
    # lrhv
    "CorrelationEstimate": "lrhv",
    "Ensemble": "lrhv",
    "Molecule": "lrhv",
    "ScheduleMode": "lrhv",
    "Trajectory": "lrhv",
    "UpdateSchedule": "lrhv",
    "estimate_correlation": "lrhv",
    "init_ensemble": "lrhv",
    "measure_component": "lrhv",
    "outcome_products": "lrhv",
    "qubit_outcomes": "lrhv",
    "run_quasicontinuous": "lrhv",
    "spin_wheel": "lrhv",
    "update_discrete": "lrhv",
    "write_trajectory_csv": "lrhv",
    "write_trajectory_sidecar": "lrhv",
    # bell
    "CHSH_BOUND": "bell",
    "ChshScanResult": "bell",
    "ChshSetting": "bell",
    "TEMPORAL_BOUND": "bell",
    "TemporalSetting": "bell",
    "LrhvPairSource": "bell",
    "OraclePairSource": "bell",
    "QuasiPairSource": "bell",
    "chsh_report": "bell",
    "chsh_value": "bell",
    "leggett_garg": "bell",
    "optimal_singlet_setting": "bell",
    "pair_correlator_oracle": "bell",
    "pair_correlator_quasi": "bell",
    "scan_max_chsh": "bell",
    "temporal_correlation": "bell",
    "temporal_report": "bell",
    "write_bell_report": "bell",
    # states
    "NAMED_STATES": "states",
    "check_named_state": "states",
    "load_density_matrix": "states",
    "named_state_density": "states",
    "named_state_quasi": "states",
    # config / cli
    "EngineChoice": "config",
    "ExperimentConfig": "config",
    "build_pulse_schedule": "config",
    "parse_circuit": "config",
    "parse_config": "config",
    "ComparisonReport": "cli",
    "run_experiment": "cli",
    # errors
    "QuasispinError": "errors",
    "FrameInvalid": "errors",
    "BadDirectionIndex": "errors",
    "BadDensityOperator": "errors",
    "BadUnitary": "errors",
    "BadTargets": "errors",
    "BadEpsilon": "errors",
    "ShapeError": "errors",
    "NegativeQuasiWeight": "errors",
    "BadTrajectory": "errors",
    "CircuitSyntaxError": "errors",
    "ConfigError": "errors",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name: str):
    module_name = _EXPORTS.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
