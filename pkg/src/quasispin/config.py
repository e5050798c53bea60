"""Experiment configuration and circuit files.

Config files are flat key = value text with sections ([experiment],
[schedule], [bell], [output]). Circuit files are line-oriented: one
gate per line as `NAME(params) targets...`, with '#' comments. Paths
inside either file resolve relative to the file itself, so a config
directory is portable.
"""

from __future__ import annotations

import configparser
import enum
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import BadUnitary, CircuitSyntaxError, ConfigError
from .frames import Frame, build_frame, load_frame
from .gates import GATE_NAMES, check_unitary, gate_matrix, num_gate_qubits
from .lrhv import ScheduleMode, UpdateSchedule
from .oracle import MAX_ORACLE_QUBITS, Circuit, Gate
from .quasi import MeasurementSpec
from .states import NAMED_STATES, check_named_state, load_density_matrix

MAX_QUASI_QUBITS = 12

_RAW_MAX_QUBITS = 3

_GATE_HEAD = re.compile(r"^([A-Za-z][A-Za-z0-9]*)(?:\(([^)]*)\))?$")


class EngineChoice(enum.Enum):
    ORACLE = "oracle"
    QUASI = "quasi"
    LRHV = "lrhv"
    ALL = "all"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; see the package README for the file
    format that produces it."""

    num_qubits: int
    frame: Frame
    initial_state: str  # named state, or "raw"
    initial_density: np.ndarray | None  # set when initial_state == "raw"
    epsilon: float
    alpha: float | None  # set when epsilon came from the alpha scaling
    circuit: Circuit
    specs: tuple  # of (spec_id, MeasurementSpec)
    engine: EngineChoice
    num_molecules: int
    seed: int
    schedule: UpdateSchedule
    bell_pair: tuple[int, int] | None = None
    out_csv: str | None = None
    out_json: str | None = None
    plots_dir: str | None = None
    config_dir: str = "."

    def engines(self) -> tuple[str, ...]:
        """Engine names this config actually runs; the oracle drops out
        beyond its register cap when 'all' was requested."""
        if self.engine is EngineChoice.ALL:
            names = []
            if self.num_qubits <= MAX_ORACLE_QUBITS:
                names.append("oracle")
            names.extend(["quasi", "lrhv"])
            return tuple(names)
        return (self.engine.value,)


def _parse_params(text: str | None, path, line_no: int) -> tuple[float, ...]:
    if text is None or not text.strip():
        return ()
    params = []
    for tok in text.split(","):
        try:
            params.append(float(tok))
        except ValueError:
            raise CircuitSyntaxError(
                path, line_no, f"bad parameter {tok.strip()!r}"
            ) from None
    return tuple(params)


def _parse_targets(tokens, num_qubits: int, path, line_no: int) -> tuple[int, ...]:
    if not tokens:
        raise CircuitSyntaxError(path, line_no, "no target qubits")
    targets = []
    for tok in tokens:
        try:
            targets.append(int(tok))
        except ValueError:
            raise CircuitSyntaxError(path, line_no, f"bad target {tok!r}") from None
    for t in targets:
        if not 0 <= t < num_qubits:
            raise CircuitSyntaxError(
                path, line_no, f"target {t} outside register of {num_qubits}"
            )
    if len(set(targets)) != len(targets):
        raise CircuitSyntaxError(path, line_no, f"duplicate target in {targets}")
    return tuple(targets)


def parse_circuit(path, num_qubits: int) -> Circuit:
    """Parse a circuit file. Raises CircuitSyntaxError with the line
    number for malformed lines, BadUnitary for a non-unitary RAW
    matrix."""
    path = Path(path)
    gates = []
    for line_no, raw_line in enumerate(path.read_text().splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = _GATE_HEAD.match(tokens[0])
        if head is None:
            raise CircuitSyntaxError(path, line_no, f"bad gate token {tokens[0]!r}")
        name = head.group(1).upper()
        params = _parse_params(head.group(2), path, line_no)
        if name == "RAW":
            if params:
                raise CircuitSyntaxError(path, line_no, "RAW takes no parameters")
            if len(tokens) < 2:
                raise CircuitSyntaxError(path, line_no, "RAW needs a matrix file")
            matrix_path = path.parent / tokens[1]
            try:
                matrix = np.atleast_2d(np.loadtxt(matrix_path, dtype=complex))
            except OSError as exc:
                raise CircuitSyntaxError(path, line_no, str(exc)) from None
            matrix = check_unitary(matrix)
            k = num_gate_qubits(matrix)
            if k > _RAW_MAX_QUBITS:
                raise CircuitSyntaxError(
                    path, line_no, f"RAW matrix acts on {k} qubits, max {_RAW_MAX_QUBITS}"
                )
            targets = _parse_targets(tokens[2:], num_qubits, path, line_no)
            if len(targets) != k:
                raise CircuitSyntaxError(
                    path, line_no, f"{k}-qubit matrix with {len(targets)} targets"
                )
            gates.append(Gate(name=name, targets=targets, matrix=matrix))
            continue
        if name not in GATE_NAMES:
            raise CircuitSyntaxError(path, line_no, f"unknown gate {name!r}")
        try:
            matrix = gate_matrix(name, params)
        except (ValueError, BadUnitary) as exc:
            raise CircuitSyntaxError(path, line_no, str(exc)) from None
        k = num_gate_qubits(matrix)
        targets = _parse_targets(tokens[1:], num_qubits, path, line_no)
        if len(targets) != k:
            raise CircuitSyntaxError(
                path, line_no, f"{name} acts on {k} qubits, got targets {targets}"
            )
        gates.append(Gate(name=name, targets=targets, params=params))
    return Circuit(num_qubits=num_qubits, gates=tuple(gates))


_KNOWN_KEYS = {
    "experiment": {
        "num_qubits",
        "frame",
        "frame_file",
        "initial_state",
        "epsilon",
        "alpha",
        "circuit",
        "specs",
        "engine",
        "molecules",
        "seed",
    },
    "schedule": {"mode", "gamma", "dt", "pulse_steps", "gap_steps"},
    "bell": {"pair"},
    "output": {"csv", "json", "plots"},
}


def _config_error(path, detail: str) -> ConfigError:
    return ConfigError(f"{path}: {detail}")


def _get(section, key, default=None):
    return section.get(key, default)


def build_pulse_schedule(
    mode: ScheduleMode,
    num_gates: int,
    gamma: float = 1.0,
    dt: float = 1.0,
    pulse_steps: int = 1,
    gap_steps: int = 0,
) -> UpdateSchedule:
    """Timeline with one pulse per circuit gate: gap, pulse, gap, ...,
    pulse, gap. Discrete mode ignores the step geometry."""
    if mode is ScheduleMode.DISCRETE:
        return UpdateSchedule(mode=mode)
    if pulse_steps < 1 or gap_steps < 0:
        raise ValueError(f"bad step counts pulse={pulse_steps} gap={gap_steps}")
    intervals = []
    cursor = gap_steps
    for g in range(num_gates):
        intervals.append((cursor, cursor + pulse_steps, g))
        cursor += pulse_steps + gap_steps
    return UpdateSchedule(
        mode=mode,
        gamma=gamma,
        dt=dt,
        num_steps=cursor if num_gates else gap_steps,
        pulse_intervals=tuple(intervals),
    )


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise _config_error(path, f"parse failure: {exc}") from None

    for section in cp.sections():
        if section not in _KNOWN_KEYS:
            raise _config_error(path, f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN_KEYS[section]:
                raise _config_error(path, f"unknown key {key!r} in [{section}]")
    if "experiment" not in cp:
        raise _config_error(path, "missing [experiment] section")
    exp = cp["experiment"]

    try:
        num_qubits = int(exp["num_qubits"])
    except KeyError:
        raise _config_error(path, "missing num_qubits") from None
    except ValueError:
        raise _config_error(path, f"bad num_qubits {exp['num_qubits']!r}") from None
    if not 1 <= num_qubits <= MAX_QUASI_QUBITS:
        raise _config_error(
            path, f"num_qubits {num_qubits} outside 1..{MAX_QUASI_QUBITS}"
        )

    frame_file = _get(exp, "frame_file")
    if frame_file:
        frame = load_frame(path.parent / frame_file)
    else:
        kind = _get(exp, "frame", "tetrahedron")
        try:
            frame = build_frame(kind)
        except ValueError as exc:
            raise _config_error(path, str(exc)) from None

    state_value = _get(exp, "initial_state")
    if not state_value:
        raise _config_error(path, "missing initial_state")
    initial_density = None
    if state_value.startswith("raw:"):
        initial_state = "raw"
        if num_qubits > MAX_ORACLE_QUBITS:
            raise _config_error(
                path, f"raw initial states need num_qubits <= {MAX_ORACLE_QUBITS}"
            )
        initial_density = load_density_matrix(
            path.parent / state_value[4:].strip(), num_qubits
        )
    elif state_value in NAMED_STATES:
        initial_state = state_value
        try:
            check_named_state(initial_state, num_qubits)
        except ValueError as exc:
            raise _config_error(path, str(exc)) from None
    else:
        raise _config_error(
            path,
            f"initial_state {state_value!r} is neither raw:PATH nor one of {NAMED_STATES}",
        )

    eps_value = _get(exp, "epsilon")
    if not eps_value:
        raise _config_error(path, "missing epsilon")
    alpha = None
    if eps_value.strip() == "from_alpha":
        from .nmr import NmrParams, epsilon_pseudopure

        alpha = float(_get(exp, "alpha", "2e-5"))
        epsilon = epsilon_pseudopure(NmrParams(alpha=alpha, num_qubits=num_qubits))
    else:
        try:
            epsilon = float(eps_value)
        except ValueError:
            raise _config_error(path, f"bad epsilon {eps_value!r}") from None
    if not 0.0 <= epsilon <= 1.0:
        raise _config_error(path, f"epsilon {epsilon} outside [0, 1]")

    circuit_file = _get(exp, "circuit")
    if circuit_file:
        circuit = parse_circuit(path.parent / circuit_file, num_qubits)
    else:
        circuit = Circuit(num_qubits=num_qubits, gates=())

    specs_value = _get(exp, "specs")
    if not specs_value:
        raise _config_error(path, "missing specs")
    specs = []
    for tok in re.split(r"[\s,]+", specs_value.strip()):
        if not tok:
            continue
        if len(tok) != num_qubits:
            raise _config_error(
                path, f"spec {tok!r} has {len(tok)} axes for {num_qubits} qubits"
            )
        try:
            specs.append((tok, MeasurementSpec.from_letters(tok)))
        except ValueError as exc:
            raise _config_error(path, f"spec {tok!r}: {exc}") from None
    if not specs:
        raise _config_error(path, "empty specs list")

    engine_value = _get(exp, "engine", "all")
    try:
        engine = EngineChoice(engine_value)
    except ValueError:
        raise _config_error(path, f"unknown engine {engine_value!r}") from None
    if engine is EngineChoice.ORACLE and num_qubits > MAX_ORACLE_QUBITS:
        raise _config_error(
            path, f"oracle engine capped at {MAX_ORACLE_QUBITS} qubits"
        )

    try:
        num_molecules = int(_get(exp, "molecules", "1000000"))
        seed = int(_get(exp, "seed", "0"))
    except ValueError as exc:
        raise _config_error(path, str(exc)) from None
    if num_molecules < 1:
        raise _config_error(path, f"molecules {num_molecules} < 1")
    if seed < 0:
        raise _config_error(path, f"seed {seed} < 0")

    sched = cp["schedule"] if "schedule" in cp else {}
    mode_value = _get(sched, "mode", "discrete")
    try:
        mode = ScheduleMode(mode_value)
    except ValueError:
        raise _config_error(path, f"unknown schedule mode {mode_value!r}") from None
    try:
        schedule = build_pulse_schedule(
            mode,
            len(circuit.gates),
            gamma=float(_get(sched, "gamma", "1.0")),
            dt=float(_get(sched, "dt", "1.0")),
            pulse_steps=int(_get(sched, "pulse_steps", "1")),
            gap_steps=int(_get(sched, "gap_steps", "0")),
        )
    except ValueError as exc:
        raise _config_error(path, str(exc)) from None

    bell_pair = None
    if "bell" in cp:
        pair_value = _get(cp["bell"], "pair", "0 1")
        toks = re.split(r"[\s,]+", pair_value.strip())
        if len(toks) != 2:
            raise _config_error(path, f"bell pair {pair_value!r} needs two qubits")
        try:
            bell_pair = (int(toks[0]), int(toks[1]))
        except ValueError:
            raise _config_error(path, f"bad bell pair {pair_value!r}") from None
        for q in bell_pair:
            if not 0 <= q < num_qubits:
                raise _config_error(path, f"bell qubit {q} outside register")
        if bell_pair[0] == bell_pair[1]:
            raise _config_error(path, "bell pair must name two distinct qubits")

    out = cp["output"] if "output" in cp else {}

    return ExperimentConfig(
        num_qubits=num_qubits,
        frame=frame,
        initial_state=initial_state,
        initial_density=initial_density,
        epsilon=epsilon,
        alpha=alpha,
        circuit=circuit,
        specs=tuple(specs),
        engine=engine,
        num_molecules=num_molecules,
        seed=seed,
        schedule=schedule,
        bell_pair=bell_pair,
        out_csv=_get(out, "csv"),
        out_json=_get(out, "json"),
        plots_dir=_get(out, "plots"),
        config_dir=str(path.parent),
    )


def apply_overrides(
    cfg: ExperimentConfig,
    engine: str | None = None,
    seed: int | None = None,
    molecules: int | None = None,
    out_csv: str | None = None,
    out_json: str | None = None,
    plots_dir: str | None = None,
) -> ExperimentConfig:
    """Command-line overrides on top of a parsed config."""
    updates = {}
    if engine is not None:
        choice = EngineChoice(engine)
        if choice is EngineChoice.ORACLE and cfg.num_qubits > MAX_ORACLE_QUBITS:
            raise ConfigError(f"oracle engine capped at {MAX_ORACLE_QUBITS} qubits")
        updates["engine"] = choice
    if seed is not None:
        if seed < 0:
            raise ConfigError(f"seed {seed} < 0")
        updates["seed"] = seed
    if molecules is not None:
        if molecules < 1:
            raise ConfigError(f"molecules {molecules} < 1")
        updates["num_molecules"] = molecules
    if out_csv is not None:
        updates["out_csv"] = out_csv
    if out_json is not None:
        updates["out_json"] = out_json
    if plots_dir is not None:
        updates["plots_dir"] = plots_dir
    return replace(cfg, **updates) if updates else cfg
