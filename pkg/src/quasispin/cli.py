"""Command-line front end.

Parses an experiment config, runs the requested engines (density-matrix
oracle, exact weight-vector propagation, hidden-variable Monte Carlo),
compares them, and emits a table, CSV, JSON, and optional figures.

Thread control must reach the BLAS before numpy loads, so this module
keeps numpy-touching imports inside functions; main() fixes the thread
environment first and imports the engines after.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

THREADS_ENV_VAR = "QUASISPIN_THREADS"

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

AGREEMENT_SIGMA = 5.0
# exact-vs-exact rows carry no MC error; allow this much absolute slack
EXACT_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class ReportRow:
    time: float
    spec_id: str
    oracle: float | None
    quasi: float | None
    lrhv_mean: float | None
    lrhv_std_error: float | None
    z_score: float | None


@dataclass(frozen=True)
class ComparisonReport:
    num_qubits: int
    frame_label: str
    initial_state: str
    epsilon: float
    alpha: float | None
    eta: float
    eta_prime: float
    regime: str
    engines: tuple[str, ...]
    num_molecules: int
    seed: int
    schedule_mode: str
    rows: tuple[ReportRow, ...]
    bell: dict | None

    @property
    def max_abs_z(self) -> float | None:
        zs = [abs(r.z_score) for r in self.rows if r.z_score is not None]
        return max(zs) if zs else None

    @property
    def passed(self) -> bool:
        for row in self.rows:
            if row.z_score is not None and not row.z_score <= AGREEMENT_SIGMA:
                return False
        if self.bell is not None and self.bell.get("violated"):
            return False
        return True


def _z_score(lrhv_mean: float, std_error: float, reference: float) -> float:
    disc = abs(lrhv_mean - reference)
    if std_error > 0.0:
        return disc / std_error
    return 0.0 if disc <= EXACT_MATCH_TOL else math.inf


def run_experiment(cfg) -> ComparisonReport:
    """Run every engine the config asks for at every checkpoint and
    assemble the comparison."""
    # deferred so main() can fix the thread environment first
    import numpy as np

    from .bell import CHSH_BOUND, optimal_singlet_setting
    from .errors import NegativeQuasiWeight
    from .lrhv import (
        ScheduleMode,
        estimate_correlation,
        init_ensemble,
        run_quasicontinuous,
        update_discrete,
    )
    from .nmr import thresholds
    from .oracle import ZERO, apply_unitary, correlation_trace, pseudopure_state
    from .quasi import (
        MeasurementSpec,
        apply_gate,
        correlation_quasi,
        mix_with_uniform,
        quasi_from_density,
        transition_matrix,
    )
    from .states import named_state_density, named_state_quasi

    n = cfg.num_qubits
    engines = cfg.engines()
    thr = thresholds(cfg.epsilon, n)
    gates = cfg.circuit.gates
    num_gates = len(gates)
    quasicontinuous = cfg.schedule.mode is ScheduleMode.QUASICONTINUOUS

    tm_cache: dict[int, object] = {}

    def gate_tm(index: int):
        tm = tm_cache.get(index)
        if tm is None:
            g = gates[index]
            tm = transition_matrix(g.resolve(), cfg.frame, g.targets)
            tm_cache[index] = tm
        return tm

    # checkpoints: (time, gate prefix, lrhv key)
    if quasicontinuous:
        schedule = cfg.schedule
        steps = sorted(
            {0, schedule.num_steps} | {end for _, end, _ in schedule.pulse_intervals}
        )
        prefix_of = {
            s: sum(1 for _, end, _ in schedule.pulse_intervals if end <= s)
            for s in steps
        }
        checkpoints = [(s * schedule.dt, prefix_of[s], i) for i, s in enumerate(steps)]
    else:
        checkpoints = [(float(k), k, k) for k in range(num_gates + 1)]
    prefixes = sorted({p for _, p, _ in checkpoints})

    # exact engines, walked gate by gate, sampled at each needed prefix
    oracle_vals: dict[int, dict[str, float]] = {}
    if "oracle" in engines:
        if cfg.initial_state == "raw":
            rho1 = cfg.initial_density
        else:
            rho1 = named_state_density(cfg.initial_state, n)
        rho = pseudopure_state(rho1, cfg.epsilon)
        done = 0
        for prefix in prefixes:
            while done < prefix:
                g = gates[done]
                rho = apply_unitary(rho, g.resolve(), g.targets)
                done += 1
            oracle_vals[prefix] = {
                sid: correlation_trace(rho, spec) for sid, spec in cfg.specs
            }

    quasi_vals: dict[int, dict[str, float]] = {}
    need_quasi_state = "quasi" in engines or "lrhv" in engines
    if need_quasi_state:
        if cfg.initial_state == "raw":
            q1 = quasi_from_density(cfg.initial_density, cfg.frame)
        else:
            q1 = named_state_quasi(cfg.initial_state, n, cfg.frame)
        w0 = mix_with_uniform(q1, cfg.epsilon)
    if "quasi" in engines:
        w = w0
        done = 0
        for prefix in prefixes:
            while done < prefix:
                w = apply_gate(w, gate_tm(done))
                done += 1
            quasi_vals[prefix] = {
                sid: correlation_quasi(w, spec) for sid, spec in cfg.specs
            }

    # hidden-variable engine, keyed per checkpoint
    lrhv_vals: dict[int, dict[str, tuple[float, float]]] = {}
    final_ensemble = None
    if "lrhv" in engines:
        try:
            if quasicontinuous:
                ens = init_ensemble(w0, cfg.num_molecules, cfg.seed)
                traj = run_quasicontinuous(
                    ens, cfg.schedule, cfg.circuit, snapshot_steps=steps
                )
                for i, snap in enumerate(traj.snapshots):
                    lrhv_vals[i] = {}
                    for sid, spec in cfg.specs:
                        est = estimate_correlation(snap, spec)
                        lrhv_vals[i][sid] = (est.mean, est.std_error)
                final_ensemble = traj.snapshots[-1]
            else:
                ens = init_ensemble(w0, cfg.num_molecules, cfg.seed)
                done = 0
                for _, prefix, key in checkpoints:
                    while done < prefix:
                        ens = update_discrete(ens, gate_tm(done))
                        done += 1
                    lrhv_vals[key] = {}
                    for sid, spec in cfg.specs:
                        est = estimate_correlation(ens, spec)
                        lrhv_vals[key][sid] = (est.mean, est.std_error)
                final_ensemble = ens
        except NegativeQuasiWeight as exc:
            tup = tuple(
                int(d)
                for d in np.unravel_index(exc.index, (cfg.frame.size,) * n)
            )
            raise NegativeQuasiWeight(
                exc.index,
                exc.value,
                detail=(
                    f"direction tuple {tup}; epsilon {cfg.epsilon:.6g} vs "
                    f"eta {thr.eta:.6g} ({thr.regime.value}); the state is "
                    "outside the hidden-variable model's domain"
                ),
            ) from exc

    rows = []
    for time, prefix, key in checkpoints:
        for sid, _ in cfg.specs:
            orc = oracle_vals.get(prefix, {}).get(sid)
            qsi = quasi_vals.get(prefix, {}).get(sid)
            lrhv = lrhv_vals.get(key, {}).get(sid)
            z = None
            if lrhv is not None:
                reference = orc if orc is not None else qsi
                if reference is not None:
                    z = _z_score(lrhv[0], lrhv[1], reference)
            rows.append(
                ReportRow(
                    time=time,
                    spec_id=sid,
                    oracle=orc,
                    quasi=qsi,
                    lrhv_mean=lrhv[0] if lrhv else None,
                    lrhv_std_error=lrhv[1] if lrhv else None,
                    z_score=z,
                )
            )

    bell = None
    if cfg.bell_pair is not None:
        setting = optimal_singlet_setting(cfg.bell_pair)

        def pair_spec(axis_a, axis_b):
            axes = [ZERO] * n
            axes[cfg.bell_pair[0]] = axis_a
            axes[cfg.bell_pair[1]] = axis_b
            return MeasurementSpec(tuple(axes))

        a, ap, b, bp = setting.axes
        pairs = [(a, b), (a, bp), (ap, b), (ap, bp)]
        signs = [1.0, 1.0, 1.0, -1.0]
        bell = {
            "kind": "chsh",
            "setting": {
                "qubit_pair": list(cfg.bell_pair),
                "axes": [[float(x) for x in ax] for ax in setting.axes],
            },
            "bound": CHSH_BOUND,
        }
        for engine in ("oracle", "quasi"):
            if engine not in engines:
                continue
            # exact engines: evaluate the four pair correlators on the
            # final state by rerunning the prefix walk (cheap at CLI sizes)
            if engine == "oracle":
                state = pseudopure_state(
                    cfg.initial_density
                    if cfg.initial_state == "raw"
                    else named_state_density(cfg.initial_state, n),
                    cfg.epsilon,
                )
                for g in gates:
                    state = apply_unitary(state, g.resolve(), g.targets)
                vals = [correlation_trace(state, pair_spec(x, y)) for x, y in pairs]
            else:
                w = w0
                for i in range(num_gates):
                    w = apply_gate(w, gate_tm(i))
                vals = [correlation_quasi(w, pair_spec(x, y)) for x, y in pairs]
            bell[f"S_{engine}"] = float(sum(s * v for s, v in zip(signs, vals)))
        if final_ensemble is not None:
            ests = [
                estimate_correlation(final_ensemble, pair_spec(x, y)) for x, y in pairs
            ]
            s_val = float(sum(s * e.mean for s, e in zip(signs, ests)))
            se = float(math.sqrt(sum(e.std_error**2 for e in ests)))
            bell["S_lrhv"] = s_val
            bell["std_error"] = se
            bell["violated"] = bool(abs(s_val) > CHSH_BOUND + AGREEMENT_SIGMA * se)
        else:
            bell["violated"] = False

    return ComparisonReport(
        num_qubits=n,
        frame_label=cfg.frame.label,
        initial_state=cfg.initial_state,
        epsilon=cfg.epsilon,
        alpha=cfg.alpha,
        eta=thr.eta,
        eta_prime=thr.eta_prime,
        regime=thr.regime.value,
        engines=engines,
        num_molecules=cfg.num_molecules,
        seed=cfg.seed,
        schedule_mode=cfg.schedule.mode.value,
        rows=tuple(rows),
        bell=bell,
    )


def _fmt(value: float | None, absent: str = "absent") -> str:
    if value is None:
        return absent
    if value is math.inf:
        return "inf"
    return f"{value:.9g}"


def render_table(report: ComparisonReport) -> str:
    lines = [
        f"qubits: {report.num_qubits}   frame: {report.frame_label}   "
        f"state: {report.initial_state}   engines: {', '.join(report.engines)}",
        f"epsilon: {report.epsilon:.9g}   eta: {report.eta:.9g}   "
        f"eta': {report.eta_prime:.9g}   regime: {report.regime}",
        f"molecules: {report.num_molecules}   seed: {report.seed}   "
        f"schedule: {report.schedule_mode}",
        "",
        f"{'time':>10}  {'spec':<14} {'oracle':>14} {'quasi':>14} "
        f"{'lrhv':>14} {'std_error':>12} {'z':>8}",
    ]
    for row in report.rows:
        lines.append(
            f"{row.time:>10.4g}  {row.spec_id:<14} {_fmt(row.oracle):>14} "
            f"{_fmt(row.quasi):>14} {_fmt(row.lrhv_mean):>14} "
            f"{_fmt(row.lrhv_std_error, ''):>12} {_fmt(row.z_score, ''):>8}"
        )
    if report.bell is not None:
        lines.append("")
        parts = [
            f"CHSH pair {tuple(report.bell['setting']['qubit_pair'])}:",
        ]
        for key in ("S_oracle", "S_quasi", "S_lrhv"):
            if key in report.bell:
                parts.append(f"{key} = {report.bell[key]:.6g}")
        if "std_error" in report.bell:
            parts.append(f"+- {report.bell['std_error']:.3g}")
        parts.append(f"bound {report.bell['bound']:g}")
        parts.append("VIOLATED" if report.bell["violated"] else "respected")
        lines.append("  ".join(parts))
    lines.append("")
    if report.max_abs_z is not None:
        lines.append(
            f"{'PASS' if report.passed else 'FAIL'} "
            f"(max |z| = {report.max_abs_z:.4g}, limit {AGREEMENT_SIGMA:g})"
        )
    else:
        lines.append("PASS (no Monte Carlo comparison requested)")
    return "\n".join(lines)


def _csv_cell(value: float | None) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_report_csv(report: ComparisonReport, path) -> None:
    """One row per checkpoint x spec; absent engines leave empty cells.
    Float cells use repr so identical runs are byte-identical."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["time", "spec_id", "oracle", "quasi", "lrhv_mean", "lrhv_std_error", "z_score"]
        )
        for row in report.rows:
            writer.writerow(
                [
                    repr(float(row.time)),
                    row.spec_id,
                    _csv_cell(row.oracle),
                    _csv_cell(row.quasi),
                    _csv_cell(row.lrhv_mean),
                    _csv_cell(row.lrhv_std_error),
                    _csv_cell(row.z_score),
                ]
            )


def report_as_dict(report: ComparisonReport) -> dict:
    def clean(value):
        if value is None:
            return None
        if isinstance(value, float) and not math.isfinite(value):
            return repr(value)
        return value

    return {
        "num_qubits": report.num_qubits,
        "frame": report.frame_label,
        "initial_state": report.initial_state,
        "epsilon": report.epsilon,
        "alpha": report.alpha,
        "thresholds": {
            "eta": report.eta,
            "eta_prime": report.eta_prime,
            "regime": report.regime,
        },
        "engines": list(report.engines),
        "num_molecules": report.num_molecules,
        "seed": report.seed,
        "schedule_mode": report.schedule_mode,
        "rows": [
            {
                "time": row.time,
                "spec_id": row.spec_id,
                "oracle": row.oracle,
                "quasi": row.quasi,
                "lrhv_mean": row.lrhv_mean,
                "lrhv_std_error": row.lrhv_std_error,
                "z_score": clean(row.z_score),
            }
            for row in report.rows
        ],
        "bell": report.bell,
        "max_abs_z": clean(report.max_abs_z),
        "passed": report.passed,
    }


def write_report_json(report: ComparisonReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_as_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _apply_thread_env(threads: int | None) -> None:
    if threads is None:
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw:
            threads = int(raw)
    if threads is not None:
        if threads < 1:
            raise SystemExit(f"thread count {threads} < 1")
        for var in _THREAD_VARS:
            os.environ[var] = str(threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasispin",
        description=(
            "Simulate pseudopure NMR states three ways (density-matrix "
            "oracle, exact weight vector, hidden-variable Monte Carlo) "
            "and compare."
        ),
    )
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument(
        "--engine",
        choices=["oracle", "quasi", "lrhv", "all"],
        help="override the config's engine selection",
    )
    parser.add_argument("--seed", type=int, help="override the master seed (u64)")
    parser.add_argument(
        "--molecules", type=int, help="override the ensemble size M"
    )
    parser.add_argument("--out-csv", help="write the comparison CSV here")
    parser.add_argument("--out-json", help="write the JSON summary here")
    parser.add_argument("--plots", help="render figures into this directory")
    parser.add_argument(
        "--threads",
        type=int,
        help=f"BLAS/OpenMP thread count (default ${THREADS_ENV_VAR}); never affects results",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_thread_env(args.threads)

    # numpy-touching imports only after the thread environment is fixed
    from .config import apply_overrides, parse_config
    from .errors import QuasispinError

    try:
        cfg = parse_config(args.config)
        cfg = apply_overrides(
            cfg,
            engine=args.engine,
            seed=args.seed,
            molecules=args.molecules,
            out_csv=args.out_csv,
            out_json=args.out_json,
            plots_dir=args.plots,
        )
        report = run_experiment(cfg)
    except QuasispinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(render_table(report))
    if cfg.out_csv:
        write_report_csv(report, cfg.out_csv)
    if cfg.out_json:
        write_report_json(report, cfg.out_json)
    if cfg.plots_dir:
        from .report import render_figures

        paths = render_figures(report, cfg.plots_dir)
        for p in paths:
            print(f"wrote {p}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
