"""
Command-line front end.

    gatelab constants
    gatelab coupling --eta 0.045 --n-max 3 [--oracle]
    gatelab simulate --config run.ini [-o trace.csv] [--gnuplot plot.gp]
    gatelab fidelity --config run.ini [--json]
    gatelab optimize --config run.ini [--free detuning duration] [--objective contrast]
    gatelab limits --epsilon 0.1 --table1 --table3
    gatelab fit --scenario fig3 [--trace trace.csv]
    gatelab sweep --config sweep.ini [--jobs 4] -o points.jsonl

Scenario files are INI with a ``[scenario]`` section and an optional
``[sweep]`` section. Every frequency key carries a ``_hz`` or ``_khz``
suffix. Exit status is 0 on success, 1 for invalid input and 2 when a
numerical procedure fails.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gatelab import constants as const
from gatelab import limits, thermal
from gatelab.coupling import coupling_matrix, coupling_oracle
from gatelab.dynamics import (
    PulseSpec,
    SystemBasis,
    build_hamiltonian,
    population_trace,
    resonance_detuning,
)
from gatelab.errors import GatelabError, NumericalError, ValidationError
from gatelab.gates import GateKind, evaluate_gate, monroe_eta, nominal_pulse, optimize_pulse
from gatelab.species import TrapConfig, lamb_dicke, load_species_registry

FLOAT_FORMAT = ".12g"

# keys whose values are frequencies; they must be written as <key>_hz or <key>_khz
FREQUENCY_KEYS = {
    "mode_x", "mode_y", "mode_z", "rabi", "sideband_rabi", "detuning", "detuning_offset",
    "spectator_x", "spectator_y", "range_detuning_offset",
}
PLAIN_KEYS = {
    "gate": str, "sideband": str, "eta_z": float, "phase_rad": float, "duration_us": float,
    "duration_correction_us": float, "n_max": int, "m": int, "corrected": "bool",
    "light_shift": str, "initial": str, "t_start_us": float, "t_stop_us": float, "steps": int,
    "species": str, "species_file": str, "ion_count": int, "mode_choice": str,
    "angle_x_deg": float, "angle_y_deg": float, "angle_z_deg": float,
    "spectator_x_eta": float, "spectator_x_nbar": float,
    "spectator_y_eta": float, "spectator_y_nbar": float,
    "restarts": int, "seed": int, "objective": str, "free": str,
    "range_duration_us": "pair", "check_truncation": "bool",
}
UNIT_SCALE = {"hz": const.TWO_PI, "khz": const.TWO_PI * const.KHZ}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FORMAT)
    return str(x)


def _round(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), FLOAT_FORMAT)) if math.isfinite(x) else str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def write_output(path, text: str) -> None:
    """Write ``text`` to ``path`` atomically, or to stdout for None or '-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def record_text(record: dict) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in record.items())


# ---------------------------------------------------------------- configuration


def _parse_bool(key, text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"{key}: expected a boolean, got {text!r}")


def _parse_number(key, text, kind=float):
    try:
        return kind(text.strip())
    except ValueError:
        raise ValidationError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def parse_values(raw: dict) -> dict:
    """Typed values from a raw key -> string mapping; frequencies become rad/s."""
    values = {}
    for key, text in raw.items():
        if key in PLAIN_KEYS:
            kind = PLAIN_KEYS[key]
            if kind == "bool":
                values[key] = _parse_bool(key, text)
            elif kind == "pair":
                parts = text.split()
                if len(parts) != 2:
                    raise ValidationError(f"{key}: expected two numbers")
                values[key] = tuple(_parse_number(key, p) for p in parts)
            elif kind is str:
                values[key] = text.strip()
            else:
                values[key] = _parse_number(key, text, kind)
            continue
        base, _, unit = key.rpartition("_")
        if base in FREQUENCY_KEYS and unit in UNIT_SCALE:
            if base in values:
                raise ValidationError(f"{base} given twice with different units")
            parts = text.split()
            if base.startswith("range_"):
                if len(parts) != 2:
                    raise ValidationError(f"{key}: expected two numbers")
                values[base] = tuple(_parse_number(key, p) * UNIT_SCALE[unit] for p in parts)
            else:
                values[base] = _parse_number(key, text) * UNIT_SCALE[unit]
            continue
        if key in FREQUENCY_KEYS:
            raise ValidationError(f"{key}: frequency keys need a _hz or _khz suffix")
        raise ValidationError(f"unknown key {key!r}")
    return values


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully resolved scenario: all frequencies in rad/s, times in seconds."""

    gate: GateKind
    sideband: str
    eta_z: float
    omega_z: float
    pulse: PulseSpec
    n_max: int = 3
    m: int = 2
    initial: str = "g0"
    times: tuple = ()
    spectators: tuple = ()
    restarts: int = 32
    seed: int = 0
    corrected: bool = False
    light_shift: str = "analytic"
    objective: str = "epsilon"
    free: tuple = ("detuning",)
    ranges: dict = field(default_factory=dict)
    check_truncation: bool = False

    @property
    def detuning_offset(self) -> float:
        if self.gate is GateKind.MONROE_CX:
            return self.pulse.detuning
        return self.pulse.detuning - resonance_detuning(self.sideband, self.omega_z)


def build_scenario(raw: dict) -> ScenarioConfig:
    v = parse_values(raw)
    gate = GateKind.parse(v.get("gate", "swap"))
    sideband = v.get("sideband", "carrier" if gate is GateKind.MONROE_CX else "red")
    if sideband not in ("red", "blue", "carrier"):
        raise ValidationError("sideband must be red, blue or carrier")
    if "mode_z" not in v:
        raise ValidationError("mode_z_hz or mode_z_khz is required")
    omega_z = v["mode_z"]
    m = v.get("m", 2)

    if gate is GateKind.MONROE_CX:
        eta = monroe_eta(m)
    elif "eta_z" in v:
        eta = v["eta_z"]
    elif "species" in v:
        registry = load_species_registry(v.get("species_file"))
        if v["species"] not in registry:
            raise ValidationError(f"unknown species {v['species']!r}")
        angles = tuple(math.radians(v.get(f"angle_{a}_deg", d)) for a, d in
                       (("x", 90.0), ("y", 90.0), ("z", 45.0)))
        trap = TrapConfig((v.get("mode_x", 10 * omega_z), v.get("mode_y", 10 * omega_z), omega_z),
                          v.get("ion_count", 1), angles, v.get("mode_choice", "com"))
        eta = lamb_dicke(registry[v["species"]], trap).eta_z
    else:
        raise ValidationError("give eta_z or a species to derive it")
    if eta <= 0:
        raise ValidationError("eta_z must be positive")

    if "rabi" in v and "sideband_rabi" in v:
        raise ValidationError("give rabi or sideband_rabi, not both")
    if "rabi" in v:
        rabi = v["rabi"]
    elif "sideband_rabi" in v:
        rabi = v["sideband_rabi"] / eta
    else:
        raise ValidationError("rabi_khz (or sideband_rabi_khz) is required")
    if rabi < 0:
        raise ValidationError("rabi frequency must be non-negative")

    corrected = v.get("corrected", False)
    light_shift = v.get("light_shift", "analytic")
    if light_shift not in ("analytic", "numeric"):
        raise ValidationError("light_shift must be analytic or numeric")
    phase = v.get("phase_rad", 0.0)
    if gate is GateKind.IDENTITY or (sideband == "carrier" and gate is not GateKind.MONROE_CX):
        t_nominal = math.pi / rabi if rabi > 0 else 0.0
        pulse = PulseSpec(rabi, 0.0, phase, t_nominal)
    elif rabi == 0:
        pulse = PulseSpec(0.0, resonance_detuning(sideband, omega_z), phase, 0.0)
    else:
        pulse = nominal_pulse(gate, eta, rabi, omega_z, corrected, sideband, light_shift, m,
                              v.get("duration_correction_us", 0.0) * 1e-6, phase)
    if "detuning" in v and "detuning_offset" in v:
        raise ValidationError("give detuning or detuning_offset, not both")
    if "detuning" in v:
        pulse = pulse.replace(detuning=v["detuning"])
    elif "detuning_offset" in v:
        bare = 0.0 if sideband == "carrier" else resonance_detuning(sideband, omega_z)
        pulse = pulse.replace(detuning=bare + v["detuning_offset"])
    if "duration_us" in v:
        pulse = pulse.replace(duration=v["duration_us"] * 1e-6)

    n_max = v.get("n_max", 3)
    SystemBasis(n_max)
    default_initial = "e0" if sideband == "red" and gate is not GateKind.MONROE_CX else "g0"
    initial = v.get("initial", default_initial)
    SystemBasis(n_max).index(initial)

    steps = v.get("steps", 301)
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    t_start = v.get("t_start_us", 0.0) * 1e-6
    t_stop = v.get("t_stop_us", 3 * pulse.duration * 1e6) * 1e-6
    if t_start < 0 or t_stop < t_start:
        raise ValidationError("need 0 <= t_start_us <= t_stop_us")
    times = tuple(np.linspace(t_start, t_stop, steps))

    spectators = []
    for axis in ("x", "y"):
        keys = [f"spectator_{axis}_eta", f"spectator_{axis}", f"spectator_{axis}_nbar"]
        present = [k in v for k in keys]
        if any(present) and not all(present):
            raise ValidationError(f"spectator {axis} needs _eta, _hz/_khz and _nbar")
        if all(present):
            spectators.append(thermal.ThermalMode(v[keys[0]], v[keys[1]], v[keys[2]], axis))

    free = tuple(v.get("free", "detuning").replace(",", " ").split())
    ranges = {}
    if "range_detuning_offset" in v:
        bare = 0.0 if gate is GateKind.MONROE_CX else resonance_detuning(sideband, omega_z)
        lo, hi = v["range_detuning_offset"]
        ranges["detuning"] = (bare + lo, bare + hi)
    if "range_duration_us" in v:
        lo, hi = v["range_duration_us"]
        ranges["duration"] = (lo * 1e-6, hi * 1e-6)
    restarts = v.get("restarts", 32)
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    return ScenarioConfig(gate, sideband, eta, omega_z, pulse, n_max, m, initial, times,
                          tuple(spectators), restarts, v.get("seed", 0), corrected, light_shift,
                          v.get("objective", "epsilon"), free, ranges,
                          v.get("check_truncation", False))


@dataclass(frozen=True)
class SweepAxis:
    key: str
    values: tuple


def read_config(path) -> tuple[dict, list[SweepAxis]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        if not parser.read(path, encoding="utf-8"):
            raise ValidationError(f"cannot read config file {path}")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    extra = set(parser.sections()) - {"scenario", "sweep"}
    if extra:
        raise ValidationError(f"unknown sections {sorted(extra)}")
    if not parser.has_section("scenario"):
        raise ValidationError("config needs a [scenario] section")
    raw = dict(parser["scenario"])
    axes = []
    if parser.has_section("sweep"):
        for name, text in parser["sweep"].items():
            if name not in ("axis1", "axis2"):
                raise ValidationError(f"[sweep]: unknown key {name!r}")
            parts = text.split()
            if len(parts) != 4:
                raise ValidationError(f"[sweep] {name}: expected 'key start stop steps'")
            key = parts[0]
            start = _parse_number(name, parts[1])
            stop = _parse_number(name, parts[2])
            steps = _parse_number(name, parts[3], int)
            if steps < 1:
                raise ValidationError(f"[sweep] {name}: empty range (steps must be >= 1)")
            axes.append((name, SweepAxis(key, tuple(np.linspace(start, stop, steps)))))
        names = [n for n, _ in axes]
        if "axis2" in names and "axis1" not in names:
            raise ValidationError("[sweep]: axis2 given without axis1")
        axes = [a for _, a in sorted(axes, key=lambda item: item[0])]
    return raw, axes


# --------------------------------------------------------------------- reports


def report_record(cfg: ScenarioConfig, report) -> dict:
    pulse = report.pulse_used or cfg.pulse
    offset = pulse.detuning - (0.0 if cfg.gate is GateKind.MONROE_CX
                               else resonance_detuning(cfg.sideband, cfg.omega_z))
    record = {
        "gate": cfg.gate.value,
        "sideband": cfg.sideband,
        "eta_z": cfg.eta_z,
        "rabi_khz": const.angular_to_khz(pulse.rabi),
        "mode_z_khz": const.angular_to_khz(cfg.omega_z),
        "detuning_khz": const.angular_to_khz(pulse.detuning),
        "detuning_offset_khz": const.angular_to_khz(offset),
        "phase_rad": pulse.phase,
        "duration_us": pulse.duration * 1e6,
        "light_shift_khz": const.angular_to_khz(report.light_shift_applied),
        "phase_correction_rad": report.phase_correction,
        "f_min": report.f_min,
        "epsilon": report.epsilon,
        "flagged": report.flagged,
        "boundary_warning": report.boundary_warning,
    }
    if report.truncation_delta is not None:
        record["truncation_delta"] = report.truncation_delta
    if report.contrast is not None:
        record["contrast"] = report.contrast
    return record


def _check_gate(cfg: ScenarioConfig):
    if cfg.gate is GateKind.IDENTITY:
        raise ValidationError("needs a gate other than identity")
    if cfg.gate is not GateKind.MONROE_CX and cfg.sideband == "carrier":
        raise ValidationError(f"{cfg.gate.value} needs sideband = red or blue")


def evaluate_config(cfg: ScenarioConfig):
    _check_gate(cfg)
    if cfg.pulse.rabi == 0:
        raise ValidationError("fidelity needs a non-zero Rabi frequency")
    return evaluate_gate(cfg.gate, cfg.eta_z, cfg.omega_z, cfg.pulse, cfg.sideband, cfg.m,
                         cfg.n_max, cfg.restarts, cfg.seed, cfg.check_truncation)


def _sweep_point(args):
    raw, keys, values, index = args
    row = {"index": list(index)}
    row.update({k: val for k, val in zip(keys, values)})
    try:
        point = dict(raw)
        for k, val in zip(keys, values):
            point[k] = repr(float(val))
        cfg = build_scenario(point)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            row.update(report_record(cfg, evaluate_config(cfg)))
    except GatelabError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return _round(row)


def default_jobs() -> int:
    text = os.environ.get("GATELAB_JOBS", "1")
    try:
        jobs = int(text)
    except ValueError:
        raise ValidationError(f"GATELAB_JOBS must be an integer, got {text!r}") from None
    return max(1, jobs)


def run_sweep(raw: dict, axes: list[SweepAxis], jobs: int = 1) -> list[dict]:
    """Evaluate the Cartesian product of the axes; rows come back in axis-index order."""
    if not 1 <= len(axes) <= 2:
        raise ValidationError("a sweep needs one or two axes")
    keys = [a.key for a in axes]
    probe = dict(raw)
    for a in axes:
        probe[a.key] = repr(float(a.values[0]))
    parse_values(probe)  # unknown or unit-less axis keys fail up front
    grids = [range(len(a.values)) for a in axes]
    tasks = []
    for index in np.ndindex(*[len(g) for g in grids]):
        values = [axes[i].values[j] for i, j in enumerate(index)]
        tasks.append((raw, keys, values, tuple(int(j) for j in index)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def gnuplot_script(data_path: str, columns: list[str], title: str) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set xlabel 'time (us)'",
        "set ylabel 'probability'",
    ]
    plots = [f"'{data_path}' using 1:{i + 2} with lines" for i in range(len(columns))]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- commands


def cmd_constants(args):
    rows = [
        ("h", const.h, "J s"),
        ("hbar", const.hbar, "J s"),
        ("e", const.e, "C"),
        ("atomic_mass", const.atomic_mass, "kg"),
        ("epsilon_0", const.epsilon_0, "F/m"),
    ]
    write_output(args.output, csv_text(["name", "value", "unit"], rows))


def cmd_coupling(args):
    if args.eta < 0:
        raise ValidationError("eta must be non-negative")
    cm = coupling_matrix(args.n_max, args.eta).elements
    header = ["n", "m", "re", "im"]
    if args.oracle:
        header += ["oracle_re", "oracle_im", "abs_diff"]
    rows = []
    gauss = math.exp(-args.eta**2 / 2)
    for n in range(args.n_max + 1):
        for m in range(args.n_max + 1):
            c = cm[n, m]
            row = [n, m, c.real, c.imag]
            if args.oracle:
                ref = coupling_oracle(n, m, args.eta, max(60, n + m + 20)) / gauss
                row += [ref.real, ref.imag, abs(ref - c)]
            rows.append(row)
    write_output(args.output, csv_text(header, rows))


def cmd_simulate(args):
    raw, _ = read_config(args.config)
    cfg = build_scenario(raw)
    basis = SystemBasis(cfg.n_max)
    times = np.array(cfg.times)
    if cfg.spectators:
        scen = thermal.Scenario("config", cfg.eta_z, cfg.omega_z, cfg.pulse.rabi,
                                cfg.pulse.detuning, cfg.sideband, cfg.initial, cfg.spectators,
                                cfg.n_max, cfg.pulse.phase)
        probs = thermal.thermal_average_trace(scen, times=times)
    else:
        h = build_hamiltonian(cfg.eta_z, cfg.omega_z, cfg.pulse, basis)
        probs = population_trace(cfg.initial, h, times)
    columns = [f"P_{label}" for label in basis.labels]
    rows = [[t * 1e6, *p] for t, p in zip(times, probs)]
    write_output(args.output, csv_text(["time_us", *columns], rows))
    if args.gnuplot:
        write_output(args.gnuplot, gnuplot_script(args.output or "trace.csv", columns,
                                                  f"{cfg.sideband} {cfg.gate.value}"))


def cmd_fidelity(args):
    raw, _ = read_config(args.config)
    cfg = build_scenario(raw)
    if args.check_truncation:
        cfg = dataclasses.replace(cfg, check_truncation=True)
    record = report_record(cfg, evaluate_config(cfg))
    text = json.dumps(_round(record)) + "\n" if args.json else record_text(record)
    write_output(args.output, text)


def cmd_optimize(args):
    raw, _ = read_config(args.config)
    cfg = build_scenario(raw)
    _check_gate(cfg)
    free = tuple(args.free) if args.free else cfg.free
    objective = args.objective or cfg.objective
    _, report = optimize_pulse(cfg.gate, cfg.eta_z, cfg.pulse.rabi, cfg.omega_z, free,
                               cfg.ranges or None, objective, cfg.sideband, cfg.corrected,
                               cfg.m, cfg.n_max, seed=cfg.seed)
    record = report_record(cfg, report)
    text = json.dumps(_round(record)) + "\n" if args.json else record_text(record)
    write_output(args.output, text)


def cmd_limits(args):
    registry = load_species_registry(args.species_file)
    names = args.species or list(registry)
    unknown = [n for n in names if n not in registry]
    if unknown:
        raise ValidationError(f"unknown species {unknown}")
    chosen = {n: registry[n] for n in names}
    if not 0 < args.epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    if args.spacing_lambdas <= 0:
        raise ValidationError("spacing must be positive")
    blocks = []
    if args.table1 or not args.table3:
        rows = [(n, args.angle_deg, r / const.KHZ)
                for n, r in limits.recoil_table(chosen, math.radians(args.angle_deg))]
        blocks.append(csv_text(["species", "angle_deg", "recoil_khz"], rows))
    if args.table3:
        rows = [(n, s * 1e6, args.epsilon, t * 1e6)
                for n, s, t in limits.gate_time_table(args.epsilon, args.spacing_lambdas, chosen)]
        blocks.append(csv_text(["species", "spacing_um", "epsilon", "gate_time_per_ion_us"], rows))
    write_output(args.output, "\n".join(blocks))


def cmd_fit(args):
    scen = thermal.preset(args.scenario)
    ens = thermal.ThermalEnsemble(scen, mass_cutoff=args.cutoff)
    summary = thermal.summarize(scen, args.cutoff)
    if args.trace:
        times = thermal.default_times(scen)
        probs = ens.trace(times)
        columns = [f"P_{label}" for label in ens.basis.labels]
        rows = [[t * 1e6, *p] for t, p in zip(times, probs)]
        write_output(args.trace, csv_text(["time_us", *columns, "P_excited"],
                                          [r + [sum(r[1 + ens.basis.levels:])] for r in rows]))
        if args.gnuplot:
            write_output(args.gnuplot, gnuplot_script(args.trace, columns, scen.name))
    write_output(args.output, record_text(summary))


def cmd_sweep(args):
    raw, axes = read_config(args.config)
    if not axes:
        raise ValidationError("config has no [sweep] axes")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    rows = run_sweep(raw, axes, jobs)
    write_output(args.output, "".join(json.dumps(r) + "\n" for r in rows))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}\n{self.format_usage().rstrip()}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gatelab", description="Ion-trap gate simulations and speed limits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("-o", "--output", help="output path (default stdout)")
        return p

    add("constants", cmd_constants, "physical constants used internally")

    p = add("coupling", cmd_coupling, "coupling factors C_nm")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--oracle", action="store_true", help="add brute-force check columns")

    p = add("simulate", cmd_simulate, "population trace for a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--gnuplot", help="also write a gnuplot script")

    p = add("fidelity", cmd_fidelity, "worst-case fidelity of a single pulse")
    p.add_argument("--config", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--check-truncation", action="store_true")

    p = add("optimize", cmd_optimize, "tune detuning and/or duration")
    p.add_argument("--config", required=True)
    p.add_argument("--free", nargs="+", choices=["detuning", "duration"])
    p.add_argument("--objective", choices=["epsilon", "contrast"])
    p.add_argument("--json", action="store_true")

    p = add("limits", cmd_limits, "recoil frequencies and gate-time tables")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--spacing-lambdas", type=float, default=10.0)
    p.add_argument("--species", action="append")
    p.add_argument("--species-file")
    p.add_argument("--angle-deg", type=float, default=45.0)
    p.add_argument("--table1", action="store_true")
    p.add_argument("--table3", action="store_true")

    p = add("fit", cmd_fit, "thermally averaged reproduction scenarios")
    p.add_argument("--scenario", required=True, choices=list(thermal.PRESETS))
    p.add_argument("--trace", help="write the averaged trace CSV here")
    p.add_argument("--gnuplot", help="gnuplot script for the trace")
    p.add_argument("--cutoff", type=float, default=thermal.DEFAULT_CUTOFF)

    p = add("sweep", cmd_sweep, "parallel parameter sweep, JSON lines out")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default $GATELAB_JOBS or 1)")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
