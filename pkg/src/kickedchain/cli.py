"""Config-driven command line: evolutions, sweeps, spectra, and validation.

Experiments are described by a YAML document with five blocks (``chain``,
``drive``, ``impurity``, ``run``, ``output``), all optional except that
sweep mode needs an axis and a grid.  Missing keys fall back to the
canonical ten-site point: N=10, J1=1, J2=-1, E0=0.1, E1=1, tau=2.
Unknown keys anywhere are rejected with the offending key path.

Every run writes two files with the same records, a CSV table (the
plot-ready artifact) and a JSON mirror; reruns of the same config are
byte-identical.  Failures print a one-line machine-readable JSON error
record to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .fidelity import KNOWN_STATES, OMEGA2_CONVENTIONS, classical_threshold
from .model import (
    ChainParams,
    IMPURITY_KINDS,
    ImpuritySpec,
    apply_impurity,
    default_impurity_site,
    impurity_from_strength,
    uniform_profile,
)
from .propagator import U0_CONVENTIONS, KickSchedule
from .sweep import (
    DEFAULT_TAU_GRID,
    SweepPlan,
    fidelity_series,
    float_grid,
    periodogram,
    sweep_axis,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ChainBlock",
    "DriveBlock",
    "ImpurityBlock",
    "RunBlock",
    "OutputBlock",
    "parse_config",
    "serialize_config",
    "run",
    "main",
]

MODES = ("evolve", "sweep", "periodogram")
OUTPUT_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Configuration problem, tagged with the key path that caused it."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


# ---------------------------------------------------------------------------
# Config blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainBlock:
    n_sites: int = 10
    j1: float = 1.0
    j2: float = -1.0
    b_field: float = 0.0


@dataclass(frozen=True)
class DriveBlock:
    e0: float = 0.1
    e1: float = 1.0
    tau: float = 2.0
    n_kicks: int = 500
    u0_convention: str = "hamiltonian_tau"
    omega2_convention: str = "re_amplitude"


@dataclass(frozen=True)
class ImpurityBlock:
    """Normalized impurity description: explicit ratios, site resolved."""

    kind: str
    site: int
    ratio_nn: float
    ratio_nnn_strong: float
    ratio_nnn_weak: float

    def to_spec(self) -> ImpuritySpec:
        return ImpuritySpec(self.kind, self.site, self.ratio_nn,
                            self.ratio_nnn_strong, self.ratio_nnn_weak)


@dataclass(frozen=True)
class RunBlock:
    mode: str = "evolve"
    states: tuple[str, ...] = ("omega0",)
    axis: str | None = None
    grid: tuple[float, ...] | None = None
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID
    m_max: int = 500
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class OutputBlock:
    path: str = "results"
    format: str = "csv"
    physical_time_column: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    chain: ChainBlock = ChainBlock()
    drive: DriveBlock = DriveBlock()
    impurity: ImpurityBlock | None = None
    run: RunBlock = RunBlock()
    output: OutputBlock = OutputBlock()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _expect_mapping(obj, path: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected a mapping, got {type(obj).__name__}")
    return dict(obj)


def _reject_unknown(block: dict, path: str):
    if block:
        key = sorted(str(k) for k in block)[0]
        raise ConfigError(f"{path}.{key}" if path else str(key), "unknown key")


def _pop_float(block: dict, key: str, path: str, default: float) -> float:
    if key not in block:
        return default
    value = block.pop(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _pop_int(block: dict, key: str, path: str, default: int | None) -> int | None:
    if key not in block:
        return default
    value = block.pop(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {value!r}")
    return value


def _pop_bool(block: dict, key: str, path: str, default: bool) -> bool:
    if key not in block:
        return default
    value = block.pop(key)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", f"expected a boolean, got {value!r}")
    return value


def _pop_choice(block: dict, key: str, path: str, choices, default: str | None) -> str | None:
    if key not in block:
        return default
    value = block.pop(key)
    if value not in choices:
        raise ConfigError(f"{path}.{key}", f"expected one of {choices}, got {value!r}")
    return value


def _pop_grid(block: dict, key: str, path: str, default):
    """A grid is either an explicit list of numbers or {start, stop, step}."""
    if key not in block:
        return default
    value = block.pop(key)
    where = f"{path}.{key}"
    if isinstance(value, dict):
        spec = dict(value)
        start = _pop_float(spec, "start", where, None)
        stop = _pop_float(spec, "stop", where, None)
        step = _pop_float(spec, "step", where, None)
        _reject_unknown(spec, where)
        if None in (start, stop, step):
            raise ConfigError(where, "grid mapping needs start, stop and step")
        try:
            return float_grid(start, stop, step)
        except ValueError as exc:
            raise ConfigError(where, str(exc)) from None
    if isinstance(value, list):
        out = []
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{where}[{i}]", f"expected a number, got {v!r}")
            out.append(float(v))
        if not out:
            raise ConfigError(where, "grid must be nonempty")
        return tuple(out)
    raise ConfigError(where, "expected a list of numbers or a start/stop/step mapping")


def _pop_states(block: dict, key: str, path: str, default) -> tuple[str, ...]:
    if key not in block:
        return default
    value = block.pop(key)
    where = f"{path}.{key}"
    if not isinstance(value, list) or not value:
        raise ConfigError(where, "expected a nonempty list of state names")
    states = []
    for i, s in enumerate(value):
        if s not in KNOWN_STATES:
            raise ConfigError(f"{where}[{i}]", f"expected one of {KNOWN_STATES}, got {s!r}")
        if s in states:
            raise ConfigError(f"{where}[{i}]", f"duplicate state {s!r}")
        states.append(s)
    return tuple(states)


def _parse_impurity(block: dict, chain: ChainBlock) -> ImpurityBlock | None:
    if not block:
        return None
    path = "impurity"
    kind = _pop_choice(block, "kind", path, IMPURITY_KINDS, None)
    if kind is None:
        raise ConfigError(f"{path}.kind", "required when an impurity block is present")
    site = _pop_int(block, "site", path, None)
    if site is None:
        site = default_impurity_site(chain.n_sites)
    strength = _pop_float(block, "strength", path, None) if "strength" in block else None
    ratio_nn = _pop_float(block, "ratio_nn", path, None) if "ratio_nn" in block else None
    strong = _pop_float(block, "ratio_nnn_strong", path, None) if "ratio_nnn_strong" in block else None
    weak = _pop_float(block, "ratio_nnn_weak", path, None) if "ratio_nnn_weak" in block else None
    _reject_unknown(block, path)

    explicit = [r is not None for r in (ratio_nn, strong, weak)]
    if strength is not None:
        if any(explicit):
            raise ConfigError(f"{path}.strength", "give either strength or explicit ratios, not both")
        try:
            spec = impurity_from_strength(kind, site, strength)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    else:
        if not all(explicit):
            raise ConfigError(path, "need either strength or all of ratio_nn, "
                                    "ratio_nnn_strong, ratio_nnn_weak")
        try:
            spec = ImpuritySpec(kind, site, ratio_nn, strong, weak)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None

    # re-validate against the chain geometry so bad sites fail at parse time
    try:
        apply_impurity(uniform_profile(chain.n_sites, chain.j1, chain.j2), spec)
    except ValueError as exc:
        raise ConfigError(f"{path}.site", str(exc)) from None
    return ImpurityBlock(spec.kind, spec.site, spec.ratio_nn,
                         spec.ratio_nnn_strong, spec.ratio_nnn_weak)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment description.

    Empty or missing blocks take the canonical defaults; every upstream
    numeric constraint is re-checked here so invalid configs fail before
    any computation starts.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "document"
        raise ConfigError("", f"YAML parse error at {where}: {exc}") from None
    top = _expect_mapping(doc, "document")

    chain_raw = _expect_mapping(top.pop("chain", None), "chain")
    drive_raw = _expect_mapping(top.pop("drive", None), "drive")
    imp_raw = _expect_mapping(top.pop("impurity", None), "impurity")
    run_raw = _expect_mapping(top.pop("run", None), "run")
    out_raw = _expect_mapping(top.pop("output", None), "output")
    _reject_unknown(top, "")

    chain = ChainBlock(
        n_sites=_pop_int(chain_raw, "n_sites", "chain", 10),
        j1=_pop_float(chain_raw, "j1", "chain", 1.0),
        j2=_pop_float(chain_raw, "j2", "chain", -1.0),
        b_field=_pop_float(chain_raw, "b_field", "chain", 0.0),
    )
    _reject_unknown(chain_raw, "chain")
    if chain.n_sites < 2:
        raise ConfigError("chain.n_sites", f"need at least 2 sites, got {chain.n_sites}")

    drive = DriveBlock(
        e0=_pop_float(drive_raw, "e0", "drive", 0.1),
        e1=_pop_float(drive_raw, "e1", "drive", 1.0),
        tau=_pop_float(drive_raw, "tau", "drive", 2.0),
        n_kicks=_pop_int(drive_raw, "n_kicks", "drive", 500),
        u0_convention=_pop_choice(drive_raw, "u0_convention", "drive",
                                  U0_CONVENTIONS, "hamiltonian_tau"),
        omega2_convention=_pop_choice(drive_raw, "omega2_convention", "drive",
                                      OMEGA2_CONVENTIONS, "re_amplitude"),
    )
    _reject_unknown(drive_raw, "drive")
    try:
        KickSchedule(tau=drive.tau, e0=drive.e0, e1=drive.e1, n_kicks=drive.n_kicks)
    except ValueError as exc:
        raise ConfigError("drive", str(exc)) from None

    impurity = _parse_impurity(imp_raw, chain)

    run_block = RunBlock(
        mode=_pop_choice(run_raw, "mode", "run", MODES, "evolve"),
        states=_pop_states(run_raw, "states", "run", ("omega0",)),
        axis=_pop_choice(run_raw, "axis", "run",
                         ("tau", "e1", "j2_over_j1", "impurity_ratio", "kick_count"), None),
        grid=_pop_grid(run_raw, "grid", "run", None),
        tau_grid=_pop_grid(run_raw, "tau_grid", "run", DEFAULT_TAU_GRID),
        m_max=_pop_int(run_raw, "m_max", "run", 500),
        seed=_pop_int(run_raw, "seed", "run", 0),
        workers=_pop_int(run_raw, "workers", "run", 1),
    )
    _reject_unknown(run_raw, "run")
    if run_block.m_max < 1:
        raise ConfigError("run.m_max", f"must be >= 1, got {run_block.m_max}")
    if run_block.workers < 1:
        raise ConfigError("run.workers", f"must be >= 1, got {run_block.workers}")
    if run_block.mode == "sweep":
        if run_block.axis is None:
            raise ConfigError("run.axis", "required for sweep mode")
        if run_block.grid is None:
            raise ConfigError("run.grid", "required for sweep mode")

    output = OutputBlock(
        path=str(out_raw.pop("path", "results")),
        format=_pop_choice(out_raw, "format", "output", OUTPUT_FORMATS, "csv"),
        physical_time_column=_pop_bool(out_raw, "physical_time_column", "output", True),
    )
    _reject_unknown(out_raw, "output")

    return ExperimentConfig(chain=chain, drive=drive, impurity=impurity,
                            run=run_block, output=output)


def serialize_config(config: ExperimentConfig) -> str:
    """Normalized YAML for a config; parse_config(serialize_config(c)) == c."""
    doc: dict = {
        "chain": {
            "n_sites": config.chain.n_sites,
            "j1": config.chain.j1,
            "j2": config.chain.j2,
            "b_field": config.chain.b_field,
        },
        "drive": {
            "e0": config.drive.e0,
            "e1": config.drive.e1,
            "tau": config.drive.tau,
            "n_kicks": config.drive.n_kicks,
            "u0_convention": config.drive.u0_convention,
            "omega2_convention": config.drive.omega2_convention,
        },
    }
    if config.impurity is not None:
        doc["impurity"] = {
            "kind": config.impurity.kind,
            "site": config.impurity.site,
            "ratio_nn": config.impurity.ratio_nn,
            "ratio_nnn_strong": config.impurity.ratio_nnn_strong,
            "ratio_nnn_weak": config.impurity.ratio_nnn_weak,
        }
    run_doc = {
        "mode": config.run.mode,
        "states": list(config.run.states),
    }
    if config.run.axis is not None:
        run_doc["axis"] = config.run.axis
    if config.run.grid is not None:
        run_doc["grid"] = list(config.run.grid)
    run_doc.update({
        "tau_grid": list(config.run.tau_grid),
        "m_max": config.run.m_max,
        "seed": config.run.seed,
        "workers": config.run.workers,
    })
    doc["run"] = run_doc
    doc["output"] = {
        "path": config.output.path,
        "format": config.output.format,
        "physical_time_column": config.output.physical_time_column,
    }
    return yaml.safe_dump(doc, sort_keys=False)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _template_params(config: ExperimentConfig, with_impurity: bool) -> ChainParams:
    profile = uniform_profile(config.chain.n_sites, config.chain.j1, config.chain.j2)
    if with_impurity and config.impurity is not None:
        profile = apply_impurity(profile, config.impurity.to_spec())
    # dm_field carries the static background so the kick-free paths see it too
    return ChainParams(profile, dm_field=config.drive.e0, b_field=config.chain.b_field)


def _evolve_tables(config: ExperimentConfig):
    params = _template_params(config, with_impurity=True)
    drive = config.drive
    schedule = KickSchedule(tau=drive.tau, e0=drive.e0, e1=drive.e1, n_kicks=drive.n_kicks)
    states = config.run.states
    series = {
        s: fidelity_series(params, schedule, s, drive.n_kicks,
                           u0_convention=drive.u0_convention,
                           omega2_convention=drive.omega2_convention)
        for s in states
    }
    with_ps = config.output.physical_time_column
    columns = ["kick_index", "time"]
    if with_ps:
        columns.append("physical_time_ps")   # tau = 1 corresponds to 0.5 ps
    columns += [f"fidelity_{s}" for s in states]
    columns.append("classical_threshold")
    threshold = classical_threshold()
    rows = []
    for m in range(drive.n_kicks + 1):
        t = m * drive.tau
        row: list = [m, float(t)]
        if with_ps:
            row.append(0.5 * t)
        row += [float(series[s][m]) for s in states]
        row.append(threshold)
        rows.append(row)
    return columns, rows


def _sweep_tables(config: ExperimentConfig, workers: int):
    run_block = config.run
    if run_block.axis is None:
        raise ConfigError("run.axis", "required for sweep mode")
    if run_block.grid is None:
        raise ConfigError("run.grid", "required for sweep mode")
    plan = SweepPlan(
        params=_template_params(config, with_impurity=False),
        axis=run_block.axis,
        grid=run_block.grid,
        states=run_block.states,
        impurity=config.impurity.to_spec() if config.impurity is not None else None,
        tau_grid=run_block.tau_grid,
        m_max=run_block.m_max,
        e0=config.drive.e0,
        e1=config.drive.e1,
        u0_convention=config.drive.u0_convention,
        omega2_convention=config.drive.omega2_convention,
    )
    result = sweep_axis(plan, workers=workers)
    columns = ["grid_value", "state", "max_fidelity", "argmax_tau",
               "argmax_kicks", "out_of_range_flag"]
    rows = [
        [row.grid_value, row.state, row.max_fidelity, row.argmax_tau,
         row.argmax_kicks, row.out_of_range]
        for row in result.rows
    ]
    return columns, rows


def _periodogram_tables(config: ExperimentConfig):
    params = _template_params(config, with_impurity=True)
    drive = config.drive
    schedule = KickSchedule(tau=drive.tau, e0=drive.e0, e1=drive.e1, n_kicks=drive.n_kicks)
    columns = ["state", "frequency", "magnitude", "is_dominant"]
    rows = []
    for state in config.run.states:
        series = fidelity_series(params, schedule, state, drive.n_kicks,
                                 u0_convention=drive.u0_convention,
                                 omega2_convention=drive.omega2_convention)
        frequencies, magnitudes, dominant = periodogram(series)
        for f, mag in zip(frequencies, magnitudes):
            is_dom = dominant is not None and float(f) == dominant
            rows.append([state, float(f), float(mag), is_dom])
    return columns, rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _output_paths(config: ExperimentConfig) -> tuple[Path, Path]:
    raw = Path(config.output.path)
    if raw.suffix in (".csv", ".json"):
        base = raw.with_suffix("")
    else:
        base = raw
    csv_path = base.parent / (base.name + ".csv")
    json_path = base.parent / (base.name + ".json")
    if config.output.format == "json":
        return json_path, csv_path
    return csv_path, json_path


def write_tables(config: ExperimentConfig, columns: list[str], rows: list[list]) -> list[Path]:
    """Emit the CSV table and its JSON mirror; returns paths, primary first."""
    primary, mirror = _output_paths(config)
    csv_path = primary if primary.suffix == ".csv" else mirror
    json_path = primary if primary.suffix == ".json" else mirror
    lines = [",".join(columns)]
    lines += [",".join(_format_cell(v) for v in row) for row in rows]
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    records = [dict(zip(columns, row)) for row in rows]
    json_path.write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    return [primary, mirror]


def run(config: ExperimentConfig, workers: int | None = None) -> list[Path]:
    """Execute one experiment; returns the written files, primary format first."""
    mode = config.run.mode
    if mode == "evolve":
        columns, rows = _evolve_tables(config)
    elif mode == "sweep":
        columns, rows = _sweep_tables(config, workers or config.run.workers)
    elif mode == "periodogram":
        columns, rows = _periodogram_tables(config)
    else:
        raise ConfigError("run.mode", f"expected one of {MODES}, got {mode!r}")
    return write_tables(config, columns, rows)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickedchain",
        description="Quantum state transfer through a periodically kicked spin chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_text = {
        "evolve": "fidelity after each kick at one parameter point",
        "sweep": "maximum fidelity along a parameter grid",
        "periodogram": "discrete Fourier spectrum of the fidelity series",
        "validate": "parse a config and print its normalized form",
    }
    for name, text in help_text.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", type=Path, default=None,
                        help="YAML experiment file (defaults apply when omitted)")
        sp.add_argument("--out", default=None, help="override output.path")
        sp.add_argument("--workers", type=int, default=None, help="override run.workers")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        config = parse_config(text)
        if args.command in MODES and config.run.mode != args.command:
            config = replace(config, run=replace(config.run, mode=args.command))
            if config.run.mode == "sweep":
                if config.run.axis is None:
                    raise ConfigError("run.axis", "required for sweep mode")
                if config.run.grid is None:
                    raise ConfigError("run.grid", "required for sweep mode")
        if args.out is not None:
            config = replace(config, output=replace(config.output, path=args.out))
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("run.workers", f"must be >= 1, got {args.workers}")
            config = replace(config, run=replace(config.run, workers=args.workers))
        if args.seed is not None:
            config = replace(config, run=replace(config.run, seed=args.seed))
        if args.command == "validate":
            sys.stdout.write(serialize_config(config))
            return 0
        for path in run(config):
            print(f"wrote {path}")
        return 0
    except Exception as exc:   # all failures become one machine-readable record
        record = {"error": type(exc).__name__, "message": str(exc)}
        key_path = getattr(exc, "key_path", None)
        if key_path:
            record["key_path"] = key_path
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
