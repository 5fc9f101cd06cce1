"""Config parsing, table writing, and the command-line entry point."""

import json
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import pytest

from kickedchain import DEFAULT_TAU_GRID, float_grid
from kickedchain.cli import (
    ConfigError,
    ExperimentConfig,
    main,
    parse_config,
    run,
    serialize_config,
)

DATA = Path(__file__).parent / "data"
CONFIGS = Path(__file__).parent.parent / "configs"


def parsed(text: str) -> ExperimentConfig:
    return parse_config(text)


# -- defaults and round trips -----------------------------------------------------

def test_empty_document_yields_canonical_defaults():
    cfg = parsed("")
    assert (cfg.chain.n_sites, cfg.chain.j1, cfg.chain.j2, cfg.chain.b_field) == (10, 1.0, -1.0, 0.0)
    assert (cfg.drive.e0, cfg.drive.e1, cfg.drive.tau, cfg.drive.n_kicks) == (0.1, 1.0, 2.0, 500)
    assert cfg.drive.u0_convention == "hamiltonian_tau"
    assert cfg.drive.omega2_convention == "re_amplitude"
    assert cfg.impurity is None
    assert cfg.run.mode == "evolve"
    assert cfg.run.states == ("omega0",)
    assert cfg.run.tau_grid == DEFAULT_TAU_GRID
    assert (cfg.run.m_max, cfg.run.seed, cfg.run.workers) == (500, 0, 1)
    assert (cfg.output.path, cfg.output.format) == ("results", "csv")
    assert cfg.output.physical_time_column


@pytest.mark.parametrize("text", [
    "",
    "impurity: {kind: type1, strength: 1.7}\n",
    ("chain: {n_sites: 8, j1: 1.5}\n"
     "drive: {e1: 0.0, tau: 1.5}\n"
     "run: {mode: sweep, axis: e1, grid: [0.0, 0.5, 1.0], states: [omega0, omega2]}\n"
     "output: {path: out/run1, format: json}\n"),
])
def test_serialize_parse_round_trip(text):
    cfg = parsed(text)
    assert parse_config(serialize_config(cfg)) == cfg


def test_impurity_strength_normalizes_to_explicit_ratios():
    cfg = parsed("impurity: {kind: type2, strength: 3.0}\n")
    imp = cfg.impurity
    assert imp.site == 6                      # default N//2 + 1 on ten sites
    assert imp.ratio_nn == 0.5
    assert imp.ratio_nnn_strong == 3.0
    assert imp.ratio_nnn_weak == 0.5
    assert "strength" not in serialize_config(cfg)


def test_grid_mapping_expands_like_float_grid():
    cfg = parsed("run: {mode: sweep, axis: tau, grid: {start: 0.0, stop: 1.0, step: 0.25}}\n")
    assert cfg.run.grid == float_grid(0.0, 1.0, 0.25)
    listed = parsed("run: {mode: sweep, axis: tau, grid: [0.3, 0.7]}\n")
    assert listed.run.grid == (0.3, 0.7)


def test_all_checked_in_recipes_parse():
    paths = sorted(CONFIGS.glob("*.yaml"))
    assert len(paths) >= 30
    for path in paths:
        cfg = parse_config(path.read_text(encoding="utf-8"))
        assert cfg.output.path.startswith("results/")


# -- rejection paths ----------------------------------------------------------------

@pytest.mark.parametrize("text,key_path", [
    ("chains: {}\n", "chains"),
    ("chain: {bogus: 1}\n", "chain.bogus"),
    ("drive: {amplitude: 1}\n", "drive.amplitude"),
    ("run: {modes: evolve}\n", "run.modes"),
    ("output: {fmt: csv}\n", "output.fmt"),
    ("impurity: {kind: type1, strength: 1.5, power: 2}\n", "impurity.power"),
])
def test_unknown_keys_are_rejected_with_their_path(text, key_path):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key_path == key_path


@pytest.mark.parametrize("text,fragment", [
    ("chain: {n_sites: true}\n", "chain.n_sites"),
    ("chain: {n_sites: 1}\n", "chain.n_sites"),
    ("chain: {j1: one}\n", "chain.j1"),
    ("drive: {tau: -1.0}\n", "drive"),
    ("drive: {tau: 0}\n", "drive"),
    ("drive: {n_kicks: 2.5}\n", "drive.n_kicks"),
    ("drive: {u0_convention: eq5}\n", "drive.u0_convention"),
    ("drive: {omega2_convention: modulus}\n", "drive.omega2_convention"),
    ("run: {mode: scan}\n", "run.mode"),
    ("run: {states: []}\n", "run.states"),
    ("run: {states: [omega9]}\n", "run.states[0]"),
    ("run: {states: [omega0, omega0]}\n", "run.states[1]"),
    ("run: {m_max: 0}\n", "run.m_max"),
    ("run: {workers: 0}\n", "run.workers"),
    ("run: {mode: sweep, grid: [1.0]}\n", "run.axis"),
    ("run: {mode: sweep, axis: tau}\n", "run.grid"),
    ("run: {mode: sweep, axis: tau, grid: {start: 1.0, stop: 2.0}}\n", "run.grid"),
    ("run: {mode: sweep, axis: tau, grid: [1.0, true]}\n", "run.grid[1]"),
    ("run: {mode: sweep, axis: tau, grid: []}\n", "run.grid"),
    ("output: {format: parquet}\n", "output.format"),
    ("output: {physical_time_column: yes please}\n", "output"),
    ("impurity: {strength: 1.5}\n", "impurity.kind"),
    ("impurity: {kind: type3, strength: 1.5}\n", "impurity.kind"),
    ("impurity: {kind: type1, strength: 0.9}\n", "impurity"),
    ("impurity: {kind: type1, strength: 1.5, ratio_nn: 1.5}\n", "impurity.strength"),
    ("impurity: {kind: type1, ratio_nn: 1.5}\n", "impurity"),
    ("impurity: {kind: type1, strength: 1.5, site: 1}\n", "impurity.site"),
    ("impurity: {kind: type2, strength: 1.5, site: 10}\n", "impurity.site"),
    ("[1, 2, 3]\n", "document"),
    ("chain: [1, 2]\n", "chain"),
    (":\n  - {", ""),
])
def test_invalid_configs_fail_at_parse_time(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert fragment in str(err.value)


def test_config_error_is_a_value_error_with_key_path():
    err = ConfigError("run.grid", "boom")
    assert isinstance(err, ValueError)
    assert err.key_path == "run.grid"
    assert str(err) == "run.grid: boom"


# -- table output --------------------------------------------------------------------

EVOLVE_TEXT = (DATA / "golden_evolve.yaml").read_text(encoding="utf-8")


def evolve_config(tmp_path: Path) -> ExperimentConfig:
    cfg = parse_config(EVOLVE_TEXT)
    return replace(cfg, output=replace(cfg.output, path=str(tmp_path / "evolve")))


def test_evolve_writes_csv_and_json_mirror(tmp_path):
    paths = run(evolve_config(tmp_path))
    assert [p.suffix for p in paths] == [".csv", ".json"]
    lines = paths[0].read_text(encoding="utf-8").splitlines()
    assert lines[0] == ("kick_index,time,physical_time_ps,"
                        "fidelity_omega0,fidelity_omega1,classical_threshold")
    assert len(lines) == 22                     # header + kicks 0..20
    first = lines[1].split(",")
    assert first[:3] == ["0", "0", "0"]
    assert first[3] == "0.5" and first[4] == "0"
    assert first[5] == "0.66666666666666663"    # 2/3 in %.17g
    records = json.loads(paths[1].read_text(encoding="utf-8"))
    assert len(records) == 21
    assert records[0]["fidelity_omega0"] == 0.5
    assert records[3]["kick_index"] == 3


def test_evolve_matches_golden_table(tmp_path):
    # regenerate with: python -m kickedchain evolve --config tests/data/golden_evolve.yaml
    #                  --out tests/data/golden_evolve
    golden = (DATA / "golden_evolve.csv").read_text(encoding="utf-8").splitlines()
    got = run(evolve_config(tmp_path))[0].read_text(encoding="utf-8").splitlines()
    assert got[0] == golden[0]
    assert len(got) == len(golden)
    for got_line, golden_line in zip(got[1:], golden[1:]):
        for a, b in zip(got_line.split(","), golden_line.split(",")):
            assert abs(float(a) - float(b)) <= 1e-12 * max(1.0, abs(float(b)))


def test_rerun_is_byte_identical(tmp_path):
    first = run(replace(evolve_config(tmp_path),
                        output=replace(parse_config(EVOLVE_TEXT).output,
                                       path=str(tmp_path / "a"))))
    second = run(replace(evolve_config(tmp_path),
                         output=replace(parse_config(EVOLVE_TEXT).output,
                                        path=str(tmp_path / "b"))))
    assert first[0].read_bytes() == second[0].read_bytes()
    assert first[1].read_bytes() == second[1].read_bytes()


def test_physical_time_column_can_be_dropped(tmp_path):
    cfg = parse_config(EVOLVE_TEXT + "output:\n  physical_time_column: false\n")
    cfg = replace(cfg, output=replace(cfg.output, path=str(tmp_path / "plain")))
    header = run(cfg)[0].read_text(encoding="utf-8").splitlines()[0]
    assert "physical_time_ps" not in header


def test_output_suffix_is_normalized(tmp_path):
    cfg = parse_config("chain: {n_sites: 4}\ndrive: {n_kicks: 3}\n")
    cfg = replace(cfg, output=replace(cfg.output, path=str(tmp_path / "table.csv")))
    paths = run(cfg)
    assert paths[0].name == "table.csv" and paths[1].name == "table.json"


def test_json_format_puts_json_first(tmp_path):
    cfg = parse_config("chain: {n_sites: 4}\ndrive: {n_kicks: 3}\noutput: {format: json}\n")
    cfg = replace(cfg, output=replace(cfg.output, path=str(tmp_path / "t")))
    paths = run(cfg)
    assert paths[0].suffix == ".json" and paths[1].suffix == ".csv"


SWEEP_TEXT = (
    "chain: {n_sites: 6}\n"
    "drive: {e1: 1.0}\n"
    "run:\n"
    "  mode: sweep\n"
    "  axis: tau\n"
    "  grid: [1.0, 2.0, 3.0]\n"
    "  states: [omega0, omega1]\n"
    "  m_max: 30\n"
)


def test_sweep_table_shape_and_ordering(tmp_path):
    cfg = parse_config(SWEEP_TEXT)
    cfg = replace(cfg, output=replace(cfg.output, path=str(tmp_path / "sweep")))
    paths = run(cfg)
    lines = paths[0].read_text(encoding="utf-8").splitlines()
    assert lines[0] == "grid_value,state,max_fidelity,argmax_tau,argmax_kicks,out_of_range_flag"
    assert len(lines) == 1 + 3 * 2
    cells = [line.split(",") for line in lines[1:]]
    assert [c[0] for c in cells] == ["1", "1", "2", "2", "3", "3"]
    assert [c[1] for c in cells] == ["omega0", "omega1"] * 3
    assert all(c[5] in ("0", "1") for c in cells)


def test_sweep_workers_do_not_change_bytes(tmp_path):
    base = parse_config(SWEEP_TEXT)
    one = replace(base, output=replace(base.output, path=str(tmp_path / "w1")))
    three = replace(base, output=replace(base.output, path=str(tmp_path / "w3")))
    p1 = run(one, workers=1)
    p3 = run(three, workers=3)
    assert p1[0].read_bytes() == p3[0].read_bytes()


def test_periodogram_mode_emits_spectrum_rows(tmp_path):
    cfg = parse_config(
        "chain: {n_sites: 5}\n"
        "drive: {tau: 2.0, n_kicks: 63}\n"
        "run: {mode: periodogram, states: [omega0]}\n")
    cfg = replace(cfg, output=replace(cfg.output, path=str(tmp_path / "spec")))
    lines = run(cfg)[0].read_text(encoding="utf-8").splitlines()
    assert lines[0] == "state,frequency,magnitude,is_dominant"
    assert len(lines) == 1 + 64                 # one row per frequency bin
    dominant_rows = [l for l in lines[1:] if l.endswith(",1")]
    assert len(dominant_rows) == 1


# -- entry point -----------------------------------------------------------------------

def test_main_evolve_with_out_override(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text(EVOLVE_TEXT, encoding="utf-8")
    code = main(["evolve", "--config", str(cfg_file), "--out", str(tmp_path / "x")])
    assert code == 0
    out = capsys.readouterr().out
    assert "x.csv" in out and "x.json" in out
    assert (tmp_path / "x.csv").exists()


def test_main_subcommand_overrides_config_mode(tmp_path):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text(SWEEP_TEXT.replace("mode: sweep", "mode: evolve"), encoding="utf-8")
    code = main(["sweep", "--config", str(cfg_file), "--out", str(tmp_path / "s")])
    assert code == 0
    header = (tmp_path / "s.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("grid_value,")


def test_main_sweep_without_axis_fails_cleanly(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("chain: {n_sites: 5}\n", encoding="utf-8")
    code = main(["sweep", "--config", str(cfg_file), "--out", str(tmp_path / "s")])
    assert code == 1
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "ConfigError"
    assert record["key_path"] == "run.axis"


def test_main_reports_parse_errors_as_json(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("chain: {bogus: 1}\n", encoding="utf-8")
    code = main(["evolve", "--config", str(cfg_file)])
    assert code == 1
    record = json.loads(capsys.readouterr().err)
    assert record == {
        "error": "ConfigError",
        "message": "chain.bogus: unknown key",
        "key_path": "chain.bogus",
    }


def test_main_rejects_bad_worker_override(tmp_path, capsys):
    code = main(["evolve", "--workers", "0", "--out", str(tmp_path / "x")])
    assert code == 1
    record = json.loads(capsys.readouterr().err)
    assert record["key_path"] == "run.workers"


def test_main_validate_prints_normalized_config(capsys):
    code = main(["validate"])
    assert code == 0
    text = capsys.readouterr().out
    assert parse_config(text) == parse_config("")
    assert text.startswith("chain:")


def test_module_entry_point_wiring(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kickedchain", "validate"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("chain:")
