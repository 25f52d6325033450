import math
import os

import pytest

from dplt import __version__
from dplt.cli import (
    EXIT_CONFIG,
    EXIT_COVERAGE,
    EXIT_IO,
    EXIT_OK,
    emit_csv,
    format_cell,
    main,
    parse_config,
    read_config_text,
    read_csv,
)
from dplt.config import ScenarioConfig
from dplt.engine import RECORD_FIELDS, SummaryMetrics, run_scenario
from dplt.errors import ConfigError, IoError, MissingFile

GOLDEN_HEADER = ("tick,time_ms,true_x,true_y,est_x,est_y,error,mode_a,mode_c,ref_a,ref_c,"
                 "zone_x,zone_y,zone_r,beamwidth,zone_updated,coverage_gap,ref_switched,fix")


def test_empty_config_gives_defaults(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("# nothing\n\n")
    cfg = parse_config(str(path))
    assert cfg == ScenarioConfig()
    assert cfg.node_count == 60
    assert (cfg.area_width_m, cfg.area_height_m) == (500, 500)
    assert cfg.channel.carrier_hz == 2.54e9
    assert cfg.antenna.radiation_efficiency == 0.82
    assert cfg.antenna.tx_power_dbm == 40
    assert cfg.antenna.max_range_m == 300


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "a.cfg"
    path.write_text("seed = 7\nmobility.p_turn = 0.1\n")
    cfg = parse_config(str(path), {"seed": 42})
    assert cfg.seed == 42 and cfg.mobility.p_turn == 0.1


def test_unknown_key_names_key_and_line():
    with pytest.raises(ConfigError) as exc:
        read_config_text("seed = 3\nspeeed = 4\n")
    assert "speeed" in str(exc.value) and "2" in str(exc.value)


def test_bad_value_and_syntax():
    with pytest.raises(ConfigError):
        read_config_text("node_count = many\n")
    with pytest.raises(ConfigError):
        read_config_text("just a line\n")


def test_missing_config():
    with pytest.raises(MissingFile):
        parse_config("/nonexistent/dir/cfg.txt")


def test_format_cell():
    assert format_cell(True) == "1" and format_cell(False) == "0"
    assert format_cell(math.nan) == "nan"
    assert format_cell(1 / 3) == "0.333333333"
    assert format_cell(7) == "7"


def test_empty_records_header_only(tmp_path):
    path = tmp_path / "r.csv"
    emit_csv([], str(path), RECORD_FIELDS)
    assert path.read_text() == GOLDEN_HEADER + "\n"


def test_emit_csv_unwritable(tmp_path):
    with pytest.raises(IoError):
        emit_csv([], str(tmp_path / "missing" / "r.csv"), RECORD_FIELDS)


def test_summary_header_matches_fields(tmp_path):
    s = SummaryMetrics(1.0, 0.5, 3, math.nan, 0.0, 1, 10)
    path = tmp_path / "s.csv"
    emit_csv([s], str(path))
    header, body = path.read_text().splitlines()
    assert header == ("mean_error,accuracy,zone_update_count,mean_broadcast_time,"
                      "coverage_gap_fraction,ref_switch_count,ticks")
    assert body == "1,0.5,3,nan,0,1,10"


def test_csv_round_trip(tmp_path):
    records, _ = run_scenario(ScenarioConfig(duration_s=3.0))
    path = tmp_path / "r.csv"
    emit_csv(records, str(path), RECORD_FIELDS)
    rows = read_csv(str(path))
    assert len(rows) == len(records)
    for rec, row in zip(records, rows):
        for name in RECORD_FIELDS:
            v = getattr(rec, name)
            if isinstance(v, bool):
                assert row[name] == ("1" if v else "0")
            elif isinstance(v, float):
                if math.isnan(v):
                    assert row[name] == "nan"
                else:
                    # nine significant digits bound the relative error by 5e-9
                    assert float(row[name]) == pytest.approx(v, rel=1e-8, abs=1e-300)
            else:
                assert row[name] == str(v)


def _run(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["run", "--out", str(out), "--duration-s", "2", *extra])
    return code, out


def test_run_outputs_and_manifest_reproduces(tmp_path):
    code, out = _run(tmp_path, "a", "--seed", "5")
    assert code == EXIT_OK
    for f in ("records.csv", "summary.csv", "manifest.txt"):
        assert (out / f).exists()
    manifest = (out / "manifest.txt").read_text()
    assert f"# artifact_version = {__version__}" in manifest
    assert (out / "records.csv").read_text().splitlines()[0] == GOLDEN_HEADER

    code = main(["run", "--config", str(out / "manifest.txt"), "--out", str(tmp_path / "b")])
    assert code == EXIT_OK
    assert (out / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_same_seed_byte_identical(tmp_path):
    _run(tmp_path, "a", "--seed", "9")
    _run(tmp_path, "b", "--seed", "9")
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    code, _ = _run(tmp_path, "c", "--set", "speeed=3")
    assert code == EXIT_CONFIG
    assert "speeed" in capsys.readouterr().err
    code, _ = _run(tmp_path, "d", "--config", str(tmp_path / "nope.cfg"))
    assert code == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--out", str(blocker / "sub"), "--duration-s", "1"]) == EXIT_IO
    code, _ = _run(tmp_path, "e", "--set", "node_count=2", "--set", "antenna.max_range_m=5")
    assert code == EXIT_COVERAGE
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_sweep_commands_write_tables(tmp_path):
    out = str(tmp_path)
    common = ["--out", out, "--duration-s", "1"]
    assert main(["sweep-speed", *common, "--speeds", "10,20", "--seeds", "1"]) == EXIT_OK
    assert main(["sweep-beamwidth", *common, "--beamwidths-deg", "10,20", "--seeds", "1"]) == EXIT_OK
    assert main(["broadcast-time", *common, "--p-turns", "0", "--beamwidths-deg", "15,omni",
                 "--set", "broadcast.trials=5"]) == EXIT_OK
    assert main(["fec-accuracy", *common, "--ebn0-db", "10", "--fec", "on", "--seeds", "1"]) == EXIT_OK
    assert main(["compare-estimators", *common, "--seeds", "1"]) == EXIT_OK
    for f in ("speed_sweep.csv", "beamwidth_sweep.csv", "broadcast_time.csv",
              "fec_accuracy.csv", "compare_estimators.csv"):
        assert os.path.getsize(os.path.join(out, f)) > 0
    speed = read_csv(os.path.join(out, "speed_sweep.csv"))
    assert [r["speed"] for r in speed] == ["10", "20"]
    assert main(["sweep-beamwidth", *common, "--beamwidths-deg", "omni"]) != EXIT_OK
    assert main(["sweep-speed", *common, "--seeds", "0"]) == EXIT_CONFIG
