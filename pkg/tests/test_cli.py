import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hyperloop_ici.cli import Command, format_number, main, parse_args
from hyperloop_ici.link_model import throughput
from hyperloop_ici.scenarios import PresetId, preset


def run_cli(capsysbinary, *argv):
    code = main(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def read_csv(data: bytes):
    return list(csv.reader(io.StringIO(data.decode())))


def test_parse_analyze():
    cfg = parse_args(["analyze", "--preset", "fig2-n64", "--snr", "50dB"])
    assert cfg.command is Command.ANALYZE
    assert cfg.preset is PresetId.FIG2_N64
    assert cfg.snr == pytest.approx(1e5, rel=1e-15)


def test_parse_simulate():
    cfg = parse_args(["simulate", "--preset", "fig2-n16", "--trials", "10000", "--seed", "7", "--mode", "taylor"])
    assert (cfg.trials, cfg.seed, cfg.mode.value) == (10000, 7, "taylor")


def test_parse_units():
    cfg = parse_args(
        ["analyze", "--n", "8", "--symbol-interval", "1us", "--carrier-freq", "5GHz", "--speed", "1200km/h"]
    )
    assert cfg.explicit == {"n": 8, "symbol_interval": 1e-6, "carrier_freq": 5e9}
    assert cfg.speed == 1000 / 3


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--preset", "fig2-n64", "--n", "128"],
        ["analyze", "--preset", "fig2-n64", "--bogus"],
        ["analyze", "--n", "8"],
        ["analyze", "--preset", "nope"],
        ["simulate", "--preset", "fig2-n16", "--trials", "0"],
        ["analyze", "--preset", "fig2-n64", "--snr", "50 parsecs"],
        ["feasibility", "--rate", "48kbps", "--tube", "--open-site"],
        ["feasibility"],
        ["sweep", "--preset", "fig2-n64", "--variable", "snr_db"],
        [],
    ],
)
def test_usage_errors(argv, capsysbinary):
    code, out, err = run_cli(capsysbinary, *argv)
    assert code == 2
    assert out == b""
    assert err


def test_usage_error_exit_status_from_process():
    proc = subprocess.run(
        [sys.executable, "-m", "hyperloop_ici", "analyze", "--preset", "fig2-n64", "--n", "128"],
        capture_output=True,
    )
    assert proc.returncode == 2
    assert b"--preset" in proc.stderr


def test_analyze_csv(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "analyze", "--preset", "fig2-n64", "--snr", "50dB")
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["subcarrier", "desired_w", "ici_w", "noise_w", "sinr_db", "bps"]
    assert len(rows) == 65
    total = sum(float(r[5]) for r in rows[1:])
    assert total == pytest.approx(2612580.73, rel=1e-8)


def test_analyze_single_subcarrier(capsysbinary):
    code, out, _ = run_cli(
        capsysbinary, "analyze", "--n", "1", "--symbol-interval", "1us", "--carrier-freq", "5GHz", "--snr", "10dB"
    )
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 2
    assert float(rows[1][2]) == 0.0
    assert float(rows[1][5]) == pytest.approx(1e6 * math.log2(11), rel=1e-9)


def test_numbers_reparse_within_9_digits(capsysbinary):
    _, out, _ = run_cli(capsysbinary, "analyze", "--preset", "fig2-n256")
    p = preset(PresetId.FIG2_N256)
    res = throughput(p.cfg, p.mob, p.fading)
    rows = read_csv(out)[1:]
    for row, m in zip(rows, res.per_subcarrier):
        assert float(row[2]) == pytest.approx(m.ici_power, rel=5e-9)
        assert format_number(float(row[2])) == row[2]


def test_format_number():
    x = 2612580.7321234
    assert format_number(x) == "2612580.73"
    assert format_number(math.inf) == "inf"
    assert format_number(True) == "true"
    assert format_number(np.int64(3)) == "3"
    for v in np.random.default_rng(0).lognormal(0, 20, 200):
        assert abs(float(format_number(v)) - v) <= 5e-9 * v


def test_sweep_rows(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "sweep", "--preset", "fig2-n64", "--variable", "snr_db", "--grid", "0:50:5")
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["snr_db", "total_bps"]
    assert len(rows) == 12
    values = [float(r[1]) for r in rows[1:]]
    assert values == sorted(values)


def test_sweep_speed_units(capsysbinary):
    code, out, _ = run_cli(
        capsysbinary, "sweep", "--preset", "fig2-n16", "--variable", "speed", "--grid", "0,500km/h,1200km/h"
    )
    assert code == 0
    rows = read_csv(out)[1:]
    assert float(rows[0][1]) == pytest.approx(1e6 * math.log2(1 + 1e5), rel=1e-8)
    assert float(rows[2][0]) == pytest.approx(1000 / 3, rel=1e-9)


def test_simulate_deterministic(capsysbinary):
    argv = ["simulate", "--preset", "fig2-n16", "--trials", "600", "--seed", "7"]
    _, first, _ = run_cli(capsysbinary, *argv)
    _, second, _ = run_cli(capsysbinary, *argv)
    _, threaded, _ = run_cli(capsysbinary, *argv, "--workers", "4")
    assert first == second == threaded
    assert read_csv(first)[0][-1] == "noise_w_stderr"
    _, other, _ = run_cli(capsysbinary, *argv[:-1], "8")
    assert other != first


def test_json_output(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "feasibility", "--rate", "48kbps", "--speed", "1200km/h", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "feasibility"
    assert doc["columns"] == ["technology", "qualifies", "margin", "reason"]
    good = [r["technology"] for r in doc["rows"] if r["qualifies"]]
    assert good == ["FSO", "LCX"]
    assert doc["rows"][0]["margin"] == "inf"
    assert any("LCX" in n for n in doc["notes"])


def test_feasibility_open_site(capsysbinary):
    _, out, _ = run_cli(capsysbinary, "feasibility", "--rate", "1kbps", "--speed", "0", "--open-site")
    rows = read_csv(out)[1:]
    assert len(rows) == 7 and all(r[1] == "true" for r in rows)


def test_table1_and_presets(capsysbinary):
    code, out, _ = run_cli(capsysbinary, "table1")
    assert code == 0
    rows = {r[0]: r for r in read_csv(out)[1:]}
    assert rows["ieee80211a"][-1] == "false"
    code, out, _ = run_cli(capsysbinary, "presets")
    assert [r[0] for r in read_csv(out)[1:]] == [p.value for p in PresetId]


def test_output_file_and_config(tmp_path, capsysbinary):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"preset": "fig2-n16", "snr": "20dB", "format": "json"}))
    target = tmp_path / "out.json"
    code, out, _ = run_cli(capsysbinary, "analyze", "--config", str(cfg), "--snr", "50dB", "-o", str(target))
    assert code == 0 and out == b""
    doc = json.loads(target.read_text())
    p = preset(PresetId.FIG2_N16)
    assert doc["total_bps"] == pytest.approx(throughput(p.cfg, p.mob, p.fading).total_bps, rel=1e-8)


def test_bad_config_field(tmp_path, capsysbinary):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"warp": 9}))
    assert run_cli(capsysbinary, "analyze", "--config", str(cfg))[0] == 2


def test_unwritable_output(tmp_path, capsysbinary):
    target = tmp_path / "missing-dir" / "out.csv"
    code, out, err = run_cli(capsysbinary, "presets", "-o", str(target))
    assert code == 1
    assert "cannot write" in err


def test_runtime_failure(tmp_path, capsysbinary):
    bad = tmp_path / "cat.json"
    bad.write_text("{not json")
    assert run_cli(capsysbinary, "feasibility", "--rate", "1kbps", "--catalog", str(bad))[0] == 1
    code, _, err = run_cli(
        capsysbinary, "analyze", "--n", "4", "--symbol-interval", "1us", "--carrier-freq", "5GHz",
        "--speed", "0", "--snr", "1e400",
    )
    assert code == 2 and "finite" in err
