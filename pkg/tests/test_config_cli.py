from __future__ import annotations

import csv
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mirrorqm.cli import main
from mirrorqm.config import SCENARIOS, ConfigError, ScenarioConfig, load_config, parse_config


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def summary_lines(out: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in out.splitlines() if "=" in line)


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_preset_round_trip(scenario):
    cfg = ScenarioConfig.preset(scenario)
    assert parse_config(cfg.to_text()) == cfg
    assert parse_config(parse_config(cfg.to_text()).to_text()) == cfg


@given(
    p0=st.floats(0.1, 100.0),
    seed=st.integers(0, 2**63 - 1),
    xs=st.lists(st.floats(-1e6, 1e6), max_size=5),
    out=st.text(alphabet="abcdefghijklmnopqrstuvwxyz_./-", max_size=20),
)
def test_round_trip_is_identity(p0, seed, xs, out):
    cfg = ScenarioConfig.preset("arrival").replace(p0=p0, seed=seed, x_values=tuple(xs), output=out)
    assert parse_config(cfg.to_text()) == cfg


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nscenario = stationary  # trailing\nlam = 2.5\n")
    assert cfg.scenario == "stationary"
    assert cfg.lam == 2.5
    assert cfg.gamma == ScenarioConfig.preset("stationary").gamma


@pytest.mark.parametrize(
    "text, message",
    [
        ("bogus = 1\n", "unknown key"),
        ("lam = 1\nlam = 2\n", "duplicate key"),
        ("lam = fast\n", "cannot parse"),
        ("lam = nan\n", "cannot parse"),
        ("just words\n", "expected 'key = value'"),
        ("scenario = nope\n", "unknown scenario"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text).validate()


@pytest.mark.parametrize(
    "changes",
    [{"branch": "sideways"}, {"lam": 0.0}, {"gamma": -1.0}, {"t_count": 1}, {"p_start": 0.0},
     {"x_values": ()}, {"n_events": 0}, {"hbar": -1.0}],
)
def test_validation_errors(changes):
    with pytest.raises(ConfigError):
        ScenarioConfig.preset("arrival").replace(**changes).validate()


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")
    assert main(["arrival", "--config", str(tmp_path / "absent.cfg")]) == 2


def test_empty_positions_exit_2(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("x_values =\n")
    assert main(["arrival", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 2
    assert "x_values" in capsys.readouterr().err


def test_scenario_mismatch_exit_2(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("scenario = stationary\n")
    assert main(["arrival", "--config", str(cfg), "--out", str(tmp_path / "a.csv")]) == 2


def test_phase_guard_exit_3(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("t_stop = 60\nt_count = 200\n")
    assert main(["arrival", "--config", str(cfg), "--out", str(tmp_path / "g.csv")]) == 3
    assert "momentum samples" in capsys.readouterr().err


def test_truncation_guard_exit_3(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("sigma = 3\n")
    assert main(["arrival", "--config", str(cfg), "--out", str(tmp_path / "t.csv")]) == 3


@pytest.fixture(scope="module")
def arrival_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("arrival")
    cfg = d / "a.cfg"
    cfg.write_text("x_values = 20\n")
    out = d / "a.csv"
    assert main(["arrival", "--config", str(cfg), "--out", str(out)]) == 0
    return cfg, out


def test_arrival_csv_layout(arrival_run):
    _, out = arrival_run
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, rows = read_csv(out)
    assert header == ["t", "x", "rho", "phi_plus_re", "phi_plus_im", "phi_minus_re", "phi_minus_im"]
    assert len(rows) == ScenarioConfig.preset("arrival").t_count
    for row in rows[::97]:
        for cell in row:
            assert repr(float(cell)) == cell


def test_arrival_peak_near_classical_time(arrival_run):
    _, out = arrival_run
    _, rows = read_csv(out)
    data = np.array(rows, dtype=float)
    t_peak = data[np.argmax(data[:, 2]), 0]
    assert abs(t_peak - 4.0) / 4.0 < 0.02


def test_arrival_normalization_report(capsys, tmp_path):
    assert main(["arrival", "--out", str(tmp_path / "a.csv")]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("normalization")]
    assert len(lines) == 3
    for line in lines:
        assert abs(float(line.rsplit("=", 1)[1]) - 1.0) < 1e-3


def test_arrival_output_is_bit_identical(arrival_run, tmp_path):
    cfg, out = arrival_run
    again = tmp_path / "again.csv"
    assert main(["arrival", "--config", str(cfg), "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def run_stationary(tmp_path, capsys, text: str = ""):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(text)
    out = tmp_path / "s.csv"
    assert main(["stationary", "--config", str(cfg), "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    summary = dict(zip(lines[0].split(","), map(float, lines[1].split(","))))
    return read_csv(out), summary


def test_stationary_summary(tmp_path, capsys):
    (header, rows), summary = run_stationary(tmp_path, capsys)
    assert header == ["epsilon", "chi_sq", "chi_sq_convolved"]
    assert list(summary) == ["T_mean", "T_std", "fwhm", "fwhm_convolved", "uncertainty_product"]
    assert summary["fwhm"] == 1.0
    assert summary["uncertainty_product"] == 1.0
    assert summary["fwhm_convolved"] == 3.0


def test_stationary_without_natural_width(tmp_path, capsys):
    (_, rows), _ = run_stationary(tmp_path, capsys, "gamma = 0\n")
    data = np.array(rows, dtype=float)
    np.testing.assert_allclose(data[:, 2], data[:, 1], rtol=1e-9)


@pytest.fixture(scope="module")
def bayes_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("bayes")
    out = d / "demo.csv"
    code = subprocess.run(
        [sys.executable, "-m", "mirrorqm", "bayes-demo", "--out", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert code.returncode == 0, code.stderr
    return out, d / "demo_events.csv", summary_lines(code.stdout)


def test_bayes_demo_outputs(bayes_run):
    out, events, _ = bayes_run
    header, rows = read_csv(out)
    assert header == ["x", "t", "p_joint", "f_marginal", "g_marginal"]
    cfg = ScenarioConfig.preset("bayes-demo")
    assert len(rows) == cfg.x_count * cfg.t_count
    header, rows = read_csv(events)
    assert header == ["event_index", "x", "t"]
    assert len(rows) == cfg.n_events
    assert [r[0] for r in rows[:3]] == ["0", "1", "2"]


def test_bayes_demo_statistics(bayes_run):
    _, _, report = bayes_run
    assert float(report["ks_t"]) < 0.02
    assert float(report["ks_x"]) < 0.02
    assert float(report["reconstruct_f_max_abs_diff"]) < 1e-3


def test_bayes_demo_events_are_byte_identical(bayes_run, tmp_path, capsys):
    _, events, _ = bayes_run
    assert main(["bayes-demo", "--out", str(tmp_path / "d.csv")]) == 0
    assert (tmp_path / "d_events.csv").read_bytes() == events.read_bytes()


def test_seed_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("n_events = 1000\nseed = 12\nevents_output = " + str(tmp_path / "ev.csv") + "\n")
    assert main(["bayes-demo", "--config", str(cfg), "--out", str(tmp_path / "b.csv"), "--seed", "13"]) == 0
    _, rows13 = read_csv(tmp_path / "ev.csv")
    assert main(["bayes-demo", "--config", str(cfg), "--out", str(tmp_path / "b.csv")]) == 0
    _, rows12 = read_csv(tmp_path / "ev.csv")
    assert rows12 != rows13
    assert len(rows12) == 1000


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["plot"])
    assert info.value.code == 2
