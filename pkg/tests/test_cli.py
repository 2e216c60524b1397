"""Config parsing, command dispatch, output tables, and exit codes."""

import json

import numpy as np
import pytest

from slve import ConfigError, stress_rate_dispersion
from slve.cli import Command, main, parse_config, run

DISP_INI = """
[run]
command = dispersion

[model]
variant = strain_rate
nu = 1.0

[dispersion]
k_values = 0.0 0.5 1.0 2.0 4.0

[output]
directory = {out}
"""

SIM_INI = """
[run]
command = simulate

[model]
variant = stress_rate
gamma = 1.0

[constitutive]
kind = saturating
beta = 1.0
a = 2.0

[grid]
length = 6.283185307179586
n_cells = 64

[solver]
dt = 0.04
t_final = 0.4
output_stride = 5

[initial]
type = gaussian_bump
center = 3.141592653589793
width = 0.5
amplitude = 0.4

[output]
directory = {out}
"""

TWAVE_INI = """
[run]
command = twave

[model]
variant = stress_rate
gamma = 1.0

[constitutive]
kind = saturating
beta = 1.0
a = 1.0

[twave]
t_minus = 0.0
t_plus = 1.0

[output]
directory = {out}
"""


class TestParse:
    def test_minimal_dispersion_config(self):
        cfg = parse_config(DISP_INI.format(out="."))
        assert cfg.command is Command.DISPERSION
        assert cfg.params.nu == 1.0
        assert cfg.k_values.tolist() == [0.0, 0.5, 1.0, 2.0, 4.0]
        assert cfg.fmt == "csv"

    def test_negative_gamma_cites_dissipation(self):
        text = DISP_INI.format(out=".").replace(
            "variant = strain_rate\nnu = 1.0", "variant = stress_rate\ngamma = -0.1"
        )
        with pytest.raises(ConfigError, match="dissipation"):
            parse_config(text)

    def test_unknown_key_named(self):
        text = DISP_INI.format(out=".").replace("nu = 1.0", "nu = 1.0\nbogus = 2")
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(text)

    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match="mystery"):
            parse_config(DISP_INI.format(out=".") + "\n[mystery]\nx = 1\n")

    def test_missing_required_key_named(self):
        text = SIM_INI.format(out=".").replace("n_cells = 64\n", "")
        with pytest.raises(ConfigError, match="n_cells"):
            parse_config(text)

    def test_non_numeric_value_rejected(self):
        text = SIM_INI.format(out=".").replace("dt = 0.04", "dt = fast")
        with pytest.raises(ConfigError, match="dt"):
            parse_config(text)

    def test_single_mode_needs_k(self):
        text = SIM_INI.format(out=".").replace("type = gaussian_bump", "type = single_mode")
        with pytest.raises(ConfigError, match="single_mode"):
            parse_config(text)

    def test_step_over_ceiling_rejected_at_parse(self):
        text = SIM_INI.format(out=".").replace("dt = 0.04", "dt = 0.2")
        with pytest.raises(ConfigError, match="ceiling"):
            parse_config(text)

    def test_dispersion_needs_rate_variant(self):
        text = DISP_INI.format(out=".").replace("variant = strain_rate\nnu = 1.0", "variant = elastic")
        with pytest.raises(ConfigError, match="variant"):
            parse_config(text)

    def test_overrides_reach_the_model(self):
        cfg = parse_config(DISP_INI.format(out="."), {("model", "nu"): "2.5"})
        assert cfg.params.nu == 2.5


class TestRunDispersion:
    def test_csv_table_and_status(self, tmp_path):
        cfg = parse_config(DISP_INI.format(out=tmp_path))
        result = run(cfg)
        assert result.exit_code == 0 and result.status == "ok"
        lines = (tmp_path / "dispersion.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header[:2] == ["k", "classification"]
        assert len(lines) == 6
        k0 = lines[1].split(",")
        assert k0[1] == "marginally_stable"
        status = json.loads((tmp_path / "status.json").read_text())
        assert status["k_critical"] == 2.0
        assert status["worst_classification"] == "marginally_stable"

    def test_floats_roundtrip_through_csv(self, tmp_path):
        text = DISP_INI.format(out=tmp_path).replace(
            "variant = strain_rate\nnu = 1.0", "variant = stress_rate\ngamma = 1.0"
        )
        run(parse_config(text))
        lines = (tmp_path / "dispersion.csv").read_text().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, lines[3].split(",")))  # k = 1.0
        ref = stress_rate_dispersion(1.0, 1.0)
        assert float(row["positive_real_root"]) == ref.positive_real_root
        assert float(row["discriminant"]) == ref.discriminant

    def test_reruns_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(parse_config(DISP_INI.format(out=a)))
        run(parse_config(DISP_INI.format(out=b)))
        assert (a / "dispersion.csv").read_bytes() == (b / "dispersion.csv").read_bytes()
        assert (a / "status.json").read_bytes() == (b / "status.json").read_bytes()

    def test_jsonl_format(self, tmp_path):
        text = DISP_INI.format(out=tmp_path) + "format = jsonl\n"
        run(parse_config(text))
        lines = (tmp_path / "dispersion.jsonl").read_text().splitlines()
        assert len(lines) == 5
        rec = json.loads(lines[2])
        assert rec["k"] == 1.0 and rec["classification"] == "stable"
        assert rec["positive_real_root"] is None


class TestRunSimulate:
    def test_trajectory_table(self, tmp_path):
        result = run(parse_config(SIM_INI.format(out=tmp_path)))
        assert result.exit_code == 0
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t,x,v,eps,stress"
        # 3 samples (t = 0, 0.2, 0.4) x 64 nodes
        assert len(lines) == 1 + 3 * 64
        status = json.loads((tmp_path / "status.json").read_text())
        assert status["t_final"] == 0.4

    def test_blow_up_reported_with_time(self, tmp_path):
        text = SIM_INI.format(out=tmp_path).replace("t_final = 0.4", "t_final = 30.0")
        text = text.replace("kind = saturating", "kind = linear")
        result = run(parse_config(text))
        assert result.exit_code == 3 and result.status == "blow_up"
        assert 0.0 < result.record["t"] < 30.0
        assert result.record["max_abs_stress"] > 0.0
        # partial trajectory still written
        assert (tmp_path / "trajectory.csv").exists()
        status = json.loads((tmp_path / "status.json").read_text())
        assert status["status"] == "blow_up"


class TestRunTwave:
    def test_front_table_and_speed(self, tmp_path):
        result = run(parse_config(TWAVE_INI.format(out=tmp_path)))
        assert result.exit_code == 0
        status = json.loads((tmp_path / "status.json").read_text())
        assert status["c"] == pytest.approx(np.sqrt(2.0), rel=1e-14)
        assert status["exists"] is True
        assert status["signed_speed"] == pytest.approx(-np.sqrt(2.0), rel=1e-14)
        lines = (tmp_path / "twave.csv").read_text().splitlines()
        assert lines[0] == "xi,stress,eps,v"
        assert len(lines) == 1 + 2001

    def test_no_kink_still_ok_with_diagnostic(self, tmp_path):
        text = TWAVE_INI.format(out=tmp_path).replace("kind = saturating", "kind = linear")
        result = run(parse_config(text))
        assert result.exit_code == 0
        assert result.record["exists"] is False
        assert result.record["degenerate"] is True
        assert not (tmp_path / "twave.csv").exists()


class TestRunEnergyAudit:
    def test_energy_table(self, tmp_path):
        text = SIM_INI.format(out=tmp_path).replace("command = simulate", "command = energy")
        result = run(parse_config(text))
        assert result.exit_code == 0
        lines = (tmp_path / "energy.csv").read_text().splitlines()
        assert lines[0] == "t,kinetic,internal,total,dissipation_rate,balance_residual"
        assert len(lines) >= 2

    def test_audit_table_passes(self, tmp_path):
        text = SIM_INI.format(out=tmp_path).replace("command = simulate", "command = audit")
        result = run(parse_config(text))
        assert result.exit_code == 0
        assert result.record["passed"] is True
        lines = (tmp_path / "audit.csv").read_text().splitlines()
        assert lines[0] == "node,x,min_rate,total_dissipation,passed"
        assert len(lines) == 1 + 64
        assert lines[1].split(",")[-1] == "true"


class TestMain:
    def test_dispersion_end_to_end(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text(DISP_INI.format(out=tmp_path / "out"))
        code = main(["dispersion", "--config", str(ini)])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["status"] == "ok"

    def test_cli_command_overrides_config(self, tmp_path, capsys):
        # config says simulate; positional argument wins
        ini = tmp_path / "run.ini"
        ini.write_text(SIM_INI.format(out=tmp_path / "out") + "\n[dispersion]\nk_values = 1.0\n")
        code = main(["dispersion", "--config", str(ini)])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["command"] == "dispersion"

    def test_bad_config_exit_2(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text("[mystery]\nx = 1\n")
        assert main(["simulate", "--config", str(ini)]) == 2
        record = json.loads(capsys.readouterr().out)
        assert record["status"] == "error" and record["category"] == "config"

    def test_missing_config_file_exit_2(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "nope.ini")]) == 2
        assert json.loads(capsys.readouterr().out)["category"] == "config"

    def test_blow_up_exit_3(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        text = SIM_INI.format(out=tmp_path / "out").replace("kind = saturating", "kind = linear")
        ini.write_text(text)
        code = main(["simulate", "--config", str(ini), "--t-final", "30"])
        assert code == 3
        record = json.loads(capsys.readouterr().out)
        assert record["status"] == "blow_up" and record["t"] > 0.0

    def test_nu_and_out_overrides(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text(DISP_INI.format(out=tmp_path / "ignored"))
        out2 = tmp_path / "elsewhere"
        code = main(["dispersion", "--config", str(ini), "--nu", "0.5", "--out", str(out2)])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["k_critical"] == 4.0
        assert (out2 / "dispersion.csv").exists()

    def test_k_override_narrows_mode_list(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text(DISP_INI.format(out=tmp_path / "out"))
        code = main(["dispersion", "--config", str(ini), "--k", "3.0"])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["n_modes"] == 1
