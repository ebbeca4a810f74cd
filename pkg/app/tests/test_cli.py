import json

from click.testing import CliRunner

from main import cli


def _write_config(path, **overrides):
    payload = {
        "medium": {"kind": "uniform"},
        "omegas": [1.0, 2.0],
        "quadrature": {"n_r": 16, "n_phi": 8, "n_theta": 8},
    }
    payload.update(overrides)
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_sweep_writes_csv_and_exits_zero(tmp_path):
    cfg = _write_config(tmp_path / "uniform.json")
    out = tmp_path / "uniform.csv"
    result = CliRunner().invoke(cli, ["sweep", str(cfg), "-o", str(out), "--threads", "1"])
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# toolkit_version=")
    assert "omega,bound_id,lhs,rhs,margin,pass,n_trunc,tail,notes" in lines


def test_sweep_uses_output_path_from_config(tmp_path):
    target = tmp_path / "nested" / "from_config.csv"
    cfg = _write_config(tmp_path / "c.json", output={"csv": str(target)})
    result = CliRunner().invoke(cli, ["sweep", str(cfg)])
    assert result.exit_code == 0, result.output
    assert target.exists()


def test_sweep_invalid_config_exits_two(tmp_path):
    cfg = _write_config(tmp_path / "bad.json", omegas=[])
    result = CliRunner().invoke(cli, ["sweep", str(cfg)])
    assert result.exit_code == 2


def test_sweep_missing_config_exits_two(tmp_path):
    result = CliRunner().invoke(cli, ["sweep", str(tmp_path / "absent.json")])
    assert result.exit_code == 2


def test_suite_sharpness_lines():
    result = CliRunner().invoke(cli, ["suite", "sharpness"])
    assert result.exit_code == 0, result.output
    ids = [line.split()[0] for line in result.output.splitlines() if line.startswith("sharpness.")]
    assert ids == [
        "sharpness.ratio.j0",
        "sharpness.bracket",
        "sharpness.r_scaling",
        "sharpness.omega_independence",
        "sharpness.eigenfunction",
    ]
    assert all(line.endswith("pass") for line in result.output.splitlines() if line.startswith("sharpness."))


def test_suite_rejects_unknown_selector():
    result = CliRunner().invoke(cli, ["suite", "everything"])
    assert result.exit_code == 2


def test_plot_missing_report_exits_two(tmp_path):
    result = CliRunner().invoke(cli, ["plot", str(tmp_path / "none.csv"), "--kind", "ratio_vs_omega", "-o", str(tmp_path / "x.svg")])
    assert result.exit_code == 2


def test_plot_missing_column_exits_two(tmp_path):
    csv = tmp_path / "trace.csv"
    csv.write_text("r,eps\n0.1,0.5\n", encoding="utf-8")
    result = CliRunner().invoke(cli, ["plot", str(csv), "--kind", "mollifier_trace", "-o", str(tmp_path / "x.svg")])
    assert result.exit_code == 2


def test_plot_ratio_svg(tmp_path):
    cfg = _write_config(tmp_path / "uniform.json")
    csv = tmp_path / "uniform.csv"
    runner = CliRunner()
    assert runner.invoke(cli, ["sweep", str(cfg), "-o", str(csv)]).exit_code == 0
    svg = tmp_path / "ratio.svg"
    result = runner.invoke(cli, ["plot", str(csv), "--kind", "ratio_vs_omega", "-o", str(svg)])
    assert result.exit_code == 0, result.output
    assert "<svg" in svg.read_text(encoding="utf-8")


def test_version_option():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "maxstab" in result.output
