from click.testing import CliRunner

from dataspace.cli import fit_inverse, main


def test_run_box_transcript():
    result = CliRunner().invoke(main, ["run", "box"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[:4] == [
        "client: learned that box's value is now 0",
        "box: taking on new-value 1",
        "client: learned that box's value is now 1",
        "box: taking on new-value 2",
    ]


def test_run_unknown_name_fails():
    result = CliRunner().invoke(main, ["run", "no-such-example"])
    assert result.exit_code != 0
    assert "unknown example" in result.output


def test_run_trace_then_render(tmp_path):
    path = str(tmp_path / "box.trace")
    runner = CliRunner()
    result = runner.invoke(main, ["run", "box", "--trace", path])
    assert result.exit_code == 0
    rendered = runner.invoke(main, ["render", path])
    assert rendered.exit_code == 0
    assert "box" in rendered.output and "client" in rendered.output


def test_bench_reports_cost_and_shape():
    result = CliRunner().invoke(
        main, ["bench", "unicast", "--k", "2", "--k", "4", "--repeat", "1"]
    )
    assert result.exit_code == 0
    assert "cost (us)" in result.output
    assert "shape: max/min ratio" in result.output


def test_bench_unknown_name_fails():
    result = CliRunner().invoke(main, ["bench", "nope", "--k", "2"])
    assert result.exit_code != 0
    assert "unknown benchmark" in result.output


def test_fit_inverse_recovers_coefficients():
    pts = [(k, 2.0 + 6.0 / k) for k in (1, 2, 3, 6)]
    a, b = fit_inverse(pts)
    assert abs(a - 2.0) < 1e-9 and abs(b - 6.0) < 1e-9
