import io

import pytest

from holderdsm.cli import build_parser, main, read_trajectory


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_validate_schedule_pass_and_fail():
    code, text = run(["validate-schedule", "--d", "3", "--c", "1", "--b", "0.5", "--q", "0.25"])
    assert code == 0 and "FAIL" not in text
    code, text = run(["validate-schedule", "--d", "1"])
    assert code == 1 and "witness t=0" in text


def test_solve_then_audit(tmp_path):
    path = tmp_path / "traj.csv"
    code, text = run(["solve", "--problem", "holder075", "--delta", "1e-1",
                      "--output", str(path)])
    assert code == 0
    fields = dict(line.split("=", 1) for line in text.splitlines())
    t_delta = float(fields["t_delta"])
    meta, header, data = read_trajectory(path)
    assert header[:5] == ["t", "discrepancy", "a", "h", "u_norm"]
    assert meta["problem"] == "holder075"
    assert data[-1, 0] == t_delta
    code, table = run(["audit", str(path)])
    assert code == 0 and "FAIL" not in table and "h bound" in table


def test_shifted_solve_round_trip(tmp_path):
    path = tmp_path / "shift.csv"
    code, _ = run(["solve", "--problem", "psd2", "--delta", "1e-1", "--ubar", "0,5",
                   "--output", str(path)])
    assert code == 0
    meta, _, _ = read_trajectory(path)
    assert meta["ubar"] == "0,5"
    code, table = run(["audit", str(path)])
    assert code == 0, table


def test_path_output_columns():
    code, text = run(["path", "--problem", "identity", "--delta", "1e-2", "--points", "6"])
    lines = text.splitlines()
    assert code == 0 and lines[0] == "t,a,psi,phi_d,residual,discrepancy" and len(lines) == 7
    # 17 significant digits
    assert len(lines[2].split(",")[1].replace(".", "").lstrip("0")) >= 15


def test_study_command(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("problem=identity\ndelta=1e-1,1e-2\nseeds=1\n")
    out_csv = tmp_path / "rows.csv"
    code, text = run(["study", str(cfg), "--output", str(out_csv)])
    assert code == 0
    assert text.splitlines()[0] == "delta,median_t_delta,median_error,ok_runs"
    assert out_csv.read_text().startswith("delta,seed,t_delta,error")


def test_config_error_reported(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("problem=identity\ndelta=1e-2\nb=1.5\n")
    code, _ = run(["study", str(cfg)])
    assert code == 2 and "line 3" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["frobnicate"])
