import subprocess
import sys

import numpy as np
import pytest

from stagfv import ConfigurationError, parse_config, run_case, write_outputs

MINIMAL_SOD = """
[problem]
preset = sod
[grid]
n_cells = 50
[scheme]
scheme = explicit
end_time = 0.1
"""


def test_parse_minimal_sod_defaults():
    cfg = parse_config(MINIMAL_SOD)
    assert cfg.scheme_config.gamma == 1.4
    assert cfg.scheme_config.cfl_fraction == 0.5
    assert cfg.scheme_config.reconstruction == "upwind"
    assert cfg.left == (1.0, 0.0, 1.0)
    assert cfg.x0 == 0.5
    assert cfg.n_cells == 50


def test_parse_preset_end_time_default():
    cfg = parse_config("[problem]\npreset = sod\n[grid]\nn_cells = 10\n[scheme]\nscheme=explicit\n")
    assert cfg.scheme_config.end_time == 0.25


def test_parse_explicit_states():
    text = """
[problem]
left_rho = 2.0
left_u = 1.0
left_p = 3.0
right_rho = 1.0
right_u = 0.0
right_p = 1.0
x0 = 0.4
gamma = 1.67
[grid]
n_cells = 20
[scheme]
scheme = pressure_correction
end_time = 0.05
"""
    cfg = parse_config(text)
    assert cfg.left == (2.0, 1.0, 3.0)
    assert cfg.scheme_config.gamma == 1.67


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("[problem]\npreset = nosuch\n[grid]\nn_cells = 8\n", "unknown preset"),
        ("[problem]\npreset = sod\n[grid]\nn_cells = 8\n[scheme]\nbogus = 1\n", "unknown key scheme.bogus"),
        ("[problem]\npreset = sod\n", "missing mandatory key grid.n_cells"),
        ("[problem]\npreset = sod\n[grid]\nn_cells = 8\n[scheme]\nscheme = upstream\n", "scheme"),
        ("[weird]\nx = 1\n", "unknown section"),
        ("[problem]\npreset = sod\npreset = sod\n[grid]\nn_cells = 8\n", "duplicate key"),
    ],
)
def test_parse_rejections(text, fragment):
    with pytest.raises(ConfigurationError) as err:
        parse_config(text)
    assert fragment.split()[0] in str(err.value)


def test_stabilization_rule_at_parse_time():
    good = MINIMAL_SOD + "[scheme]\n".replace("[scheme]\n", "")
    accepted = parse_config(
        MINIMAL_SOD.replace(
            "end_time = 0.1", "end_time = 0.1\nstabilization_q = 3\nstabilization_alpha = 1.5"
        )
    )
    assert accepted.scheme_config.stabilization.q == 3.0
    with pytest.raises(ConfigurationError):
        parse_config(
            MINIMAL_SOD.replace(
                "end_time = 0.1", "end_time = 0.1\nstabilization_q = 2\nstabilization_alpha = 1"
            )
        )


def test_run_case_end_time_zero_echoes_initial():
    cfg = parse_config(MINIMAL_SOD.replace("end_time = 0.1", "end_time = 0.0"))
    report = run_case(cfg)
    assert report.n_steps == 0
    assert report.failure is None
    assert np.allclose(report.final_state.rho[:25], 1.0)
    # at t = 0 the exact profile is the initial data: zero error
    assert report.l1_error == 0.0


def test_run_case_determinism(tmp_path):
    cfg = parse_config(MINIMAL_SOD)
    r1 = run_case(cfg)
    r2 = run_case(cfg)
    write_outputs(r1, tmp_path / "a")
    write_outputs(r2, tmp_path / "b")
    for name in ("fields.csv", "exact.csv", "diag.csv", "plot.gp-data"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_outputs_schema(tmp_path):
    cfg = parse_config(MINIMAL_SOD)
    report = run_case(cfg)
    files = write_outputs(report, tmp_path)
    names = {f.name for f in files}
    assert names == {"fields.csv", "exact.csv", "diag.csv", "audit.txt", "plot.gp-data"}
    lines = (tmp_path / "fields.csv").read_text().splitlines()
    assert lines[0].startswith("# schema=1")
    assert lines[1] == "x,rho,u,p,e,eta"
    assert len(lines) == 2 + cfg.n_cells
    exact_lines = (tmp_path / "exact.csv").read_text().splitlines()
    assert exact_lines[1] == "x,rho,u,p,e,eta"
    assert len(exact_lines) == 2 + cfg.n_cells
    audit = (tmp_path / "audit.txt").read_text()
    assert "l1_error=" in audit
    assert "renorm_total_bound=" in audit
    gp = (tmp_path / "plot.gp-data").read_text()
    assert "# field rho" in gp and "# field rho_exact" in gp


def test_run_uniform_state_constant_columns(tmp_path):
    text = """
[problem]
left_rho = 1.0
left_u = 0.0
left_p = 1.0
right_rho = 1.0
right_u = 0.0
right_p = 1.0
x0 = 0.5
[grid]
n_cells = 16
[scheme]
scheme = explicit
end_time = 0.01
"""
    report = run_case(parse_config(text))
    write_outputs(report, tmp_path)
    rows = (tmp_path / "fields.csv").read_text().splitlines()[2:]
    rho = np.array([float(r.split(",")[1]) for r in rows])
    assert np.allclose(rho, 1.0)


def test_run_case_step_failure_is_reported():
    # an oversized fixed step trips the explicit guard and aborts
    text = MINIMAL_SOD.replace(
        "end_time = 0.1", "end_time = 0.1\ndt_policy = fixed\ndt_fixed = 0.5"
    )
    report = run_case(parse_config(text))
    assert report.failure is not None
    assert "CflViolation" in report.failure


def _cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "stagfv", *args],
        capture_output=True,
        text=True,
        cwd="/root/pkg",
    )


def test_cli_run_success(tmp_path):
    cfg = tmp_path / "sod.cfg"
    cfg.write_text(MINIMAL_SOD)
    out = _cli("run", str(cfg), "--out", str(tmp_path / "out"))
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "out" / "fields.csv").exists()


def test_cli_config_error_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[problem]\npreset = nosuch\n[grid]\nn_cells = 8\n")
    out = _cli("run", str(cfg))
    assert out.returncode == 2
    assert "config error" in out.stderr


def test_cli_missing_file_exit_2(tmp_path):
    out = _cli("run", str(tmp_path / "absent.cfg"))
    assert out.returncode == 2


def test_cli_step_failure_exit_3(tmp_path):
    cfg = tmp_path / "fail.cfg"
    cfg.write_text(
        MINIMAL_SOD.replace(
            "end_time = 0.1", "end_time = 0.1\ndt_policy = fixed\ndt_fixed = 0.5"
        )
    )
    out = _cli("run", str(cfg), "--out", str(tmp_path / "out"))
    assert out.returncode == 3
    assert (tmp_path / "out" / "audit.txt").exists()


def test_cli_no_correction_flag(tmp_path):
    cfg = tmp_path / "sod.cfg"
    cfg.write_text(MINIMAL_SOD)
    out = _cli("run", str(cfg), "--out", str(tmp_path / "out"), "--no-correction")
    assert out.returncode == 0


def test_cli_riemann_dump(tmp_path):
    out = _cli("riemann", "sod", "--samples", "10")
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert lines[1] == "x,rho,u,p"
    assert len(lines) == 2 + 10
    target = tmp_path / "exact.csv"
    out = _cli("riemann", "toro-test5", "--samples", "5", "--out", str(target))
    assert out.returncode == 0
    assert target.exists()
