import subprocess
import sys

import pytest

from slidekick.cli import ConfigError, ExperimentConfig, main


def run_cli(*argv):
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_poincare_spec_example(tmp_path):
    out = tmp_path / "p.csv"
    code, _ = run_cli(
        "poincare", "--model", "normal-fold", "--profile", "linear",
        "--eps", "1e-3", "--y0", "0.25", "--probe", "-0.8", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "eps,x_in,x_out,transit_time"
    x_out = float(lines[1].split(",")[2])
    assert x_out == pytest.approx(0.4990, abs=1e-4)


def test_inner_summary_format(tmp_path):
    out = tmp_path / "inner.csv"
    code, text = run_cli("inner", "--p", "2", "--phi-p", "-3",
                         "--u-start", "-30", "--out", str(out))
    assert code == 0
    assert text.startswith("eta0_at_0=")
    assert "err=" in text
    # stability across a doubled start depth
    code2, text2 = run_cli("inner", "--p", "2", "--phi-p", "-3",
                           "--u-start", "-60", "--out", str(out))
    v1 = float(text.split()[0].split("=")[1])
    v2 = float(text2.split()[0].split("=")[1])
    assert abs(v1 - v2) < 1e-8


def test_models_list():
    code, text = run_cli("models", "list")
    assert code == 0
    for mid in ("normal-fold", "coulomb", "stribeck", "saddle-homoclinic"):
        assert mid in text


def test_simulate_csv(tmp_path):
    out = tmp_path / "traj.csv"
    code, _ = run_cli(
        "simulate", "--model", "normal-fold", "--start=-0.8,0.1",
        "--until-y", "0.25", "--out", str(out),
    )
    assert code == 0
    text = out.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "t,x,y,event"
    assert "\r" not in text


def test_config_roundtrip():
    cfg = ExperimentConfig({"model": "normal-fold", "eps": "1e-3", "y0": "0.25"})
    again = ExperimentConfig.from_text(cfg.to_text())
    assert again == cfg


def test_config_unknown_key_rejected(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("frobnicate = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(str(p))


def test_config_file_feeds_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("probe = -0.8\ny0 = 0.25\n", encoding="utf-8")
    out = tmp_path / "p.csv"
    code, _ = run_cli("poincare", "--model", "normal-fold", "--profile", "linear",
                      "--eps", "1e-3", "--probe", "", "--config", str(cfg),
                      "--out", str(out))
    assert code == 0
    assert "-0.8" in out.read_text().splitlines()[1]


def test_exit_code_2_on_config_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n", encoding="utf-8")
    code = main(["poincare", "--model", "normal-fold", "--profile", "linear",
                 "--eps", "1e-3", "--probe", "-0.8", "--config", str(cfg)])
    assert code == 2


def test_exit_code_1_on_numerical_failure():
    # a probe on the wrong side of the fold never reaches the strip or returns
    code = main(["poincare", "--model", "normal-fold", "--profile", "linear",
                 "--eps", "1e-3", "--probe", "2.5"])
    assert code == 1


def test_bitwise_reproducible_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run_cli("poincare", "--model", "normal-fold", "--profile", "poly(2)",
                "--eps", "1e-3,1e-4", "--y0", "0.25", "--probe=-0.8,-0.6",
                "--out", str(out))
    assert a.read_bytes() == b.read_bytes()


def test_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "slidekick.cli", "models", "list"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
