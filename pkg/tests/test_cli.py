import math
import subprocess
import sys
import warnings

import pytest

from reldecay import cli
from reldecay.amplitudes import RegimeWarning
from reldecay.config import parse_config, parse_document
from reldecay.errors import ConfigError
from reldecay.kinematics import PhaseModel

MINIMAL = """
distribution.kind = BreitWigner
distribution.M = 1
distribution.Gamma = 0.01
distribution.mu0 = 0
kinematics.p = 1.7320508075688772
grid.t_max = 100
grid.n = 200
grid.spacing = log
"""

SCAN_ONLY = """
analyses.scan = true
scan.m = 0.5, 1.0
scan.p_par = linspace(-1, 1, 3)
scan.v = 0, 0.5
"""


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.gamma == pytest.approx(2.0, rel=1e-14)
    assert cfg.dist.Gamma == 0.01 and cfg.n_points == 200
    g = cfg.grid()
    assert g.t_over_tau[-1] == pytest.approx(100.0)
    assert any(abs(x - 1.0) < 1e-12 for x in g.t_over_tau)


def test_parse_values():
    doc = parse_document("a = 1\nb = 2.5 # note\nc = true\nd = x, 2\ne = -inf\nf = linspace(0, 1, 3)\n")
    assert doc == {"a": 1, "b": 2.5, "c": True, "d": ["x", 2], "e": -math.inf, "f": [0.0, 0.5, 1.0]}
    with pytest.raises(ConfigError):
        parse_document("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        parse_document("novalue\n")


def test_both_p_and_v_rejected():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(MINIMAL + "kinematics.v = 0.5\nsmearing.sigma_p = 0.01\n")


def test_unknown_keys_listed():
    with pytest.raises(ConfigError, match="distribution.width, grid.points"):
        parse_config(MINIMAL + "grid.points = 3\ndistribution.width = 2\n")


@pytest.mark.parametrize("extra, field", [
    ("grid.t_max = 2e5\n", "grid.t_max"),
    ("grid.n = 1\n", "grid.n"),
    ("distribution.Gamma = -1\n", "distribution.Gamma"),
    ("grid.spacing = cubic\n", "grid.spacing"),
])
def test_invariant_violations_name_field(extra, field):
    lines = [ln for ln in MINIMAL.splitlines() if not ln.startswith(extra.split("=")[0].strip())]
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_config("\n".join(lines) + "\n" + extra)


def test_regime_warning_not_error():
    text = MINIMAL.replace("kinematics.p = 1.7320508075688772", "kinematics.v = 0.5")
    text = text.replace("distribution.Gamma = 0.01", "distribution.Gamma = 1e-4")
    with pytest.warns(RegimeWarning, match="sigma_p <= M/10 violated"):
        cfg = parse_config(text + "smearing.sigma_p = 0.5\n")
    assert cfg.regime_warning


def test_per_model_x_rules():
    text = MINIMAL.replace("kinematics.p = 1.7320508075688772", "kinematics.v = 0.5")
    text += "smearing.sigma_p = 0.01\nphase_models = CarloApprox, CorrectedApprox\n"
    text += "x_rules.CorrectedApprox = fixed:0\n"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        cfg = parse_config(text)
    assert cfg.x_rules[PhaseModel.CARLO_APPROX].comoving
    assert not cfg.x_rules[PhaseModel.CORRECTED_APPROX].comoving


def test_scan_only_config():
    cfg = parse_config(SCAN_ONLY)
    assert cfg.scan_only and cfg.scan_p == (-1.0, 0.0, 1.0)


def test_run_momentum_outputs(tmp_path, capsys):
    cfg = parse_config(MINIMAL.replace("grid.n = 200", "grid.n = 40"))
    assert cli.execute(cfg, tmp_path) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["compare.csv", "manifest.txt", "momentum.csv", "plot.py", "rest.csv"]
    manifest = (tmp_path / "manifest.txt").read_text()
    files = manifest.split("[files]\n")[1].split("\n\n")[0].split()
    assert sorted(files) == names
    assert "kinematics.p = 1.7320508075688772" in manifest
    assert "DilatedLaw" in (tmp_path / "compare.csv").read_text()
    assert "DilatedLaw" in capsys.readouterr().out


def test_run_scan_only(tmp_path):
    cfg = parse_config(SCAN_ONLY)
    assert cli.execute(cfg, tmp_path) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["consistency_scan.csv", "manifest.txt"]


def test_scan_command_skips_series(tmp_path):
    cfg = parse_config(MINIMAL + SCAN_ONLY)
    assert cli.execute(cfg, tmp_path, command="scan") == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["consistency_scan.csv", "manifest.txt"]


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(MINIMAL + "kinematics.v = 0.3\n")
    assert cli.main(["validate", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["run", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG
    good = tmp_path / "good.cfg"
    good.write_text(MINIMAL)
    assert cli.main(["validate", str(good)]) == 0
    assert "gamma=2" in capsys.readouterr().out
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["run", str(good), "--output-dir", str(blocker / "sub")]) == cli.EXIT_IO


def test_wholly_failed_series_exits_3(tmp_path, monkeypatch):
    from reldecay import quadrature as Q
    from reldecay.errors import ConvergenceError

    def broken(*a, **k):
        raise ConvergenceError("forced")

    monkeypatch.setattr(Q, "fourier_transform_fast", broken)
    cfg = parse_config(MINIMAL.replace("grid.n = 200", "grid.n = 5"))
    assert cli.execute(cfg, tmp_path) == cli.EXIT_NUMERIC
    assert "every point failed" in (tmp_path / "manifest.txt").read_text()


def test_console_script_help(src_env):
    out = subprocess.run([sys.executable, "-m", "reldecay.cli", "--help"], env=src_env,
                         capture_output=True, text=True)
    assert out.returncode == 0 and "validate" in out.stdout
