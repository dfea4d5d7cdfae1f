import json
import math
import subprocess
import sys

import numpy as np
import pytest

from superatom import cli
from superatom.config import PRESETS, RunConfig, apply_preset, parse_config
from superatom.errors import ConfigurationError
from superatom.models import PhysicalParams, effective_coupling, mhz


def write_ini(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


def test_empty_config_with_preset(tmp_path):
    cfg = parse_config(write_ini(tmp_path, "[run]\npreset = fig3\n"))
    base = PhysicalParams()
    assert cfg.params.replace(alpha=0.0, delta_probe=0.0) == base
    assert cfg.params.alpha == mhz(0.15)
    assert cfg.params.delta_probe == effective_coupling(base)


def test_preset_values_match_captions():
    base = PhysicalParams()
    g = effective_coupling(base)
    expected = {"fig3": (0.15, g), "fig4": (1.5, g / math.sqrt(2)),
                "fig5": (1.25, g / math.sqrt(3)), "fig6": (2.0, g / math.sqrt(3))}
    for name, (alpha_mhz, delta) in expected.items():
        p = apply_preset(base, name)
        assert p.alpha == 2 * math.pi * alpha_mhz
        assert p.delta_probe == pytest.approx(delta, rel=1e-15)
        assert apply_preset(base, name, branch=-1).delta_probe == -p.delta_probe
    assert set(PRESETS) == set(expected)


def test_units_and_validation(tmp_path):
    cfg = parse_config(write_ini(tmp_path, "[params]\nkappa = 1.3\n[trajectory]\nt_final = 2\n"))
    assert cfg.params.kappa == 2 * math.pi * 1.3
    assert cfg.trajectory.t_final == 2.0
    with pytest.raises(ConfigurationError) as exc:
        parse_config(write_ini(tmp_path, "[params]\nn_max = 0\n"))
    assert "n_max" in str(exc.value)
    with pytest.raises(ConfigurationError) as exc:
        parse_config(write_ini(tmp_path, "[params]\nkapa = 1.3\n"))
    assert exc.value.key == "params.kapa"
    with pytest.raises(ConfigurationError):
        parse_config(write_ini(tmp_path, "[physics]\nN = 3\n"))
    with pytest.raises(ConfigurationError):
        parse_config(overrides={"run.workers": "0"})
    with pytest.raises(ConfigurationError):
        parse_config(overrides={"params.n_max": "2.5"})
    with pytest.raises(ConfigurationError):
        parse_config(overrides={"run.preset": "fig9"})


def test_manifest_round_trip(tmp_path):
    cfg = parse_config(overrides={"run.preset": "fig4", "params.n_max": "4",
                                  "trajectory.t_final": "0.5", "run.output_dir": str(tmp_path),
                                  "run.spectrum_min": "-3.3"})
    assert cli.run(cfg) == 0
    again = parse_config(tmp_path / "manifest.json")
    assert again == cfg
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["params"]["kappa"] == pytest.approx(1.3, rel=1e-15)
    assert manifest["seed"] == 0 and "code_version" in manifest and manifest["wall_time_s"] >= 0
    # MHz overrides on top of a manifest are still converted
    shifted = parse_config(tmp_path / "manifest.json", {"params.alpha": "1.0"})
    assert shifted.params.alpha == mhz(1.0)


def _run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def test_trajectory_schema_and_determinism(tmp_path):
    args = ("preset", "fig3", "--seed", "5", "--set", "params.n_max=3",
            "--set", "trajectory.t_final=5")
    assert _run(tmp_path / "a", *args) == 0
    assert _run(tmp_path / "b", *args) == 0
    for name in ("record.csv", "clicks.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = cli.read_csv(tmp_path / "a" / "record.csv")
    assert list(rows[0]) == ["t_us", "mean_photon", "pop_E1", "click"]
    assert len(rows) == 501
    assert {r["click"] for r in rows} <= {"0", "1"}
    clicks = cli.read_csv(tmp_path / "a" / "clicks.csv")
    assert all(set(r) == {"t_us", "channel"} for r in clicks)
    assert sum(int(r["click"]) for r in rows) == sum(r["channel"] == "cavity" for r in clicks)


def test_every_output_declares_units(tmp_path):
    assert _run(tmp_path / "e", "ensemble", "-M", "8", "--set", "run.preset=fig4",
                "--set", "params.n_max=4", "--set", "trajectory.t_final=2") == 0
    assert _run(tmp_path / "l", "ladder-spectrum", "--set", "params.n_b=3") == 0
    assert _run(tmp_path / "m", "master", "--set", "params.n_max=2",
                "--set", "trajectory.t_final=1", "--set", "params.alpha=0.5") == 0
    for sub in ("e", "l", "m"):
        for path in (tmp_path / sub).glob("*.csv"):
            assert path.read_text().startswith("# units: ")
    eig = cli.read_csv(tmp_path / "l" / "eigenvalues.csv")
    assert list(eig[0]) == ["block", "n_exc", "value"]
    two = sorted(float(r["value"]) for r in eig if r["n_exc"] == "2")
    g = effective_coupling(PhysicalParams())
    np.testing.assert_allclose(two, [-math.sqrt(10 / 3) * g, 0, math.sqrt(10 / 3) * g],
                               atol=1e-9 * g)
    bursts = cli.read_csv(tmp_path / "e" / "bursts.csv")
    assert list(bursts[0]) == ["multiplicity", "count"]


def test_spectrum_default_grid(tmp_path):
    assert _run(tmp_path, "spectrum", "--set", "params.n_max=2",
                "--set", "params.alpha=0.15") == 0
    rows = cli.read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 201
    assert list(rows[0]) == ["delta_rad_per_us", "mean_photon_ss", "flux", "g2_zero"]
    g = effective_coupling(PhysicalParams())
    assert float(rows[0]["delta_rad_per_us"]) == pytest.approx(-2 * g)
    assert float(rows[-1]["delta_rad_per_us"]) == pytest.approx(2 * g)


def test_parallel_ensemble_identical_to_serial(tmp_path):
    common = ("ensemble", "-M", "64", "--seed", "3", "--set", "run.preset=fig3",
              "--set", "params.n_max=3", "--set", "trajectory.t_final=3")
    assert _run(tmp_path / "w1", *common, "--workers", "1") == 0
    assert _run(tmp_path / "w4", *common, "--workers", "4") == 0
    for name in ("record.csv", "clicks.csv", "bursts.csv"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w4" / name).read_bytes()


def test_run_parallel_ensemble_validates_size():
    with pytest.raises(ConfigurationError):
        cli.run_parallel_ensemble(RunConfig(), 0)


def test_exit_codes(tmp_path, capsys):
    assert _run(tmp_path, "trajectory", "--set", "params.n_max=0") == cli.EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert err["key"] == "n_max"
    assert _run(tmp_path, "ensemble", "-M", "0") == cli.EXIT_CONFIG
    capsys.readouterr()
    # Liouvillian above the oracle cap is a solver failure
    assert _run(tmp_path, "master", "--set", "params.n_max=200") == cli.EXIT_SOLVER
    assert json.loads(capsys.readouterr().err)["error"] == "solver"
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["ladder-spectrum", "--out", str(blocker / "sub")]) == cli.EXIT_IO
    assert json.loads(capsys.readouterr().err)["error"] == "io"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "superatom.cli", "ladder-spectrum",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "manifest.json").exists()
