import csv
import json
import shutil
from pathlib import Path

import pytest

from ionspec.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SMALL = {"model": {"power_law": {"n": 5, "j0_hz": 80.0, "alpha": 1.1}},
         "modes": [1, 5], "gamma": 0.7, "time": {"t_j": 20, "n_samples": 64}}


def write(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("command,outputs", [
    ("modes", ["modes.csv", "modes.svg"]),
    ("beatnote", ["beatnote_series.csv", "beatnote_spectrum.csv", "beatnote_peaks.csv",
                  "beatnote_summary.csv", "beatnote_spectrum.svg"]),
    ("dispersion", ["dispersion.csv", "dispersion_spectra.csv", "dispersion.svg"]),
    ("two-particle", ["two_particle_spectrum.csv", "two_particle_markers.csv",
                      "two_particle_exact_gaps.csv", "two_particle_m2a.svg", "two_particle_m2b.svg"]),
])
def test_subcommands_write_tables_and_figures(tmp_path, command, outputs):
    out = tmp_path / "out"
    assert main([command, "--config", str(write(tmp_path, SMALL)), "--out", str(out)]) == 0
    for name in outputs:
        assert (out / name).stat().st_size > 0
    header = read(out / outputs[0])[0]
    assert all("[" in h for h in header if h not in ("quantity", "value", "rank", "marker",
                                                      "interpolated", "signal", "k", "i", "mode", "ion"))


def test_absolute_subcommand(tmp_path):
    doc = {**SMALL, "modes": 5}
    assert main(["absolute", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "absolute_peaks.csv")
    assert rows[0] == ["rank", "frequency [Hz]", "amplitude [s]", "interpolated"]
    assert float(rows[1][1]) < 0


def test_ion_chain_subcommand(tmp_path):
    assert main(["ion-chain", "--config", str(CONFIGS / "trap_n7.json"), "--out", str(tmp_path)]) == 0
    fit = dict(read(tmp_path / "fit.csv")[1:])
    assert float(fit["alpha [dimensionless]"]) == pytest.approx(1.1, abs=1e-4)
    assert len(read(tmp_path / "coupling.csv")) == 8


def test_plot_subcommand(tmp_path):
    main(["beatnote", "--config", str(write(tmp_path, SMALL)), "--out", str(tmp_path)])
    assert main(["plot", str(tmp_path / "beatnote_spectrum.csv"), "--kind", "spectrum",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "beatnote_spectrum_spectrum.svg").exists()
    assert main(["plot", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_usage_and_config_errors_exit_2(tmp_path, capsys):
    assert main(["modes", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write(tmp_path, {**SMALL, "colour": "blue"})
    assert main(["beatnote", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "colour" in capsys.readouterr().err
    assert main(["ion-chain", "--config", str(write(tmp_path, SMALL)), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_numerical_failure_exits_3(tmp_path):
    doc = json.loads((CONFIGS / "trap_n7.json").read_text())
    doc["model"]["trap"]["axial_freq_hz"] = 1.0e6
    assert main(["ion-chain", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == 3


def test_reruns_are_byte_identical(tmp_path):
    doc = {**SMALL, "sampling": {"mode": "shots", "shots": 300, "seed": 9}}
    cfg = write(tmp_path, doc)
    for name in ("a", "b"):
        assert main(["beatnote", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


@pytest.mark.skipif(shutil.which("ionspec") is None, reason="console script not installed")
def test_console_script(tmp_path):
    import subprocess

    r = subprocess.run(["ionspec", "modes", "--config", str(write(tmp_path, SMALL)), "--out", str(tmp_path)],
                       capture_output=True)
    assert r.returncode == 0
