"""``ionspec <subcommand> --config run.json --out dir``

Every run writes comma-separated tables (units in the header row) and SVG
figures next to them. Exit codes: 0 success, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .config import TWO_PI, ConfigError, TrapModel, load_config
from .ion_chain import (
    ConvergenceError,
    InstabilityError,
    ResonanceError,
    coupling_from_sidebands,
    fit_power_law,
    transverse_modes,
)
from .pipelines import (
    build_model,
    pipeline_absolute,
    pipeline_beatnote,
    pipeline_dispersion,
    pipeline_two_particle,
    trap_config,
)
from .quasiparticles import sign_changes
from .spectroscopy import Spectrum, find_peaks

log = logging.getLogger("ionspec")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.11e}"


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _spectrum_rows(sp: Spectrum, *more: Spectrum):
    cols = [sp.freqs, sp.amplitudes] + [s.amplitudes for s in more]
    return zip(*cols)


def _peak_rows(peaks):
    return [(i + 1, p.frequency, p.amplitude, p.interpolated) for i, p in enumerate(peaks)]


PEAK_HEADER = ["rank", "frequency [Hz]", "amplitude [s]", "interpolated"]


def cmd_modes(cfg, out: Path):
    model = build_model(cfg)
    m = model.modes
    n = m.n_spins
    header = ["k", "eps [Hz]", "E [Hz]", "nodes [dimensionless]"] + [f"A_{j} [dimensionless]" for j in range(1, n + 1)]
    rows = []
    for k in range(1, n + 1):
        a = m.mode(k)
        rows.append([k, m.eps(k) / TWO_PI, m.gap(k) / TWO_PI, sign_changes(a)] + list(a))
    write_csv(out / "modes.csv", header, rows)
    plotting.plot_modes(out / "modes.svg", np.asarray(m.amplitudes))
    return [out / "modes.csv", out / "modes.svg"]


def cmd_absolute(cfg, out: Path):
    res = pipeline_absolute(cfg)
    v = res.signal.values
    write_csv(out / "absolute_series.csv",
              ["time [s]", "M_x [dimensionless]", "M_y [dimensionless]"],
              zip(res.times, v.real, v.imag))
    write_csv(out / "absolute_spectrum.csv", ["frequency [Hz]", "amplitude [s]"],
              _spectrum_rows(res.spectrum))
    write_csv(out / "absolute_peaks.csv", PEAK_HEADER, _peak_rows(res.peaks))
    write_csv(out / "absolute_summary.csv", ["quantity", "value"],
              [("expected eps_k [Hz]", res.expected_hz), ("bin width [Hz]", res.spectrum.bin_width)]
              + [(f"p_{n} [dimensionless]", p) for n, p in enumerate(res.sector_probs)])
    plotting.plot_series(out / "absolute_series.svg", res.times,
                         {"M_x": v.real, "M_y": v.imag})
    plotting.plot_spectrum(out / "absolute_spectrum.svg", res.spectrum.freqs,
                           {"|FT(M_x + i M_y)|": res.spectrum.amplitudes},
                           [(p.frequency, p.amplitude) for p in res.peaks],
                           {"eps_k/h": res.expected_hz})
    if len(res.peaks):
        log.info("dominant peak %.6g Hz (expected %.6g Hz)", res.peaks[0].frequency, res.expected_hz)


def cmd_beatnote(cfg, out: Path):
    res = pipeline_beatnote(cfg)
    n = res.site_z.shape[1]
    write_csv(out / "beatnote_series.csv",
              ["time [s]", "M1 [dimensionless]"] + [f"sz_{j} [dimensionless]" for j in range(1, n + 1)],
              ([t, m] + list(z) for t, m, z in zip(res.times, res.signal.values, res.site_z)))
    write_csv(out / "beatnote_spectrum.csv", ["frequency [Hz]", "amplitude [s]"],
              _spectrum_rows(res.spectrum))
    write_csv(out / "beatnote_peaks.csv", PEAK_HEADER, _peak_rows(res.peaks))
    write_csv(out / "beatnote_summary.csv", ["quantity", "value"],
              [("expected |dE| [Hz]", res.expected_hz), ("bin width [Hz]", res.spectrum.bin_width)]
              + [(f"p_{k} [dimensionless]", p) for k, p in enumerate(res.sector_probs)])
    plotting.plot_series(out / "beatnote_series.svg", res.times, {"M1": res.signal.values})
    plotting.plot_spectrum(out / "beatnote_spectrum.svg", res.spectrum.freqs,
                           {"|FT(M1)|": res.spectrum.amplitudes},
                           [(p.frequency, p.amplitude) for p in res.peaks],
                           {"|dE|/h": res.expected_hz})


def cmd_dispersion(cfg, out: Path):
    res = pipeline_dispersion(cfg)
    write_csv(out / "dispersion.csv",
              ["k", "measured [Hz]", "exact [Hz]", "dominance [dimensionless]"],
              [(r.k, r.measured_hz, r.exact_hz, r.dominance) for r in res.rows])
    ks = sorted(res.spectra)
    first = res.spectra[ks[0]]
    write_csv(out / "dispersion_spectra.csv",
              ["frequency [Hz]"] + [f"amplitude k'={k} [s]" for k in ks],
              zip(first.freqs, *(res.spectra[k].amplitudes for k in ks)))
    plotting.plot_dispersion(out / "dispersion.svg", [r.k for r in res.rows],
                             [r.measured_hz for r in res.rows], [r.exact_hz for r in res.rows])


def cmd_two_particle(cfg, out: Path):
    res = pipeline_two_particle(cfg)
    write_csv(out / "two_particle_spectrum.csv",
              ["frequency [Hz]", "amplitude M2a [s]", "amplitude M2b [s]"],
              _spectrum_rows(res.spectrum_a, res.spectrum_b))
    write_csv(out / "two_particle_markers.csv", ["marker", "frequency [Hz]"],
              sorted(res.markers.items()))
    write_csv(out / "two_particle_peaks.csv", ["signal"] + PEAK_HEADER,
              [("M2a",) + r for r in _peak_rows(res.peaks_a)]
              + [("M2b",) + r for r in _peak_rows(res.peaks_b)])
    write_csv(out / "two_particle_exact_gaps.csv", ["gap [Hz]", "overlap weight [dimensionless]"],
              zip(res.exact_gaps_hz, res.gap_weights))
    for name, sp, pk in (("a", res.spectrum_a, res.peaks_a), ("b", res.spectrum_b, res.peaks_b)):
        plotting.plot_spectrum(out / f"two_particle_m2{name}.svg", sp.freqs,
                               {f"|FT(M2{name})|": sp.amplitudes},
                               [(p.frequency, p.amplitude) for p in pk], res.markers)


def cmd_ion_chain(cfg, out: Path):
    if not isinstance(cfg.model, TrapModel):
        raise ConfigError("'model' must be 'trap' for the ion-chain subcommand")
    trap = trap_config(cfg)
    modes = transverse_modes(trap)
    c = coupling_from_sidebands(trap, modes)
    j0, alpha = fit_power_law(c) if c.n_spins >= 3 else (c.j_max, float("nan"))
    n = trap.n_ions
    write_csv(out / "ion_positions.csv", ["ion", "position [dimensionless]"],
              zip(range(1, n + 1), modes.positions))
    write_csv(out / "ion_modes.csv",
              ["mode", "frequency [Hz]"] + [f"b_{j} [dimensionless]" for j in range(1, n + 1)]
              + [f"eta_{j} [dimensionless]" for j in range(1, n + 1)],
              ([m + 1, modes.frequencies[m] / TWO_PI] + list(modes.vectors[:, m]) + list(modes.lamb_dicke[:, m])
               for m in range(n)))
    write_csv(out / "coupling.csv", ["i"] + [f"J_i{k} [Hz]" for k in range(1, n + 1)],
              ([i + 1] + list(c.j[i] / TWO_PI) for i in range(n)))
    write_csv(out / "fit.csv", ["quantity", "value"],
              [("j0 [Hz]", j0 / TWO_PI), ("alpha [dimensionless]", alpha),
               ("detuning [Hz]", trap.detuning / TWO_PI)])
    if n >= 2:
        i, k = np.triu_indices(n, 1)
        plotting.plot_series(out / "coupling.svg", k - i, {"|J_ik|": np.abs(c.j[i, k]) / TWO_PI},
                             xlabel="|i - k|", ylabel="|J_ik| [Hz]")


PLOT_KINDS = ("series", "spectrum", "dispersion")


def cmd_plot(csv_path: Path, kind: str, out: Path) -> Path:
    if not csv_path.is_file():
        raise ConfigError(f"no such file: {csv_path}")
    with open(csv_path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ConfigError(f"{csv_path} is empty")
    try:
        data = np.atleast_2d(np.loadtxt(csv_path, delimiter=",", skiprows=1))
    except ValueError as exc:
        raise ConfigError(f"{csv_path}: non-numeric data ({exc})") from exc
    if data.shape[1] < 2:
        raise ConfigError(f"{csv_path} needs at least two columns")
    target = out / f"{csv_path.stem}_{kind}.svg"
    cols = {h: data[:, i] for i, h in enumerate(header) if i > 0}
    if kind == "series":
        plotting.plot_series(target, data[:, 0], cols, xlabel=header[0])
    elif kind == "spectrum":
        sp = Spectrum(data[:, 0], data[:, 1], 0.0)
        peaks = find_peaks(sp, 0.1)
        plotting.plot_spectrum(target, data[:, 0], cols, [(p.frequency, p.amplitude) for p in peaks],
                               xlabel=header[0])
    else:
        if data.shape[1] < 3:
            raise ConfigError("dispersion plot needs columns k, measured, exact")
        plotting.plot_dispersion(target, data[:, 0], data[:, 1], data[:, 2])
    return target


COMMANDS = {
    "modes": cmd_modes,
    "absolute": cmd_absolute,
    "beatnote": cmd_beatnote,
    "dispersion": cmd_dispersion,
    "two-particle": cmd_two_particle,
    "ion-chain": cmd_ion_chain,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionspec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON experiment config")
        p.add_argument("--out", default=Path("."), type=Path, help="output directory")
    p = sub.add_parser("plot", help="render a CSV written by another subcommand")
    p.add_argument("csv", type=Path)
    p.add_argument("--kind", choices=PLOT_KINDS, default="spectrum")
    p.add_argument("--out", default=Path("."), type=Path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "plot":
            cmd_plot(args.csv, args.kind, args.out)
        else:
            COMMANDS[args.command](load_config(args.config), args.out)
    except (InstabilityError, ResonanceError, ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"ionspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"ionspec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
