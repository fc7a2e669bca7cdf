"""End-to-end spectroscopy runs: prepare, evolve, measure, transform, compare."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from .config import TWO_PI, ConfigError, ExperimentConfig, PowerLawModel
from .ion_chain import TrapConfig, coupling_from_sidebands, transverse_modes, tune_detuning
from .lattice import CouplingMatrix, build_xy_blocks, power_law_couplings
from .quasiparticles import (
    ModeSet,
    beat_frequencies,
    diagonalize_single_excitation,
    nib_nif_predictions,
    sine_mode_matrix,
)
from .spectroscopy import (
    PeakList,
    Spectrum,
    TimeSeries,
    analyze,
    find_peaks,
    signal_complex_xy,
    signal_m1,
    signal_m2,
)


@dataclass(frozen=True)
class Model:
    coupling: CouplingMatrix
    b_field: float
    modes: ModeSet
    ansatz: np.ndarray
    detuning: float | None = None

    @property
    def n_spins(self) -> int:
        return self.coupling.n_spins


def trap_config(cfg: ExperimentConfig) -> TrapConfig:
    t = cfg.model
    trap = TrapConfig(t.n_ions, TWO_PI * t.axial_freq_hz, TWO_PI * t.transverse_freq_hz,
                      TWO_PI * np.asarray(t.rabi_hz), t.lamb_dicke,
                      TWO_PI * (t.detuning_hz or 1.0), t.mass_scaling)
    if t.detuning_hz is None:
        delta = tune_detuning(trap, t.target_alpha)
        trap = TrapConfig(trap.n_ions, trap.axial_freq, trap.transverse_freq, trap.rabi,
                          trap.lamb_dicke, delta, trap.mass_scaling)
    return trap


def build_model(cfg: ExperimentConfig) -> Model:
    detuning = None
    if isinstance(cfg.model, PowerLawModel):
        c = power_law_couplings(cfg.model.n, TWO_PI * cfg.model.j0_hz, cfg.model.alpha)
    else:
        trap = trap_config(cfg)
        c = coupling_from_sidebands(trap, transverse_modes(trap))
        detuning = trap.detuning
    b = cfg.b_over_j * c.j_max
    modes = diagonalize_single_excitation(c, b)
    ansatz = sine_mode_matrix(c.n_spins) if cfg.ansatz == "sine" else np.array(modes.amplitudes)
    return Model(c, b, modes, ansatz, detuning)


def time_grid(cfg: ExperimentConfig, model: Model) -> np.ndarray:
    t_max = cfg.t_max if cfg.t_max is not None else cfg.t_j / model.coupling.j_max
    return np.linspace(0.0, t_max, cfg.n_samples)


def _measured_probs(cfg: ExperimentConfig, traj: dyn.Trajectory, salt: int = 0) -> np.ndarray:
    probs = traj.probabilities()
    if cfg.sampling.mode == "shots":
        probs = dyn.sample_probabilities(probs, cfg.sampling.shots, cfg.sampling.seed + salt)
    return probs


def _spectrum(cfg: ExperimentConfig, s: TimeSeries) -> tuple[Spectrum, PeakList]:
    a = cfg.analysis
    sp = analyze(s, a.zero_pad, a.window, mirror=a.mirror)
    return sp, find_peaks(sp, a.threshold, a.min_sep_hz)


def _pair(cfg: ExperimentConfig) -> tuple[int, int]:
    if len(cfg.modes) != 2 or cfg.modes[0] == cfg.modes[1]:
        raise ConfigError("'modes' must be a pair of distinct modes [k, k'] for this measurement")
    return cfg.modes


def _single(cfg: ExperimentConfig) -> int:
    if len(cfg.modes) != 1:
        raise ConfigError("'modes' must be a single mode index for absolute spectroscopy")
    return cfg.modes[0]


@dataclass
class AbsoluteResult:
    times: np.ndarray
    signal: TimeSeries
    spectrum: Spectrum
    peaks: PeakList
    expected_hz: float
    sector_probs: np.ndarray


def pipeline_absolute(cfg: ExperimentConfig, model: Model | None = None) -> AbsoluteResult:
    """``|0> + gamma |k>``: transverse signal in the rotating frame peaks at ``eps_k / 2 pi``."""
    model = model or build_model(cfg)
    k = _single(cfg)
    weights = model.ansatz[:, k - 1]
    prep = dyn.build_product_state(dyn.prep_angles_single(cfg.gamma, weights))
    times = time_grid(cfg, model)
    traj = dyn.evolve(prep.state, build_xy_blocks(model.coupling, model.b_field), times)
    xy = dyn.transverse_expectations(traj, dyn.RotatingFrame(model.b_field, cfg.frame_convention))
    if cfg.sampling.mode == "shots":
        xy = _sample_transverse(xy, cfg.sampling.shots, cfg.sampling.seed)
    signal = signal_complex_xy(TimeSeries.from_times(times, xy.real),
                               TimeSeries.from_times(times, xy.imag), weights)
    sp, peaks = _spectrum(cfg, signal)
    return AbsoluteResult(times, signal, sp, peaks, model.modes.eps(k) / TWO_PI, prep.sector_probs)


def _sample_transverse(xy: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Per-site +/-1 outcomes for the x~ and y~ measurements, ``shots`` each."""
    out = np.empty_like(xy)
    for t, row in enumerate(xy):
        rng_x, rng_y = dyn.derive_rng(seed, 2 * t), dyn.derive_rng(seed, 2 * t + 1)
        px = np.clip((1 + row.real) / 2, 0, 1)
        py = np.clip((1 + row.imag) / 2, 0, 1)
        out[t] = (2 * rng_x.binomial(shots, px) / shots - 1) + 1j * (2 * rng_y.binomial(shots, py) / shots - 1)
    return out


@dataclass
class BeatnoteResult:
    times: np.ndarray
    site_z: np.ndarray
    signal: TimeSeries
    spectrum: Spectrum
    peaks: PeakList
    expected_hz: float
    sector_probs: np.ndarray


def pipeline_beatnote(cfg: ExperimentConfig, model: Model | None = None,
                      pair: tuple[int, int] | None = None, salt: int = 0) -> BeatnoteResult:
    """``|k> + |k'>`` post-selected on one excitation; M1 beats at ``|eps_k - eps_k'| / 2 pi``."""
    model = model or build_model(cfg)
    k, kk = _pair(cfg) if pair is None else pair
    a = model.ansatz
    prep = dyn.build_product_state(dyn.prep_angles_pair(cfg.gamma, a[:, k - 1], a[:, kk - 1]))
    times = time_grid(cfg, model)
    sectors = range(model.n_spins + 1)
    traj = dyn.evolve(prep.state, build_xy_blocks(model.coupling, model.b_field, sectors), times)
    sz = dyn.sigma_z_expectations(_measured_probs(cfg, traj, salt), model.n_spins, sector=1)
    signal = signal_m1(TimeSeries.from_times(times, sz), a, k, kk)
    sp, peaks = _spectrum(cfg, signal)
    expected = abs(model.modes.eps(k) - model.modes.eps(kk)) / TWO_PI
    return BeatnoteResult(times, sz, signal, sp, peaks, expected, prep.sector_probs)


@dataclass
class DispersionRow:
    k: int
    measured_hz: float
    exact_hz: float
    dominance: float


@dataclass
class DispersionResult:
    rows: list
    spectra: dict = field(default_factory=dict)
    bin_width: float = 0.0


def pipeline_dispersion(cfg: ExperimentConfig, model: Model | None = None) -> DispersionResult:
    """Beat notes of mode 1 against every ``k' = 2..N``."""
    model = model or build_model(cfg)
    rows, spectra, bw = [], {}, 0.0
    for kk in range(2, model.n_spins + 1):
        res = pipeline_beatnote(cfg, model, pair=(1, kk), salt=1000 * kk)
        spectra[kk] = res.spectrum
        bw = res.spectrum.bin_width
        measured = res.peaks[0].frequency if len(res.peaks) else float("nan")
        rows.append(DispersionRow(kk, measured, res.expected_hz, res.peaks.dominance()))
    return DispersionResult(rows, spectra, bw)


@dataclass
class TwoParticleResult:
    spectrum_a: Spectrum
    spectrum_b: Spectrum
    peaks_a: PeakList
    peaks_b: PeakList
    markers: dict
    exact_gaps_hz: np.ndarray
    gap_weights: np.ndarray
    reference: BeatnoteResult
    signal_a: TimeSeries
    signal_b: TimeSeries


def exact_two_excitation_gaps(model: Model, state: dyn.StateVector) -> tuple[np.ndarray, np.ndarray]:
    """All ``|E_a - E_b| / 2 pi`` in the n=2 block with the product of initial overlaps."""
    blk = build_xy_blocks(model.coupling, model.b_field, [2])[0]
    lam, vec = np.linalg.eigh(blk.matrix)
    w = np.abs(vec.T @ state.full[blk.basis.masks])
    i, j = np.triu_indices(len(lam), 1)
    gaps = np.abs(lam[i] - lam[j]) / TWO_PI
    weights = w[i] * w[j]
    order = np.argsort(gaps)
    return gaps[order], weights[order]


def pipeline_two_particle(cfg: ExperimentConfig, model: Model | None = None) -> TwoParticleResult:
    """Post-select two excitations and transform the M2a / M2b pair-projector sums."""
    model = model or build_model(cfg)
    k, kk = _pair(cfg)
    a = model.ansatz
    prep = dyn.build_product_state(dyn.prep_angles_pair(cfg.gamma, a[:, k - 1], a[:, kk - 1]))
    times = time_grid(cfg, model)
    traj = dyn.evolve(prep.state, build_xy_blocks(model.coupling, model.b_field), times)
    probs = _measured_probs(cfg, traj)
    n = model.n_spins
    pairs = TimeSeries.from_times(times, dyn.pair_projector_expectations(probs, n, sector=2))
    variant_b = "b" if cfg.m2b_form == "corrected" else "b_printed"
    sig_a = signal_m2(pairs, a, k, kk, "a")
    sig_b = signal_m2(pairs, a, k, kk, variant_b)
    sp_a, pk_a = _spectrum(cfg, sig_a)
    sp_b, pk_b = _spectrum(cfg, sig_b)

    sz = dyn.sigma_z_expectations(probs, n, sector=1)
    m1 = signal_m1(TimeSeries.from_times(times, sz), a, k, kk)
    sp1, pk1 = _spectrum(cfg, m1)
    reference = BeatnoteResult(times, sz, m1, sp1, pk1,
                               abs(model.modes.eps(k) - model.modes.eps(kk)) / TWO_PI,
                               prep.sector_probs)

    beats = beat_frequencies(k, kk, model.modes, a)
    markers = {"nu_a": beats.nu_a, "nu_b": beats.nu_b, "nu_c": beats.nu_c,
               "delta_e": reference.expected_hz}
    if {k, kk} == {1, n}:
        markers["f_nib"], markers["f_nif"] = nib_nif_predictions(model.modes, 1, n)
    gaps, weights = exact_two_excitation_gaps(model, prep.state)
    return TwoParticleResult(sp_a, sp_b, pk_a, pk_b, markers, gaps, weights, reference, sig_a, sig_b)
