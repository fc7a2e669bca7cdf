"""Signal sums, mirroring, Fourier spectra and peak extraction.

Frequencies are in Hz. The transform uses the numpy sign convention, so
``exp(-i w t)`` shows up at ``-w / 2 pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled values; axis 0 of ``values`` is time."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "values", np.asarray(self.values))

    @classmethod
    def from_times(cls, times, values) -> "TimeSeries":
        times = np.asarray(times, dtype=float)
        if times.size < 2:
            raise ValueError("need at least two samples to define a time step")
        dt = (times[-1] - times[0]) / (times.size - 1)
        if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0):
            raise ValueError("time grid is not uniform")
        return cls(float(times[0]), float(dt), values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    amplitudes: np.ndarray
    resolution: float

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def positive(self) -> "Spectrum":
        """Non-negative frequencies only (for real signals)."""
        sel = self.freqs >= 0
        return Spectrum(self.freqs[sel], self.amplitudes[sel], self.resolution)


@dataclass(frozen=True)
class Peak:
    frequency: float
    amplitude: float
    interpolated: bool


@dataclass(frozen=True)
class PeakList:
    peaks: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, i) -> Peak:
        return self.peaks[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])

    def dominance(self) -> float:
        """Ratio of the largest to the second largest peak (inf for a single peak)."""
        if not self.peaks:
            return 0.0
        if len(self.peaks) == 1:
            return np.inf
        return self.peaks[0].amplitude / self.peaks[1].amplitude


def _amplitude_matrix(modes) -> np.ndarray:
    return np.asarray(getattr(modes, "amplitudes", modes), dtype=float)


def _per_site(series: TimeSeries, name: str) -> np.ndarray:
    v = np.asarray(series.values)
    if v.ndim != 2:
        raise ValueError(f"{name} must hold per-site data of shape (n_times, N)")
    return v


def signal_complex_xy(sx: TimeSeries, sy: TimeSeries, weights) -> TimeSeries:
    """``sum_j w_j (<x~_j> + i <y~_j>)``."""
    if sx.t0 != sy.t0 or sx.dt != sy.dt or len(sx) != len(sy):
        raise ValueError("x and y series are on different time grids")
    x, y = _per_site(sx, "sx"), _per_site(sy, "sy")
    w = np.asarray(weights, dtype=float)
    return TimeSeries(sx.t0, sx.dt, (x + 1j * y) @ w)


def m1_weights(modes, k: int, k2: int) -> np.ndarray:
    if k == k2:
        raise ValueError("M1 needs two distinct modes")
    a = _amplitude_matrix(modes)
    return np.sign(a[:, k - 1] * a[:, k2 - 1])


def signal_m1(sz: TimeSeries, modes, k: int, k2: int) -> TimeSeries:
    """``sum_j sign(A_j^k A_j^k2) <Pi_1 sigma^z_j Pi_1>``."""
    w = m1_weights(modes, k, k2)
    return TimeSeries(sz.t0, sz.dt, _per_site(sz, "sz") @ w)


def m2_weights(modes, k: int, k2: int, variant: str = "a") -> np.ndarray:
    """Pair weights ``c_ij`` (symmetric, zero diagonal).

    ``a``: sign(A_i^k A_j^k A_i^k2 A_j^k2).
    ``b``: sign(A_i^k A_j^k2) + sign(A_i^k2 A_j^k).
    ``b_printed``: 2 sign(A_i^k A_j^k2), the repeated-term form.
    """
    if k == k2:
        raise ValueError("M2 needs two distinct modes")
    a = _amplitude_matrix(modes)
    u, v = a[:, k - 1], a[:, k2 - 1]
    if variant == "a":
        c = np.sign(np.outer(u * v, u * v))
    elif variant == "b":
        c = np.sign(np.outer(u, v)) + np.sign(np.outer(v, u))
    elif variant == "b_printed":
        c = 2.0 * np.sign(np.outer(u, v))
        # Symmetrize from the i < j entries; only those enter the sum.
        c = np.triu(c, 1) + np.triu(c, 1).T
    else:
        raise ValueError(f"unknown M2 variant {variant!r}")
    np.fill_diagonal(c, 0.0)
    return c


def signal_m2(p: TimeSeries, modes, k: int, k2: int, variant: str = "a") -> TimeSeries:
    """``sum_{i<j} c_ij <Pi_2 P_ij Pi_2>`` from pair-projector data of shape (n_times, N, N)."""
    vals = np.asarray(p.values)
    if vals.ndim != 3:
        raise ValueError("pair data must have shape (n_times, N, N)")
    c = np.triu(m2_weights(modes, k, k2, variant), 1)
    return TimeSeries(p.t0, p.dt, np.einsum("tij,ij->t", vals, c))


def mirror_extend(s: TimeSeries) -> TimeSeries:
    """Hermitian extension to negative times: ``s(-t) = conj(s(t))``, length ``2n - 1``."""
    if abs(s.t0) > 1e-12 * s.dt:
        raise ValueError("mirroring needs a series starting at t = 0")
    v = np.asarray(s.values)
    ext = np.concatenate([np.conj(v[:0:-1]), v])
    return TimeSeries(-(len(v) - 1) * s.dt, s.dt, ext)


def fourier_spectrum(s: TimeSeries, zero_pad_factor: int = 8, window: str = "none") -> Spectrum:
    """``dt * |DFT|`` on a zero-padded grid, frequencies ascending and two-sided.

    With ``window='none'`` Parseval holds: ``sum |s|^2 dt == sum |S|^2 df``.
    """
    v = np.asarray(s.values)
    n = len(v)
    if n < 8:
        raise ValueError(f"need at least 8 samples, got {n}")
    if zero_pad_factor < 1:
        raise ValueError("zero_pad_factor must be >= 1")
    if window == "hann":
        v = v * np.hanning(n + 2)[1:-1]
    elif window != "none":
        raise ValueError(f"unknown window {window!r}")
    n_fft = n * int(zero_pad_factor)
    amp = s.dt * np.abs(np.fft.fftshift(np.fft.fft(v, n_fft)))
    freqs = np.fft.fftshift(np.fft.fftfreq(n_fft, s.dt))
    return Spectrum(freqs, amp, 1.0 / (n * s.dt))


def find_peaks(sp: Spectrum, threshold: float = 0.1, min_sep: float | None = None) -> PeakList:
    """Strict local maxima above ``threshold * max``, refined by a log-parabola.

    ``min_sep`` (Hz) defaults to two bins; weaker peaks closer than that to a
    stronger one are dropped. Peaks come back sorted by amplitude.
    """
    a = np.asarray(sp.amplitudes, dtype=float)
    if a.size < 3 or not np.any(a > 0):
        return PeakList([])
    df = sp.bin_width
    min_sep = 2.0 * df if min_sep is None else min_sep
    floor = threshold * a.max()
    inner = np.arange(1, a.size - 1)
    is_max = (a[inner] > a[inner - 1]) & (a[inner] > a[inner + 1]) & (a[inner] >= floor)
    candidates = []
    for i in inner[is_max]:
        y0, y1, y2 = a[i - 1], a[i], a[i + 1]
        if y0 > 0 and y2 > 0:
            l0, l1, l2 = np.log(y0), np.log(y1), np.log(y2)
            denom = l0 - 2 * l1 + l2
            offset = 0.5 * (l0 - l2) / denom if denom < 0 else 0.0
            offset = float(np.clip(offset, -0.5, 0.5))
            height = float(np.exp(l1 - 0.25 * (l0 - l2) * offset))
            candidates.append(Peak(float(sp.freqs[i] + offset * df), height, True))
        else:
            candidates.append(Peak(float(sp.freqs[i]), float(y1), False))
    candidates.sort(key=lambda p: -p.amplitude)
    kept: list[Peak] = []
    for p in candidates:
        if all(abs(p.frequency - q.frequency) >= min_sep for q in kept):
            kept.append(p)
    return PeakList(kept)


def analyze(s: TimeSeries, zero_pad: int = 8, window: str = "none", mirror: bool = True,
            remove_mean: bool = True, one_sided: bool | None = None) -> Spectrum:
    """Mirror, remove the mean, transform; real signals keep only f >= 0 by default."""
    if mirror:
        s = mirror_extend(s)
    v = np.asarray(s.values)
    if remove_mean:
        s = TimeSeries(s.t0, s.dt, v - v.mean())
    sp = fourier_spectrum(s, zero_pad, window)
    if one_sided is None:
        one_sided = not np.iscomplexobj(v)
    return sp.positive() if one_sided else sp
