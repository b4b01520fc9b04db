"""Windowing, real cosine transform, and cochlear filterbank construction.

These primitives are shared by every downstream stage: long analysis
windows are cut from the signal, transformed with an orthonormal DCT-II,
and weighted with overlapping Bark-spaced cochlear bumps to isolate the
temporal envelope of individual frequency sub-bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, idct

__all__ = [
    "AudioBuffer",
    "AnalysisConfig",
    "CochlearFilterbank",
    "hann_window",
    "frame_signal",
    "frame_starts",
    "cosine_transform",
    "inverse_cosine_transform",
    "hz_to_bark",
    "bark_to_hz",
    "design_filterbank",
]


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sample sequence with its sample rate.

    samples are dimensionless amplitudes, nominally in [-1, 1) when read
    from PCM data; any finite values are accepted.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be a positive integer")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the sub-band envelope analysis.

    The defaults follow the standard operating point: 1.5 s Hanning
    windows hopped every 10 ms (100 Hz frame rate), all-pole model order
    80, and 80 modulation coefficients per band at 1/window_len_s Hz
    spacing.

    Extra fields beyond the headline parameters control numerical
    behaviour: `band_energy_floor` is the relative weighted-band energy
    below which a band is flagged degenerate, `autocorr_reg` is a white
    floor applied to the zero lag before the recursion, `window_guard`
    bounds the taper compensation of the analysis window, and
    `env_points_per_frame` sets the envelope grid density (grid length =
    frames per window times this).
    """

    window_len_s: float = 1.5
    hop_s: float = 0.01
    model_order: int = 80
    n_mod_coeffs: int = 80
    n_bands: int = 20
    bark_width: float = 2.5
    env_points_per_frame: int = 8
    band_energy_floor: float = 1e-10
    autocorr_reg: float = 1e-9
    window_guard: float = 1e-8
    cepstrum_terms: int | None = None
    remove_dc: bool = False

    def __post_init__(self):
        if self.window_len_s <= 0 or self.hop_s <= 0:
            raise ValueError("window_len_s and hop_s must be positive")
        if self.model_order < 1 or self.n_mod_coeffs < 1 or self.n_bands < 1:
            raise ValueError("model_order, n_mod_coeffs and n_bands must be >= 1")
        if self.n_mod_coeffs > self.model_order:
            raise ValueError("n_mod_coeffs must not exceed model_order")
        if self.env_points_per_frame < 2:
            raise ValueError("env_points_per_frame must be >= 2")

    def validate_for_rate(self, sample_rate: int) -> None:
        if self.window_samples(sample_rate) < 2 * self.model_order:
            raise ValueError(
                "window of %.3g s at %d Hz is too short for model order %d"
                % (self.window_len_s, sample_rate, self.model_order)
            )

    def window_samples(self, sample_rate: int) -> int:
        return int(round(self.window_len_s * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop_s * sample_rate)))

    @property
    def frame_rate_hz(self) -> float:
        return 1.0 / self.hop_s

    @property
    def frames_per_window(self) -> int:
        return max(1, int(round(self.window_len_s * self.frame_rate_hz)))

    @property
    def env_grid_points(self) -> int:
        return self.frames_per_window * self.env_points_per_frame

    @property
    def resolution_hz(self) -> float:
        return 1.0 / self.window_len_s


@dataclass(frozen=True)
class CochlearFilterbank:
    """Per-band nonnegative weights over frequency-coefficient indices."""

    band_weights: np.ndarray  # (n_bands, n_coeffs)
    band_edges: np.ndarray    # (n_bands, 2) in Hz
    center_freqs_hz: np.ndarray
    sample_rate: int

    def __post_init__(self):
        w = np.asarray(self.band_weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("band_weights must be 2-D (n_bands, n_coeffs)")
        if np.any(w < 0):
            raise ValueError("band weights must be nonnegative")
        if np.any(w.max(axis=1) <= 0.5):
            raise ValueError("every band needs at least one weight above 0.5")
        centers = np.asarray(self.center_freqs_hz, dtype=np.float64)
        if np.any(np.diff(centers) <= 0):
            raise ValueError("band center frequencies must be strictly increasing")
        object.__setattr__(self, "band_weights", w)
        object.__setattr__(self, "center_freqs_hz", centers)
        object.__setattr__(self, "band_edges", np.asarray(self.band_edges, dtype=np.float64))

    @property
    def n_bands(self) -> int:
        return self.band_weights.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.band_weights.shape[1]


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hanning window w[i] = 0.5 - 0.5 cos(2 pi i / (n - 1)).

    Endpoints are exactly zero; for odd n the center sample is exactly 1.
    """
    if n < 2:
        raise ValueError("hann_window needs n >= 2")
    i = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * i / (n - 1))


def frame_starts(n_samples: int, cfg: AnalysisConfig, sample_rate: int) -> np.ndarray:
    """Start offsets (in samples) of the analysis windows for a signal.

    Windows begin at multiples of the hop. A signal shorter than one
    window yields a single zero-padded window; otherwise the last window
    is placed so the signal tail is covered, zero-padding the remainder.
    """
    win = cfg.window_samples(sample_rate)
    hop = cfg.hop_samples(sample_rate)
    if n_samples <= win:
        return np.array([0], dtype=np.int64)
    n = int(math.ceil((n_samples - win) / hop)) + 1
    return np.arange(n, dtype=np.int64) * hop


def frame_signal(audio: AudioBuffer, cfg: AnalysisConfig) -> np.ndarray:
    """Cut the signal into Hanning-windowed analysis frames.

    Returns an (n_frames, window_samples) array. Trailing partial frames
    are zero-padded before windowing so the frame count depends only on
    the duration.
    """
    cfg.validate_for_rate(audio.sample_rate)
    x = audio.samples
    if cfg.remove_dc:
        x = x - x.mean()
    win = cfg.window_samples(audio.sample_rate)
    starts = frame_starts(x.size, cfg, audio.sample_rate)
    w = hann_window(win)
    frames = np.zeros((starts.size, win))
    for i, s in enumerate(starts):
        chunk = x[s:s + win]
        frames[i, : chunk.size] = chunk
    frames *= w
    return frames


def cosine_transform(frame: np.ndarray) -> np.ndarray:
    """Orthonormal type-II cosine transform of a real vector."""
    frame = np.asarray(frame, dtype=np.float64)
    if not np.all(np.isfinite(frame)):
        raise ValueError("frame contains non-finite values")
    return dct(frame, type=2, norm="ortho")


def inverse_cosine_transform(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`cosine_transform` (orthonormal DCT-III)."""
    return idct(np.asarray(coeffs, dtype=np.float64), type=2, norm="ortho")


def hz_to_bark(freq_hz):
    """Critical-band rate: z = 6 asinh(f / 600)."""
    return 6.0 * np.arcsinh(np.asarray(freq_hz, dtype=np.float64) / 600.0)


def bark_to_hz(z):
    return 600.0 * np.sinh(np.asarray(z, dtype=np.float64) / 6.0)


def design_filterbank(
    n_bands: int,
    n_coeffs: int,
    sample_rate: int,
    width_bark: float = 2.5,
) -> CochlearFilterbank:
    """Cochlear-style filterbank over cosine-transform coefficient indices.

    Band centers are equally spaced on the Bark scale strictly between
    0 Hz and the Nyquist frequency. Each band is a raised-cosine bump of
    unit peak. The bump width is `width_bark` (2.5 Bark by default, which
    at 20 bands over an 8 kHz Nyquist gives roughly 63% overlap), widened
    to twice the center spacing when few bands must cover the range so no
    spectral holes open up.

    Coefficient index k of an n-point transform maps to the frequency
    k * sample_rate / (2 n).
    """
    if n_bands < 1:
        raise ValueError("n_bands must be >= 1")
    if n_coeffs <= 2 * n_bands:
        raise ValueError(
            "n_coeffs=%d is too small for %d bands" % (n_coeffs, n_bands)
        )
    z_max = float(hz_to_bark(sample_rate / 2.0))
    dz = z_max / (n_bands + 1)
    centers_z = (np.arange(n_bands) + 1.0) * dz
    wz = max(float(width_bark), 2.0 * dz)

    freqs = np.arange(n_coeffs) * (sample_rate / (2.0 * n_coeffs))
    z = hz_to_bark(freqs)
    weights = np.zeros((n_bands, n_coeffs))
    edges = np.zeros((n_bands, 2))
    for b in range(n_bands):
        x = (z - centers_z[b]) / wz
        inside = np.abs(x) < 0.5
        weights[b, inside] = 0.5 + 0.5 * np.cos(2.0 * np.pi * x[inside])
        lo = bark_to_hz(max(centers_z[b] - wz / 2.0, 0.0))
        hi = min(bark_to_hz(centers_z[b] + wz / 2.0), sample_rate / 2.0)
        edges[b] = (lo, hi)
    return CochlearFilterbank(
        band_weights=weights,
        band_edges=edges,
        center_freqs_hz=bark_to_hz(centers_z),
        sample_rate=int(sample_rate),
    )
