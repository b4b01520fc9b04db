"""Discretization and plug-in mutual information between modulation
magnitudes and frame-wise labels.

Every (band, modulation-bin) pair is treated as an independent scalar
variable. Magnitudes are 1/f-compensated, binned into equal-width
histograms whose range comes from the global extremes of all available
data, and paired with the label of the frame at the window center.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .dsp import AnalysisConfig, AudioBuffer, CochlearFilterbank, frame_signal, frame_starts
from .errors import AlignmentError, DegenerateDistributionError
from .fdlp import compensate_magnitudes, frame_modulation_coeffs

__all__ = [
    "HistogramSpec",
    "LabelTrack",
    "JointHistogram",
    "MIMatrix",
    "global_extrema",
    "discretize",
    "discretize_array",
    "mutual_information",
    "entropy_bits",
    "mi_analysis",
    "corpus_modulation_magnitudes",
]


@dataclass(frozen=True)
class HistogramSpec:
    """Equal-width binning between fixed extremes (values are clamped)."""

    n_bins: int
    min: float
    max: float

    def __post_init__(self):
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if not self.min < self.max:
            raise ValueError("min must be strictly below max")


@dataclass(frozen=True)
class LabelTrack:
    """One class index per frame at a fixed frame rate."""

    labels: np.ndarray
    n_classes: int = 48
    frame_rate_hz: float = 100.0

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a nonempty 1-D sequence")
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ValueError("label outside [0, n_classes)")
        if not self.frame_rate_hz > 0:
            raise ValueError("frame rate must be positive")
        object.__setattr__(self, "labels", labels)

    @property
    def n_frames(self) -> int:
        return self.labels.size


@dataclass
class JointHistogram:
    """Count table over (value bin, class)."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError("counts must be 2-D (n_bins, n_classes)")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        self.counts = counts

    @classmethod
    def empty(cls, n_bins: int, n_classes: int) -> "JointHistogram":
        return cls(np.zeros((n_bins, n_classes), dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def add(self, value_bin: int, label: int, weight: int = 1) -> None:
        self.counts[value_bin, label] += weight

    def merge(self, other: "JointHistogram") -> "JointHistogram":
        return JointHistogram(self.counts + other.counts)


@dataclass(frozen=True)
class MIMatrix:
    """Mutual information in bits per (band, modulation bin)."""

    mi: np.ndarray
    band_centers_hz: np.ndarray
    mod_freqs_hz: np.ndarray

    def average_curve(self) -> np.ndarray:
        """Arithmetic mean across bands, one value per modulation bin."""
        return self.mi.mean(axis=0)


def global_extrema(values: Iterable[float]) -> Tuple[float, float]:
    """Exact (min, max) of a stream; errors on a constant stream."""
    if isinstance(values, np.ndarray):
        if values.size == 0:
            raise ValueError("empty stream")
        lo, hi = float(values.min()), float(values.max())
    else:
        lo = hi = None
        for v in values:
            v = float(v)
            if lo is None or v < lo:
                lo = v
            if hi is None or v > hi:
                hi = v
        if lo is None:
            raise ValueError("empty stream")
    if lo == hi:
        raise DegenerateDistributionError(
            "stream is constant (%.6g); no histogram range" % lo
        )
    return lo, hi


def discretize(value: float, spec: HistogramSpec) -> int:
    """Equal-width bin index with clamping at both ends."""
    return int(discretize_array(np.asarray([value]), spec)[0])


def discretize_array(values: np.ndarray, spec: HistogramSpec) -> np.ndarray:
    width = (spec.max - spec.min) / spec.n_bins
    idx = np.floor((np.asarray(values, dtype=np.float64) - spec.min) / width)
    return np.clip(idx, 0, spec.n_bins - 1).astype(np.int64)


def entropy_bits(counts: np.ndarray) -> float:
    """Shannon entropy in bits of a count vector (0 log 0 := 0)."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint: JointHistogram) -> float:
    """Plug-in estimate of I(X;Y) in bits from a joint count table."""
    counts = joint.counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    pxy = counts / total
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    ratio = np.ones_like(pxy)
    denom = px * py
    ratio[mask] = pxy[mask] / denom[mask]
    return float(np.sum(pxy[mask] * np.log2(ratio[mask])))


def _center_label_index(start_sample: int, sample_rate: int,
                        cfg: AnalysisConfig, frame_rate_hz: float) -> int:
    t_center = start_sample / sample_rate + cfg.window_len_s / 2.0
    return int(round(t_center * frame_rate_hz))


def corpus_modulation_magnitudes(
    corpus: Sequence[Tuple[AudioBuffer, LabelTrack]],
    fb: CochlearFilterbank,
    cfg: AnalysisConfig,
    names: Sequence[str] | None = None,
):
    """1/f-compensated magnitudes and center labels for every window.

    Returns (X, y): X is (n_windows, n_bands, n_mod) float64 and y the
    label of the frame at each window center. Raises AlignmentError when
    a label track does not cover its audio.
    """
    res = cfg.resolution_hz
    xs = []
    ys = []
    for i, (audio, track) in enumerate(corpus):
        name = names[i] if names is not None else "utterance %d" % i
        expected = int(np.floor(audio.duration_s * track.frame_rate_hz))
        if track.n_frames + 2 < expected:
            raise AlignmentError(
                name,
                "label track has %d frames, audio needs about %d"
                % (track.n_frames, expected),
            )
        frames = frame_signal(audio, cfg)
        starts = frame_starts(audio.samples.size, cfg, audio.sample_rate)
        for frame, s in zip(frames, starts):
            li = _center_label_index(int(s), audio.sample_rate, cfg,
                                     track.frame_rate_hz)
            li = min(li, track.n_frames - 1)
            coeffs, _ = frame_modulation_coeffs(frame, fb, cfg)
            xs.append(compensate_magnitudes(coeffs, res))
            ys.append(int(track.labels[li]))
    if not xs:
        raise ValueError("empty corpus")
    return np.stack(xs), np.asarray(ys, dtype=np.int64)


def mi_analysis(
    corpus: Sequence[Tuple[AudioBuffer, LabelTrack]],
    fb: CochlearFilterbank,
    cfg: AnalysisConfig,
    n_bins: int = 100,
    names: Sequence[str] | None = None,
) -> MIMatrix:
    """Mutual information between each (band, bin) magnitude and labels.

    Pass 1 finds the global extrema of the compensated magnitudes over
    all windows; pass 2 builds one joint histogram per (band, bin) and
    evaluates the plug-in estimate. Cells whose magnitude never varies
    (bin 0, or silent bands) carry zero information by definition.
    """
    X, y = corpus_modulation_magnitudes(corpus, fb, cfg, names=names)
    n_classes = int(max(t.n_classes for _, t in corpus))
    n_windows, n_bands, n_mod = X.shape
    mi = np.zeros((n_bands, n_mod))
    for b in range(n_bands):
        for m in range(n_mod):
            col = X[:, b, m]
            lo, hi = float(col.min()), float(col.max())
            if lo == hi:
                continue
            spec = HistogramSpec(n_bins=n_bins, min=lo, max=hi)
            bins = discretize_array(col, spec)
            counts = np.bincount(
                bins * n_classes + y, minlength=n_bins * n_classes
            ).reshape(n_bins, n_classes)
            mi[b, m] = mutual_information(JointHistogram(counts))
    return MIMatrix(
        mi=mi,
        band_centers_hz=fb.center_freqs_hz.copy(),
        mod_freqs_hz=np.arange(n_mod) * cfg.resolution_hz,
    )
