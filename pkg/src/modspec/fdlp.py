"""Per-band frequency-domain linear prediction and modulation coefficients.

Linear prediction on the cosine-transform coefficients of a windowed
signal yields an all-pole model whose power response, evaluated on a
uniform half-circle grid, approximates the squared temporal envelope of
the signal over the window. The log of that envelope, re-expressed over
the window span, gives complex modulation coefficients with a bin
spacing of 1/window_len Hz.

Two routes to the coefficients exist and are kept deliberately distinct:
the production path runs the cepstral recursion on the prediction
coefficients, while the oracle path evaluates the envelope pointwise and
transforms its logarithm. Tests hold the two to 1e-6 agreement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .dsp import AnalysisConfig, AudioBuffer, CochlearFilterbank, cosine_transform
from .errors import DegenerateBandError, NumericalDegeneracyError

__all__ = [
    "AllPoleModel",
    "ModulationSpectrum",
    "subband_autocorrelation",
    "levinson_durbin",
    "lpc_to_cepstrum",
    "envelope_from_model",
    "am_test_signal",
    "modulation_spectrum",
    "frame_modulation_coeffs",
    "one_over_f_compensate",
    "compensate_magnitudes",
]

_MAX_CEPSTRUM_TERMS = 32768


@dataclass(frozen=True)
class AllPoleModel:
    """All-pole fit of a sub-band power envelope.

    `lp_coeffs` holds a[1..p] with the implicit a[0] = 1; `gain` is the
    square root of the final prediction error. `reflection` keeps the
    Levinson reflection coefficients so minimum phase is checkable
    without refactoring the polynomial.
    """

    order: int
    lp_coeffs: np.ndarray
    gain: float
    band_index: int = 0
    reflection: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.lp_coeffs, dtype=np.float64)
        if a.size != self.order:
            raise ValueError("lp_coeffs must have exactly `order` entries")
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        object.__setattr__(self, "lp_coeffs", a)

    @property
    def is_minimum_phase(self) -> bool:
        if self.reflection is None:
            return bool(np.all(np.abs(np.roots(self.full_poly())) < 1.0))
        return bool(np.all(np.abs(self.reflection) < 1.0))

    def full_poly(self) -> np.ndarray:
        return np.concatenate(([1.0], self.lp_coeffs))


@dataclass(frozen=True)
class ModulationSpectrum:
    """Complex modulation coefficients of one sub-band.

    Bin n sits at n * resolution_hz; the Hanning taper used in the
    readout spreads every line over at least two bins, which halves the
    effective resolution. coeffs[0] is real (the mean log envelope).
    A degenerate band (no usable energy) carries all-zero coefficients.
    """

    coeffs: np.ndarray
    resolution_hz: float
    effective_resolution_hz: float
    band_index: int
    degenerate: bool = False

    @property
    def n_coeffs(self) -> int:
        return self.coeffs.size

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)

    @property
    def mod_freqs_hz(self) -> np.ndarray:
        return np.arange(self.coeffs.size) * self.resolution_hz


def subband_autocorrelation(
    freq_coeffs: np.ndarray, band_weights: np.ndarray, order: int
) -> np.ndarray:
    """Autocorrelation r[m] = sum_k y[k] y[k+m] of weighted coefficients.

    y is the element-wise product of the frequency coefficients and the
    band weights. Computed through a zero-padded FFT of length >= 2n.
    """
    y = np.asarray(freq_coeffs, dtype=np.float64)
    w = np.asarray(band_weights, dtype=np.float64)
    if y.shape != w.shape:
        raise ValueError("freq_coeffs and band_weights must have the same length")
    if order >= y.size:
        raise ValueError("order must be smaller than the coefficient count")
    yw = y * w
    if not np.any(yw):
        raise DegenerateBandError()
    n = next_fast_len(2 * yw.size)
    spec = np.abs(np.fft.rfft(yw, n)) ** 2
    return np.fft.irfft(spec, n)[: order + 1]


def levinson_durbin(r: np.ndarray, order: int | None = None, band_index: int = 0) -> AllPoleModel:
    """Solve the Toeplitz normal equations by the Levinson recursion.

    Returns the prediction coefficients a[1..p], the gain (square root of
    the final prediction error) and the reflection coefficients. Raises
    NumericalDegeneracyError carrying the stage index when a reflection
    coefficient reaches magnitude 1.
    """
    r = np.asarray(r, dtype=np.float64)
    if order is None:
        order = r.size - 1
    if r.size < order + 1:
        raise ValueError("need r[0..p] for order p")
    if not r[0] > 0:
        raise ValueError("r[0] must be positive")
    a = np.zeros(order + 1)
    a[0] = 1.0
    e = float(r[0])
    k_hist = np.zeros(order)
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1:0:-1])
        k = -acc / e
        if abs(k) >= 1.0:
            raise NumericalDegeneracyError(stage=i, value=k)
        k_hist[i - 1] = k
        a[1:i] += k * a[i - 1:0:-1]
        a[i] = k
        e *= 1.0 - k * k
    return AllPoleModel(
        order=order,
        lp_coeffs=a[1:],
        gain=float(np.sqrt(e)),
        band_index=band_index,
        reflection=k_hist,
    )


def lpc_to_cepstrum(model: AllPoleModel, n: int) -> np.ndarray:
    """Cepstrum of the model's power response g^2 / |A|^2.

    c[0] = 2 ln g, and for m >= 1
      c[m] = 2 * ( -a[m] - sum_{k=1}^{m-1} (k/m) c_std[k] a[m-k] ),
    with a[m] = 0 beyond the model order. The factor 2 makes the series
    the log of the squared-magnitude (power) envelope. Minimum-phase
    models only.
    """
    if not model.is_minimum_phase:
        raise ValueError("model is not minimum phase")
    if n < 1:
        raise ValueError("n must be >= 1")
    a = np.concatenate(([1.0], model.lp_coeffs))
    c = _cepstrum_batch(a[None, :], np.array([model.gain ** 2]), n)
    return c[0]


def envelope_from_model(model: AllPoleModel, n_points: int) -> np.ndarray:
    """Power envelope g^2 / |A(e^{j pi t / n_points})|^2, t = 0..n_points-1.

    The grid spans the analysis window. Strictly positive for any valid
    model.
    """
    if n_points < 2 * model.order:
        raise ValueError("n_points must be at least twice the model order")
    spec = np.fft.rfft(model.full_poly(), 2 * n_points)[:n_points]
    return model.gain ** 2 / np.abs(spec) ** 2


def am_test_signal(
    carrier_hz: float,
    mod_hz: float,
    depth: float,
    duration_s: float,
    sample_rate: int,
) -> AudioBuffer:
    """s(t) = (1 + depth cos(2 pi mod_hz t)) cos(2 pi carrier_hz t)."""
    if not (0.0 <= depth < 1.0):
        raise ValueError("depth must be in [0, 1)")
    if not (0.0 < mod_hz < carrier_hz < sample_rate / 2.0):
        raise ValueError("need 0 < mod_hz < carrier_hz < sample_rate / 2")
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    s = (1.0 + depth * np.cos(2.0 * np.pi * mod_hz * t)) * np.cos(
        2.0 * np.pi * carrier_hz * t
    )
    return AudioBuffer(samples=s, sample_rate=sample_rate)


def one_over_f_compensate(ms: ModulationSpectrum) -> ModulationSpectrum:
    """Multiply bin n by n * resolution_hz (bin 0 becomes 0); phase kept."""
    scale = np.arange(ms.coeffs.size) * ms.resolution_hz
    return ModulationSpectrum(
        coeffs=ms.coeffs * scale,
        resolution_hz=ms.resolution_hz,
        effective_resolution_hz=ms.effective_resolution_hz,
        band_index=ms.band_index,
        degenerate=ms.degenerate,
    )


def compensate_magnitudes(coeffs: np.ndarray, resolution_hz: float) -> np.ndarray:
    """1/f-compensated magnitudes of a (... , n_mod) coefficient array."""
    scale = np.arange(coeffs.shape[-1]) * resolution_hz
    return np.abs(coeffs) * scale


# ----------------------------------------------------------------------
# vectorized engine
# ----------------------------------------------------------------------

_GRID_CACHE: dict = {}


def _grids(n_win: int, m_env: int, guard: float):
    """Precomputed FFT-domain tables for a (window, grid) geometry."""
    key = (n_win, m_env, guard)
    hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    l_fft = next_fast_len(2 * n_win)
    # taper compensation: rfft bin b sits at mirrored-time position
    # b * 2 n / l samples; the window has period n - 1
    pos = np.arange(l_fft // 2 + 1) * (2.0 * n_win / l_fft)
    pos = np.minimum(pos, n_win - 1.0)
    w_tau = 0.5 - 0.5 * np.cos(2.0 * np.pi * pos / (n_win - 1))
    w2 = np.maximum(w_tau ** 2, guard)
    # periodic Hanning taper for the modulation-domain readout
    w_mod = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(m_env) / m_env)
    tables = (l_fft, w2, w_mod, float(w_mod.sum()))
    _GRID_CACHE[key] = tables
    return tables


def _compensated_autocorr_batch(yb: np.ndarray, order: int, n_win: int,
                                m_env: int, guard: float) -> np.ndarray:
    """Autocorrelation of weighted coefficients after dividing the dual
    power spectrum by the known analysis-window taper."""
    l_fft, w2, _, _ = _grids(n_win, m_env, guard)
    spec = np.abs(np.fft.rfft(yb, l_fft, axis=-1)) ** 2
    spec /= w2
    return np.fft.irfft(spec, l_fft, axis=-1)[..., : order + 1]


def _levinson_batch(R: np.ndarray):
    """Levinson recursion across rows; rows going degenerate are frozen.

    Returns (a, err, k, ok) where a includes a[0] = 1 and ok flags rows
    that stayed positive definite throughout.
    """
    R = np.asarray(R, dtype=np.float64)
    n_rows, p1 = R.shape
    p = p1 - 1
    a = np.zeros((n_rows, p + 1))
    a[:, 0] = 1.0
    e = R[:, 0].copy()
    ok = e > 0
    e_safe = np.where(ok, e, 1.0)
    k_hist = np.zeros((n_rows, p))
    for i in range(1, p + 1):
        acc = R[:, i] + np.einsum("bj,bj->b", a[:, 1:i], R[:, i - 1:0:-1])
        k = np.where(ok, -acc / e_safe, 0.0)
        ok &= np.abs(k) < 1.0
        k = np.where(ok, k, 0.0)
        k_hist[:, i - 1] = k
        rev = a[:, i - 1:0:-1].copy()
        a[:, 1:i] += k[:, None] * rev
        a[:, i] = k
        e_safe = e_safe * (1.0 - k * k)
    return a, e_safe, k_hist, ok


def _cepstrum_batch(a: np.ndarray, g2: np.ndarray, n: int) -> np.ndarray:
    """Doubled cepstral recursion across rows.

    a is (rows, p+1) including a[0] = 1; g2 is the squared gain per row.
    """
    n_rows, p1 = a.shape
    p = p1 - 1
    ch = np.zeros((n_rows, n))
    m_idx = np.arange(n, dtype=np.float64)
    for m in range(1, n):
        kmin = max(1, m - p)
        if m > 1:
            s = np.einsum(
                "bk,bk->b",
                ch[:, kmin:m] * m_idx[kmin:m],
                a[:, m - kmin:0:-1],
            ) / m
        else:
            s = 0.0
        am = a[:, m] if m <= p else 0.0
        ch[:, m] = -am - s
    c = 2.0 * ch
    c[:, 0] = np.log(g2)
    return c


def _fold_cosine_series(c: np.ndarray, m_env: int) -> np.ndarray:
    """Evaluate L[t] = sum_m c[m] cos(pi m t / m_env) on t = 0..m_env-1.

    Terms beyond the grid Nyquist fold back exactly as sampling would
    alias them, so a truncated series matches pointwise evaluation.
    """
    two_m = 2 * m_env
    rows, n = c.shape
    pad = (-n) % two_m
    if pad:
        c = np.concatenate([c, np.zeros((rows, pad))], axis=1)
    blocks = c.reshape(rows, -1, two_m)
    acc = blocks[:, :, : m_env + 1].sum(axis=1)
    acc[:, 1:m_env] += blocks[:, :, m_env + 1:][:, :, ::-1].sum(axis=1)
    spec = np.empty((rows, m_env + 1), dtype=np.complex128)
    spec[:, 0] = acc[:, 0] * two_m
    spec[:, 1:m_env] = acc[:, 1:m_env] * m_env
    spec[:, m_env] = acc[:, m_env] * two_m
    return np.fft.irfft(spec, two_m, axis=-1)[:, :m_env]


def _readout(log_env: np.ndarray, n_mod: int, w_mod: np.ndarray, sw: float) -> np.ndarray:
    """Tapered transform of the log envelope over the window span.

    The taper-weighted mean becomes bin 0; the mean-removed, tapered
    envelope is transformed and normalized by the coherent gain, so a
    cosine component of amplitude A at an exact bin reads A/2.
    """
    c0 = log_env @ w_mod / sw
    v = w_mod * (log_env - c0[:, None])
    coeffs = np.fft.rfft(v, axis=-1)[:, :n_mod] / sw
    coeffs[:, 0] = c0
    return coeffs


def _cepstrum_with_tail_check(a, g2, n0: int, m_env: int) -> np.ndarray:
    """Run the cepstral recursion long enough that the truncated tail is
    negligible on the envelope grid; doubles the length when the trailing
    terms are still large relative to the series."""
    n = n0
    while True:
        c = _cepstrum_batch(a, g2, n)
        tail = np.abs(c[:, -32:]).max(axis=1)
        scale = np.abs(c[:, 1:]).max(axis=1) + 1e-30
        if np.all(tail <= 1e-9 * scale) or n >= _MAX_CEPSTRUM_TERMS:
            return c
        n = min(2 * n, _MAX_CEPSTRUM_TERMS)


def frame_modulation_coeffs(
    frame: np.ndarray, fb: CochlearFilterbank, cfg: AnalysisConfig
):
    """Modulation coefficients of every band of one windowed frame.

    Returns (coeffs, degenerate): a complex (n_bands, n_mod_coeffs) array
    and a boolean mask of bands skipped for lack of energy. Degenerate
    rows are zero.
    """
    frame = np.asarray(frame, dtype=np.float64)
    n_win = frame.size
    if fb.n_coeffs != n_win:
        raise ValueError(
            "filterbank built for %d coefficients, frame has %d"
            % (fb.n_coeffs, n_win)
        )
    m_env = cfg.env_grid_points
    n_mod = cfg.n_mod_coeffs
    _, _, w_mod, sw = _grids(n_win, m_env, cfg.window_guard)

    y = cosine_transform(frame)
    yb = y[None, :] * fb.band_weights
    energy = np.einsum("bk,bk->b", yb, yb)
    total = float(y @ y)
    degenerate = energy <= cfg.band_energy_floor * total if total > 0 else np.ones(
        fb.n_bands, dtype=bool
    )

    coeffs = np.zeros((fb.n_bands, n_mod), dtype=np.complex128)
    live = ~degenerate
    if np.any(live):
        r = _compensated_autocorr_batch(
            yb[live], cfg.model_order, n_win, m_env, cfg.window_guard
        )
        r[:, 0] *= 1.0 + cfg.autocorr_reg
        a, err, _, ok = _levinson_batch(r)
        if not np.all(ok):
            idx = np.flatnonzero(live)
            degenerate = degenerate.copy()
            degenerate[idx[~ok]] = True
            live = ~degenerate
            a, err = a[ok], err[ok]
        if a.shape[0]:
            n0 = cfg.cepstrum_terms or max(2 * m_env, 4 * n_mod, 4096)
            c = _cepstrum_with_tail_check(a, err, n0, m_env)
            log_env = _fold_cosine_series(c, m_env)
            coeffs[live] = _readout(log_env, n_mod, w_mod, sw)
    return coeffs, degenerate


def modulation_spectrum(
    frame: np.ndarray, fb: CochlearFilterbank, cfg: AnalysisConfig
) -> list[ModulationSpectrum]:
    """Per-band modulation spectra of one windowed frame.

    Bands without usable energy are flagged degenerate instead of failing
    the whole frame; their coefficients are zero.
    """
    coeffs, degenerate = frame_modulation_coeffs(frame, fb, cfg)
    res = cfg.resolution_hz
    return [
        ModulationSpectrum(
            coeffs=coeffs[b],
            resolution_hz=res,
            effective_resolution_hz=2.0 * res,
            band_index=b,
            degenerate=bool(degenerate[b]),
        )
        for b in range(fb.n_bands)
    ]
