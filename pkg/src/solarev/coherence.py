"""Morlet wavelet transform, smoothed wavelet coherence and AR(1) surrogate
significance.

The transform follows the usual frequency-domain recipe (Morlet, omega0 = 6,
zero padding to a power of two). Coherence uses a Gaussian time smoother
matched to the Morlet envelope and a 0.6-scale boxcar across scales.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sfft
from scipy.signal import lfilter

from .core import HourlySeries, SeriesError, ValidationError

OMEGA0 = 6.0
FOURIER_FACTOR = 4.0 * np.pi / (OMEGA0 + np.sqrt(2.0 + OMEGA0**2))  # period / scale
SUBOCTAVES = 8
SCALE_SMOOTH_WIDTH = 0.6  # in units of dj * 2 steps
MIN_SURROGATES = 100
_HIST_BINS = 2000


def dyadic_periods(min_period: float = 2.0, max_period: float = 4096.0, suboctaves: int = SUBOCTAVES) -> np.ndarray:
    """Periods (hours) ``min * 2**(j/suboctaves)`` up to ``max_period`` inclusive."""
    if not (0 < min_period <= max_period) or suboctaves < 1:
        raise ValidationError("need 0 < min_period <= max_period and suboctaves >= 1")
    n = int(np.floor(suboctaves * np.log2(max_period / min_period) + 1e-9))
    return min_period * 2.0 ** (np.arange(n + 1) / suboctaves)


def periods_to_scales(periods) -> np.ndarray:
    return np.asarray(periods, dtype=float) / FOURIER_FACTOR


def default_pad(n: int) -> int:
    """Power of two at or above ~1.4 n, leaving room against wrap-around."""
    return int(2 ** (int(np.log2(n) + 0.4999) + 1))


def cone_of_influence(n: int, dt: float = 1.0) -> np.ndarray:
    """Largest period (hours) free of edge effects at each time step."""
    i = np.arange(n)
    return FOURIER_FACTOR / np.sqrt(2.0) * dt * np.minimum(i + 1, n - i).astype(float)


def _values(series) -> np.ndarray:
    v = series.values if isinstance(series, HourlySeries) else np.asarray(series, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise SeriesError("series must be one-dimensional with at least 2 values")
    if not np.all(np.isfinite(v)):
        raise SeriesError(f"non-finite value at index {int(np.argmin(np.isfinite(v)))}")
    return v.astype(float)


def standardize(values, detrend: bool = False) -> np.ndarray:
    """Zero mean, unit variance; a constant series becomes all zeros."""
    v = np.asarray(values, dtype=float)
    if detrend:
        t = np.arange(v.size)
        v = v - np.polyval(np.polyfit(t, v, 1), t)
    v = v - v.mean()
    sd = v.std()
    return v / sd if sd > 0 else np.zeros_like(v)


def _angular_frequencies(npad: int, dt: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(npad, d=dt)


class _Plan:
    """Frequency-domain wavelets and smoothing kernels for one (scales, n)
    pair, built once and reused across surrogates."""

    def __init__(self, scales: np.ndarray, n: int, dt: float, pad: int | None, dj: float):
        self.scales = scales
        self.n = n
        self.npad = default_pad(n) if pad is None else int(pad)
        if self.npad < n:
            raise ValidationError(f"pad {self.npad} shorter than series length {n}")
        k = _angular_frequencies(self.npad, dt)
        arg = scales[:, None] * k[None, :]
        daughter = np.where(k > 0, np.exp(-0.5 * (arg - OMEGA0) ** 2), 0.0)
        self.daughter = daughter * (np.sqrt(2.0 * np.pi * scales[:, None] / dt) * np.pi**-0.25)

        self.nsmooth = int(2 ** np.ceil(np.log2(n)))
        ks = _angular_frequencies(self.nsmooth, 1.0)
        self.kernel = np.exp(-0.5 * (scales[:, None] / dt) ** 2 * ks[None, :] ** 2)
        self.rkernel = self.kernel[:, : self.nsmooth // 2 + 1]

        steps = SCALE_SMOOTH_WIDTH / (2.0 * dj)
        frac = steps % 1.0
        core = 2 * int(round(steps)) - 1
        box = np.concatenate([[frac], np.ones(core), [frac]])
        self.box = box / (core + 2 * frac)

    def transform(self, v: np.ndarray) -> np.ndarray:
        xhat = sfft.fft(v, self.npad)
        return sfft.ifft(xhat[None, :] * self.daughter, axis=1)[:, : self.n]

    def smooth(self, grid: np.ndarray) -> np.ndarray:
        """Gaussian in time (width = scale), then boxcar of 0.6 scale-octaves."""
        n = self.n
        if np.iscomplexobj(grid):
            out = sfft.ifft(sfft.fft(grid, self.nsmooth, axis=1) * self.kernel, axis=1)[:, :n]
        else:
            out = sfft.irfft(sfft.rfft(grid, self.nsmooth, axis=1) * self.rkernel, self.nsmooth, axis=1)[:, :n]
        half = self.box.size // 2
        rows = out.shape[0]
        padded = np.zeros((rows + 2 * half, n), dtype=out.dtype)
        padded[half:half + rows] = out
        result = np.zeros_like(out)
        for i, w in enumerate(self.box):
            result += w * padded[i:i + rows]
        return result


def cwt_morlet(series, scales=None, *, dt: float = 1.0, pad: int | None = None, normalize: bool = True) -> np.ndarray:
    """Complex coefficients, shape (n_scales, n).

    ``scales`` are wavelet scales in hours (period = scale x FOURIER_FACTOR);
    by default the 2-4096 h dyadic grid. With ``normalize`` the series is
    standardized first.
    """
    v = _values(series)
    if normalize:
        v = standardize(v)
    s = periods_to_scales(dyadic_periods()) if scales is None else np.atleast_1d(np.asarray(scales, dtype=float))
    if s.size == 0:
        raise ValidationError("scale list is empty")
    if np.any(s <= 0):
        raise ValidationError("scales must be positive")
    return _Plan(s, v.size, dt, pad, 1.0 / SUBOCTAVES).transform(v)


@dataclass(frozen=True, eq=False)
class CoherenceMap:
    """Coherence and phase over (period, time); ``mask`` is set once a
    significance test has run."""

    time: np.ndarray
    periods: np.ndarray
    coherence: np.ndarray
    phase: np.ndarray
    coi: np.ndarray
    mask: np.ndarray | None = None

    @property
    def in_coi(self) -> np.ndarray:
        return self.periods[:, None] <= self.coi[None, :]

    def with_mask(self, mask: np.ndarray) -> "CoherenceMap":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.coherence.shape:
            raise ValidationError(f"mask shape {mask.shape} != grid shape {self.coherence.shape}")
        return replace(self, mask=mask)

    def significant_fraction(self) -> float:
        """Share of the in-COI area flagged significant."""
        if self.mask is None:
            raise ValidationError("no significance mask computed")
        inside = self.in_coi
        return float(self.mask[inside].mean()) if inside.any() else 0.0


def _coherence_grids(plan: _Plan, wx, wy, with_phase: bool = True):
    inv = 1.0 / plan.scales[:, None]
    sxy = plan.smooth(wx * np.conj(wy) * inv)
    sxx = plan.smooth((wx.real**2 + wx.imag**2) * inv)
    syy = plan.smooth((wy.real**2 + wy.imag**2) * inv)
    denom = sxx * syy
    ok = denom > 0
    coh = np.zeros(denom.shape)
    coh[ok] = (sxy.real[ok] ** 2 + sxy.imag[ok] ** 2) / denom[ok]
    phase = np.where(ok, np.angle(sxy), 0.0) if with_phase else None
    return np.clip(coh, 0.0, 1.0), phase


def wavelet_coherence(
    x,
    y,
    periods=None,
    *,
    dt: float = 1.0,
    pad: int | None = None,
    detrend: bool = False,
) -> CoherenceMap:
    """Squared wavelet coherence of ``x`` and ``y``.

    Phase is the angle of the smoothed cross spectrum ``Wx conj(Wy)``; it is
    positive when ``y`` lags ``x``.
    """
    vx, vy = _values(x), _values(y)
    if vx.size != vy.size:
        raise ValidationError(f"length mismatch: {vx.size} vs {vy.size}")
    per = dyadic_periods() if periods is None else np.asarray(periods, dtype=float)
    scales = periods_to_scales(per)
    dj = _suboctave_step(per)
    plan = _Plan(scales, vx.size, dt, pad, dj)
    wx = plan.transform(standardize(vx, detrend))
    wy = plan.transform(standardize(vy, detrend))
    coh, phase = _coherence_grids(plan, wx, wy)
    return CoherenceMap(np.arange(vx.size) * dt, per, coh, phase, cone_of_influence(vx.size, dt))


def _suboctave_step(periods: np.ndarray) -> float:
    if periods.size < 2:
        return 1.0 / SUBOCTAVES
    return float(np.log2(periods[1] / periods[0]))


# ---------------------------------------------------------------------------
# Significance
# ---------------------------------------------------------------------------


def ar1_coefficient(values) -> float:
    """Lag-1 autocorrelation of the standardized series, kept inside (-1, 1)."""
    v = standardize(values)
    denom = float(np.dot(v, v))
    if denom == 0:
        return 0.0
    return float(np.clip(np.dot(v[1:], v[:-1]) / denom, -0.999, 0.999))


def ar1_surrogate(phi: float, n: int, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(n + 200)
    return lfilter([1.0], [1.0, -phi], noise)[200:]  # drop the spin-up


def _surrogate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def significance_mask(
    cmap: CoherenceMap,
    x,
    y,
    n_surrogates: int = 300,
    alpha: float = 0.05,
    seed: int = 0,
    *,
    dt: float = 1.0,
    pad: int | None = None,
    detrend: bool = False,
    threads: int = 1,
) -> np.ndarray:
    """Boolean grid: coherence above the per-period (1 - alpha) quantile of
    coherence between AR(1) surrogates fitted to ``x`` and ``y``.

    Surrogate ``i`` draws from its own seed stream, so the result does not
    depend on ``threads``.
    """
    if n_surrogates < MIN_SURROGATES:
        raise ValidationError(f"n_surrogates = {n_surrogates} violates n_surrogates >= {MIN_SURROGATES}")
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha = {alpha} outside (0, 1)")
    vx, vy = standardize(_values(x), detrend), standardize(_values(y), detrend)
    n = vx.size
    if vy.size != n or cmap.coherence.shape[1] != n:
        raise ValidationError("series and coherence map lengths differ")
    phi_x, phi_y = ar1_coefficient(vx), ar1_coefficient(vy)
    per = cmap.periods
    scales = periods_to_scales(per)
    dj = _suboctave_step(per)
    inside = cmap.in_coi
    # rows without any in-COI sample fall back to the whole row
    weight = np.where(inside.any(axis=1)[:, None], inside, True)
    plan = _Plan(scales, n, dt, pad, dj)
    offsets = (np.arange(per.size) * _HIST_BINS)[:, None]

    def one(i: int) -> np.ndarray:
        rng = _surrogate_rng(seed, i)
        sx = ar1_surrogate(phi_x, n, rng)
        sy = ar1_surrogate(phi_y, n, rng)
        coh, _ = _coherence_grids(plan, plan.transform(standardize(sx)), plan.transform(standardize(sy)), False)
        idx = np.minimum((coh * _HIST_BINS).astype(np.int64), _HIST_BINS - 1) + offsets
        return np.bincount(idx[weight], minlength=per.size * _HIST_BINS)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, range(n_surrogates)))
    else:
        parts = [one(i) for i in range(n_surrogates)]
    counts = np.sum(parts, axis=0).reshape(per.size, _HIST_BINS).astype(float)
    threshold = _histogram_quantile(counts, 1.0 - alpha)
    return cmap.coherence > threshold[:, None]


def _histogram_quantile(counts: np.ndarray, q: float) -> np.ndarray:
    """Row-wise quantile from fixed [0, 1] bins, linear within a bin."""
    nbins = counts.shape[1]
    cdf = np.cumsum(counts, axis=1)
    total = cdf[:, -1:]
    target = q * total
    out = np.empty(counts.shape[0])
    for r in range(counts.shape[0]):
        b = int(np.searchsorted(cdf[r], target[r, 0], side="left"))
        b = min(b, nbins - 1)
        below = cdf[r, b - 1] if b > 0 else 0.0
        within = counts[r, b]
        frac = (target[r, 0] - below) / within if within > 0 else 0.0
        out[r] = (b + frac) / nbins
    return out


def coherence_with_significance(
    x,
    y,
    *,
    periods=None,
    n_surrogates: int = 300,
    alpha: float = 0.05,
    seed: int = 0,
    detrend: bool = False,
    threads: int = 1,
) -> CoherenceMap:
    cmap = wavelet_coherence(x, y, periods, detrend=detrend)
    mask = significance_mask(cmap, x, y, n_surrogates, alpha, seed, detrend=detrend, threads=threads)
    return cmap.with_mask(mask)
