from __future__ import annotations

import numpy as np
import pytest

from solarev.coherence import (
    FOURIER_FACTOR,
    MIN_SURROGATES,
    ar1_coefficient,
    coherence_with_significance,
    cone_of_influence,
    cwt_morlet,
    default_pad,
    dyadic_periods,
    periods_to_scales,
    significance_mask,
    standardize,
    wavelet_coherence,
)
from solarev.core import HourlySeries, SeriesError, ValidationError

MORLET_RECONSTRUCTION = 0.776  # C_delta for omega0 = 6
SHORT = dyadic_periods(2, 256)


def _sine(period, n, lag=0.0):
    t = np.arange(n, dtype=float)
    return np.sin(2 * np.pi * (t - lag) / period)



class TestGrid:
    def test_dyadic_periods(self):
        p = dyadic_periods()
        assert p[0] == 2.0 and p[-1] == pytest.approx(4096.0)
        assert p.size == 8 * 11 + 1
        assert np.allclose(np.diff(np.log2(p)), 1 / 8)

    def test_bad_range(self):
        with pytest.raises(ValidationError):
            dyadic_periods(10, 2)

    def test_scale_period_round_trip(self):
        assert periods_to_scales([FOURIER_FACTOR])[0] == pytest.approx(1.0)

    def test_default_pad(self):
        assert default_pad(8760) == 16384
        assert default_pad(1024) == 2048

    def test_coi_shape(self):
        coi = cone_of_influence(100)
        assert coi.shape == (100,)
        assert coi[0] == coi[-1] and coi.argmax() in (49, 50)


class TestCwt:
    def test_sinusoid_peak_at_24h(self):
        per = dyadic_periods(2, 512)
        w = cwt_morlet(_sine(24, 2048), periods_to_scales(per))
        power = np.abs(w[:, 512:1536]).mean(axis=1)
        assert per[power.argmax()] == pytest.approx(24.0, rel=2 ** (1 / 16) - 1)

    def test_zero_series(self):
        w = cwt_morlet(np.zeros(256), periods_to_scales(SHORT))
        assert not np.any(w)

    def test_empty_scales(self):
        with pytest.raises(ValidationError):
            cwt_morlet(np.ones(16), [])

    def test_non_finite(self):
        v = np.ones(16)
        v[3] = np.nan
        with pytest.raises(SeriesError):
            cwt_morlet(v)

    def test_white_noise_variance_recovered(self):
        x = np.random.default_rng(3).standard_normal(4096)
        s = periods_to_scales(dyadic_periods(2, 4096))
        w = cwt_morlet(x, s)
        var = (1 / 8) / MORLET_RECONSTRUCTION * np.sum(np.abs(w) ** 2 / s[:, None]) / x.size
        assert abs(var - 1.0) <= 0.10

    def test_accepts_hourly_series(self):
        hs = HourlySeries(_sine(24, 8760), "kWh", 2019)
        assert cwt_morlet(hs, periods_to_scales([24.0])).shape == (1, 8760)


# ---------------------------------------------------------------------------
# Coherence
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def noise_pair():
    rng = np.random.default_rng(11)
    t = np.arange(2048)
    x = rng.standard_normal(2048) + np.sin(2 * np.pi * t / 24)
    y = rng.standard_normal(2048) + 0.5 * np.sin(2 * np.pi * (t - 3) / 24)
    return x, y


class TestCoherence:
    def test_self_coherence(self, noise_pair):
        x, _ = noise_pair
        c = wavelet_coherence(x, x, SHORT)
        assert c.coherence[c.in_coi].min() >= 0.99
        assert np.abs(c.phase[c.in_coi]).max() < 1e-9

    def test_quarter_period_lag(self):
        x = _sine(24, 2048)
        c = wavelet_coherence(x, _sine(24, 2048, lag=6), SHORT)
        row = int(np.argmin(np.abs(SHORT - 24)))
        mid = slice(512, 1536)
        assert c.coherence[row, mid].min() >= 0.99
        assert np.median(c.phase[row, mid]) == pytest.approx(np.pi / 2, abs=0.05)

    def test_range_and_shapes(self, noise_pair):
        c = wavelet_coherence(*noise_pair, SHORT)
        assert c.coherence.shape == c.phase.shape == (SHORT.size, 2048)
        assert c.coherence.min() >= 0 and c.coherence.max() <= 1
        assert np.all(np.abs(c.phase) <= np.pi)

    def test_symmetric(self, noise_pair):
        x, y = noise_pair
        a, b = wavelet_coherence(x, y, SHORT), wavelet_coherence(y, x, SHORT)
        np.testing.assert_allclose(a.coherence, b.coherence, atol=1e-12)
        strong = a.coherence > 1e-6
        np.testing.assert_allclose(np.sin(a.phase[strong]), -np.sin(b.phase[strong]), atol=1e-9)

    def test_affine_invariant(self, noise_pair):
        x, y = noise_pair
        a = wavelet_coherence(x, y, SHORT)
        b = wavelet_coherence(3.0 * x + 40.0, 0.2 * y - 7.0, SHORT)
        np.testing.assert_allclose(a.coherence, b.coherence, atol=1e-9)

    def test_padding_independent_inside_coi(self, noise_pair):
        x, y = noise_pair
        a = wavelet_coherence(x, y, SHORT, pad=4096)
        b = wavelet_coherence(x, y, SHORT, pad=16384)
        diff = np.where(a.in_coi, np.abs(a.coherence - b.coherence), 0.0)
        above_nyquist_band = SHORT >= 4.0
        assert diff[above_nyquist_band].max() < 1e-6
        # the 2 h row sits on the Nyquist frequency: its truncated wavelet has
        # a long ringing tail that wraps differently with each pad length
        assert diff[~above_nyquist_band].max() < 0.05

    def test_independent_noise_low_at_large_scales(self):
        per = dyadic_periods(64, 256)
        means = []
        for seed in range(100):
            rng = np.random.default_rng(seed)
            c = wavelet_coherence(rng.standard_normal(1024), rng.standard_normal(1024), per)
            means.append(c.coherence[c.in_coi].mean())
        assert np.mean(means) < 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="length mismatch"):
            wavelet_coherence(np.ones(10), np.ones(11))

    def test_constant_input_gives_zero(self):
        c = wavelet_coherence(np.ones(256), _sine(24, 256), SHORT)
        assert not c.coherence.any()


class TestSignificance:
    def test_ar1_coefficient(self):
        rng = np.random.default_rng(0)
        e = rng.standard_normal(20000)
        v = np.empty_like(e)
        v[0] = e[0]
        for i in range(1, e.size):
            v[i] = 0.7 * v[i - 1] + e[i]
        assert ar1_coefficient(v) == pytest.approx(0.7, abs=0.02)

    def test_too_few_surrogates(self, noise_pair):
        c = wavelet_coherence(*noise_pair, SHORT)
        with pytest.raises(ValidationError, match="n_surrogates"):
            significance_mask(c, *noise_pair, n_surrogates=MIN_SURROGATES - 1)

    def test_identical_series_fully_significant(self, noise_pair):
        x, _ = noise_pair
        c = coherence_with_significance(x, x, periods=SHORT, n_surrogates=100)
        assert c.mask[c.in_coi].all()
        assert c.significant_fraction() == 1.0

    def test_deterministic_and_thread_invariant(self):
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal(512), rng.standard_normal(512)
        a = coherence_with_significance(x, y, periods=SHORT, n_surrogates=100, seed=4)
        b = coherence_with_significance(x, y, periods=SHORT, n_surrogates=100, seed=4, threads=3)
        assert np.array_equal(a.mask, b.mask)

    def test_seed_matters(self):
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal(512), rng.standard_normal(512)
        c = wavelet_coherence(x, y, SHORT)
        a = significance_mask(c, x, y, 100, seed=1)
        b = significance_mask(c, x, y, 100, seed=2)
        assert a.shape == b.shape and not np.array_equal(a, b)

    def test_white_noise_false_positive_rate(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal(2048), rng.standard_normal(2048)
        c = coherence_with_significance(x, y, periods=dyadic_periods(2, 512), n_surrogates=300, seed=0)
        assert c.significant_fraction() <= 0.05 + 0.02

    def test_mask_shape_checked(self, noise_pair):
        c = wavelet_coherence(*noise_pair, SHORT)
        with pytest.raises(ValidationError):
            c.with_mask(np.zeros((2, 2), dtype=bool))

    def test_standardize_constant(self):
        assert not standardize(np.full(5, 3.0)).any()
