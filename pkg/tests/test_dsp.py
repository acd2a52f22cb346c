import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegdecode import dsp
from eegdecode.errors import (InvalidBand, IrrationalRatio, MissingChannel, TooShort)

from helpers import bilinear_butter2_bandpass, fit_sinusoid


def db(x):
    return 20 * np.log10(np.maximum(np.abs(x), 1e-300))


class TestDesignBandpass:
    def test_passband_center_gain(self):
        coeffs = dsp.design_bandpass(8, 40, 4, 250)
        h = dsp.frequency_response(coeffs, [20.0])
        assert abs(db(h[0])) < 0.5

    def test_dc_and_nyquist_rejection(self):
        coeffs = dsp.design_bandpass(8, 40, 4, 250)
        h = dsp.frequency_response(coeffs, [0.0, 125.0])
        assert db(h[0]) <= -60
        assert db(h[1]) <= -60

    def test_stopband_at_4hz(self):
        coeffs = dsp.design_bandpass(8, 40, 4, 250)
        h = dsp.frequency_response(coeffs, [4.0])
        assert db(h[0]) <= -24

    def test_poles_inside_unit_circle(self):
        for order in (2, 4, 6, 8):
            coeffs = dsp.design_bandpass(8, 40, order, 250)
            assert np.abs(coeffs.poles()).max() < 1 - 1e-9

    def test_matches_hand_bilinear_design_order2(self):
        # independent textbook route: prototype poles, band-pass
        # substitution, bilinear transform with pre-warping
        b_ref, a_ref = bilinear_butter2_bandpass(8, 40, 250)
        coeffs = dsp.design_bandpass(8, 40, 2, 250)
        np.testing.assert_allclose(coeffs.b, b_ref, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(coeffs.a, a_ref, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("low,high,order", [
        (0, 40, 4), (40, 8, 4), (8, 130, 4), (8, 40, 3), (8, 40, 10),
    ])
    def test_invalid_band(self, low, high, order):
        with pytest.raises(InvalidBand):
            dsp.design_bandpass(low, high, order, 250)


@pytest.fixture(scope="module")
def coeffs():
    return dsp.design_bandpass(8, 40, 4, 250)


class TestApplyFilter:
    def test_dc_rejection_causal(self, coeffs):
        x = np.full(2500, 10.0)
        y = dsp.apply_filter(coeffs, x, mode="causal")
        assert np.abs(y[-250:]).max() < 1e-6

    def test_passband_tone_zero_phase(self, coeffs):
        t = np.arange(1250) / 250.0
        x = np.sin(2 * np.pi * 20 * t)
        y = dsp.apply_filter(coeffs, x, mode="zero_phase")
        amp, phase = fit_sinusoid(y[250:-250], 20, 250)
        assert 0.94 <= amp <= 1.06
        assert abs(phase) < 0.02

    def test_stopband_tone_causal(self, coeffs):
        t = np.arange(2500) / 250.0
        x = np.sin(2 * np.pi * 4 * t)
        y = dsp.apply_filter(coeffs, x, mode="causal")
        amp, _ = fit_sinusoid(y[1250:], 4, 250)
        assert amp <= 0.06

    def test_zero_phase_too_short(self, coeffs):
        with pytest.raises(TooShort):
            dsp.apply_filter(coeffs, np.zeros(20), mode="zero_phase")

    def test_causal_linearity(self, coeffs):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(1000)
        y = rng.standard_normal(1000)
        a, b = 2.5, -1.25
        lhs = dsp.apply_filter(coeffs, a * x + b * y, mode="causal")
        rhs = a * dsp.apply_filter(coeffs, x, mode="causal") \
            + b * dsp.apply_filter(coeffs, y, mode="causal")
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)

    def test_zero_phase_time_reversal_symmetry(self, coeffs):
        # compare past the IIR edge transient: the slowest pole (0.946)
        # needs ~250 samples to decay below 1e-6
        rng = np.random.default_rng(1)
        x = dsp.apply_filter(coeffs, rng.standard_normal(4000), mode="zero_phase")
        fwd = dsp.apply_filter(coeffs, x, mode="zero_phase")
        rev = dsp.apply_filter(coeffs, x[::-1], mode="zero_phase")[::-1]
        np.testing.assert_allclose(fwd[300:-300], rev[300:-300], atol=1e-6)

    def test_causal_filter_chunked_equals_whole(self, coeffs):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((12, 1000))
        whole = dsp.CausalFilter(coeffs, 12).process(x)
        chunked = dsp.CausalFilter(coeffs, 12)
        parts = []
        at = 0
        for k in (1, 7, 250, 400, 342):
            parts.append(chunked.process(x[:, at:at + k]))
            at += k
        np.testing.assert_array_equal(whole, np.concatenate(parts, axis=1))


class TestResample:
    def test_length_500_to_250(self):
        y = dsp.resample(np.zeros(1000), 500, 250)
        assert len(y) == 500

    def test_length_256_to_250(self):
        # dataset-to-runtime conversion, ratio 125/128
        y = dsp.resample(np.zeros(2560), 256, 250)
        assert len(y) == 2500

    def test_tone_preserved(self):
        t = np.arange(5000) / 500.0
        x = np.sin(2 * np.pi * 10 * t)
        y = dsp.resample(x, 500, 250)
        amp, _ = fit_sinusoid(y[100:-100], 10, 250)
        assert abs(amp - 1.0) < 0.05

    def test_tone_at_04_of_min_rate(self):
        t = np.arange(10000) / 500.0
        x = np.sin(2 * np.pi * 100 * t)  # 0.4 * min(500, 250)
        y = dsp.resample(x, 500, 250)
        amp, _ = fit_sinusoid(y[200:-200], 100, 250)
        assert abs(amp - 1.0) < 0.05

    def test_round_trip_band_limited(self):
        rng = np.random.default_rng(3)
        coeffs = dsp.design_bandpass(8, 40, 4, 250)
        x = dsp.apply_filter(coeffs, rng.standard_normal(5000), mode="zero_phase")
        back = dsp.resample(dsp.resample(x, 250, 500), 500, 250)
        core = slice(250, -250)
        err = np.sqrt(np.mean((back[core] - x[core]) ** 2))
        assert err < 0.02 * np.sqrt(np.mean(x[core] ** 2))

    def test_irrational_ratio(self):
        with pytest.raises(IrrationalRatio):
            dsp.resample(np.zeros(100), 250.0, 250.0 * np.pi)

    def test_resample_recording_rescales_events(self):
        rng = np.random.default_rng(7)
        rec = dsp.Recording(channels=dsp.MONTAGE_12, sample_rate=256.0,
                            data=rng.standard_normal((12, 2560)),
                            events=[dsp.Event(256, 512, "move")])
        out = dsp.resample_recording(rec, 250.0)
        assert out.sample_rate == 250.0
        assert out.n_samples == 2500
        assert out.events == [dsp.Event(250, 500, "move")]


class TestSelectChannels:
    def _rec(self, channels, n=3000):
        rng = np.random.default_rng(4)
        return dsp.Recording(channels=channels, sample_rate=250.0,
                             data=rng.standard_normal((len(channels), n)),
                             events=[dsp.Event(0, 100, "move")])

    def test_subset_and_order(self):
        extra = [f"X{i}" for i in range(20)]
        src_names = list(dsp.MONTAGE_12[6:]) + extra[:10] + list(dsp.MONTAGE_12[:6]) + extra[10:]
        rec = self._rec(src_names)
        out = dsp.select_channels(rec, dsp.MONTAGE_12)
        assert out.channels == dsp.MONTAGE_12
        for i, name in enumerate(dsp.MONTAGE_12):
            np.testing.assert_array_equal(out.data[i], rec.data[src_names.index(name)])
        assert out.events == rec.events

    def test_identity(self):
        rec = self._rec(list(dsp.MONTAGE_12))
        out = dsp.select_channels(rec, rec.channels)
        np.testing.assert_array_equal(out.data, rec.data)
        assert out.channels == rec.channels

    def test_missing_channel(self):
        rec = self._rec(list(dsp.MONTAGE_12))
        with pytest.raises(MissingChannel) as err:
            dsp.select_channels(rec, ("Cz",))
        assert err.value.name == "Cz"


class TestEpochStream:
    def _rec(self, n, events=()):
        rng = np.random.default_rng(5)
        return dsp.Recording(channels=dsp.MONTAGE_12, sample_rate=250.0,
                             data=rng.standard_normal((12, n)), events=list(events))

    def test_count_non_overlapping(self):
        assert len(dsp.epoch_stream(self._rec(2500), stride=250)) == 10

    def test_count_half_overlap(self):
        assert len(dsp.epoch_stream(self._rec(2500), stride=125)) == 19

    def test_majority_label_counts_uncovered_as_rest(self):
        rec = self._rec(1000, [dsp.Event(0, 600, "move")])
        wins = dsp.epoch_stream(rec, stride=125)
        by_start = {w.source[1]: w for w in wins}
        assert by_start[500].label == dsp.REST   # 100/250 move coverage
        assert by_start[250].label == dsp.MOVE   # 250/250
        assert by_start[375].label == dsp.MOVE   # 225/250
        assert by_start[625].label == dsp.REST   # 0/250

    def test_exact_tie_is_unlabeled(self):
        rec = self._rec(250, [dsp.Event(0, 125, "move")])
        wins = dsp.epoch_stream(rec, stride=125)
        assert wins[0].label is None

    def test_short_recording_empty(self):
        assert dsp.epoch_stream(self._rec(249)) == []

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(0, 4000), stride=st.integers(1, 600))
    def test_count_formula_property(self, n, stride):
        rng = np.random.default_rng(6)
        rec = dsp.Recording(channels=dsp.MONTAGE_12, sample_rate=250.0,
                            data=rng.standard_normal((12, n)))
        wins = dsp.epoch_stream(rec, stride=stride, labeling="unlabeled")
        expected = (n - 250) // stride + 1 if n >= 250 else 0
        assert len(wins) == expected
        assert len(wins) == dsp.epoch_count(n, 250, stride)
