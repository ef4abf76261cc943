import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aging_forecast.errors import ConstantSegmentError, SeriesTooShortError
from aging_forecast.preprocess import (ScalerParams, embed, embed_continuation, fit_scaler,
                                       hours_to_samples, scale, sliding_median, unscale)
from aging_forecast.timeseries import TimeSeries

finite = st.floats(-1e6, 1e6, allow_nan=False)


def brute_median(values, w):
    out = []
    for t in range(len(values) - w + 1):
        win = sorted(values[t:t + w])
        out.append(win[w // 2] if w % 2 else (win[w // 2 - 1] + win[w // 2]) / 2)
    return out


@pytest.mark.parametrize("values,w,expected", [
    ([5, 5, 5, 5, 5], 3, [5, 5, 5]),
    ([1, 2, 3, 4, 5], 3, [2, 3, 4]),
    ([1, 1, 100, 1, 1], 3, [1, 1, 1]),
    ([4, 1, 3, 2], 2, [2.5, 2, 2.5]),
])
def test_sliding_median_examples(backend, values, w, expected):
    out = sliding_median(TimeSeries(values), w)
    assert out.values.tolist() == expected
    assert out.start_index == 0


def test_sliding_median_alignment_shifts_start():
    s = TimeSeries(np.arange(10.0), start_index=5)
    lead = sliding_median(s, 4)
    trail = sliding_median(s, 4, align="trailing")
    cent = sliding_median(s, 4, align="centered")
    assert np.array_equal(lead.values, trail.values)
    assert (lead.start_index, trail.start_index, cent.start_index) == (5, 8, 6)


def test_sliding_median_window_too_large():
    with pytest.raises(SeriesTooShortError):
        sliding_median(TimeSeries([1.0, 2.0]), 3)


@settings(max_examples=150, deadline=None)
@given(st.lists(finite, min_size=1, max_size=60), st.integers(1, 12))
def test_sliding_median_matches_brute_force(values, w):
    if w > len(values):
        return
    out = sliding_median(TimeSeries(values), w).values
    assert out.tolist() == brute_median(values, w)
    for t, m in enumerate(out):
        win = values[t:t + w]
        assert min(win) <= m <= max(win)
    if w == 1:
        assert out.tolist() == [float(v) for v in values]


def test_hours_to_samples():
    assert hours_to_samples(24, 60) == 1440
    assert hours_to_samples(24, 3600) == 24


@pytest.mark.parametrize("values,lo,hi", [([2, 4, 6], 2, 6), ([-1, 0, 3], -1, 3)])
def test_fit_scaler(values, lo, hi):
    assert fit_scaler(TimeSeries(values)) == ScalerParams(lo, hi)


def test_fit_scaler_constant():
    with pytest.raises(ConstantSegmentError):
        fit_scaler(TimeSeries([7, 7, 7]))


def test_scale_unscale_examples():
    p = ScalerParams(2, 6)
    assert scale(TimeSeries([2, 4, 6]), p).values.tolist() == [0, 0.5, 1]
    assert scale(TimeSeries([2]), p).values.tolist() == [0]
    assert unscale(TimeSeries([0, 0.5, 1]), p).values.tolist() == [2, 4, 6]
    assert unscale(TimeSeries([0]), p).values.tolist() == [2]
    assert unscale(TimeSeries([1.25]), ScalerParams(0, 4)).values.tolist() == [5]


@settings(max_examples=300, deadline=None)
@given(st.lists(finite, min_size=2, max_size=40), st.lists(finite, min_size=1, max_size=40))
def test_scale_round_trip_and_endpoints(fit_values, other):
    seg = TimeSeries(fit_values)
    if min(fit_values) == max(fit_values):
        return
    p = fit_scaler(seg)
    scaled = scale(seg, p).values
    assert scaled[int(np.argmin(fit_values))] == 0.0
    assert scaled[int(np.argmax(fit_values))] == 1.0
    x = np.asarray(other)
    back = unscale(scale(TimeSeries(x), p), p).values
    assert np.all(np.abs(back - x) <= 1e-12 * np.maximum(np.abs(x), p.span + abs(p.min_value)))


def test_embed_examples():
    v = np.arange(10.0) * 10
    ds = embed(TimeSeries(v), 3, 1)
    assert len(ds) == 7
    assert ds.inputs[0].tolist() == [0, 10, 20] and ds.targets[0] == 30
    assert len(embed(TimeSeries(v), 6, 1)) == 4
    with pytest.raises(SeriesTooShortError):
        embed(TimeSeries(np.arange(4.0)), 3, 2)


def test_embed_count_exhaustive():
    # brute-force enumeration of every window for all N <= 20, d <= 7, n <= 3
    for N in range(1, 21):
        v = np.arange(N, dtype=float)
        for d in range(1, 8):
            for n in range(1, 4):
                pairs = [(list(v[i:i + d]), v[i + d - 1 + n])
                         for i in range(N) if i + d - 1 + n < N]
                if N < d + n:
                    assert not pairs
                    with pytest.raises(SeriesTooShortError):
                        embed(TimeSeries(v), d, n)
                    continue
                ds = embed(TimeSeries(v), d, n)
                assert len(ds) == len(pairs) == N - d - n + 1
                assert ds.inputs.tolist() == [p[0] for p in pairs]
                assert ds.targets.tolist() == [p[1] for p in pairs]


def test_embed_targets_cross_index(rng):
    v = rng.normal(size=300)
    s = TimeSeries(v, start_index=40)
    for d, n in [(3, 1), (7, 3), (5, 2)]:
        ds = embed(s, d, n)
        for i in rng.integers(0, len(ds), 30):
            assert ds.targets[i] == v[i + d - 1 + n]
            assert np.array_equal(ds.inputs[i], v[i:i + d])
            assert ds.target_index[i] == 40 + i + d - 1 + n


def test_embed_continuation_covers_whole_segment():
    hist = TimeSeries(np.arange(10.0))
    seg = TimeSeries(np.arange(10.0, 15.0), start_index=10)
    ds = embed_continuation(hist, seg, 4)
    assert ds.targets.tolist() == seg.values.tolist()
    assert ds.inputs[0].tolist() == [6, 7, 8, 9]
    assert ds.target_index.tolist() == list(range(10, 15))
