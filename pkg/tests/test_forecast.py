import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aging_forecast.errors import (DimensionMismatchError, NonFiniteForecastError,
                                   SeriesTooShortError)
from aging_forecast.forecast import (FALLING, RISING, ExhaustionEstimate, estimate_exhaustion,
                                     first_crossing, forecast_iterated)
from aging_forecast.mlp import MlpModel, MlpTopology, forward, init_model
from aging_forecast.preprocess import ScalerParams
from aging_forecast.timeseries import TimeSeries


class Stub:
    def __init__(self, width, fn):
        self.input_width = width
        self.fn = fn

    def predict(self, window):
        return self.fn(window)


UNIT = ScalerParams(0.0, 1.0)


def constant_net(c, d=3):
    topo = MlpTopology(d, 2)
    return MlpModel.from_arrays(topo, np.zeros((2, d)), np.zeros(2), np.zeros(2), c)


def test_constant_network(backend):
    assert forecast_iterated(constant_net(0.42), [0.1, 0.2, 0.3], 5).tolist() == [0.42] * 5


def test_incrementer_feedback():
    inc = Stub(3, lambda w: w[-1] + 1)
    assert forecast_iterated(inc, [1, 2, 3], 4).tolist() == [4, 5, 6, 7]


def test_window_shifts_oldest_out(backend, rng):
    m = MlpModel(MlpTopology(3, 4), rng.normal(size=MlpTopology(3, 4).n_params))
    seed = np.array([0.2, 0.5, 0.7])
    out = forecast_iterated(m, seed, 6)
    buf = list(seed)
    for k in range(6):
        assert out[k] == pytest.approx(forward(m, buf[-3:]), rel=1e-13)
        buf.append(out[k])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_forecast_errors():
    with pytest.raises(ValueError):
        forecast_iterated(constant_net(0.0), [0, 0, 0], 0)
    with pytest.raises(DimensionMismatchError):
        forecast_iterated(constant_net(0.0), [0, 0], 3)
    boom = Stub(1, lambda w: w[-1] * 1e200)
    with pytest.raises(NonFiniteForecastError) as exc:
        forecast_iterated(boom, [1e200], 5)
    assert exc.value.step == 0


def test_stub_crossing_step_three():
    stub = Stub(2, lambda w: w[-1] + 100)
    est = estimate_exhaustion(stub, TimeSeries([0.0, 0.0], sample_interval=60), UNIT, 250,
                              RISING, max_horizon=20)
    assert est.steps_to_crossing == 3
    assert est.crossing_time_seconds == 180
    assert est.recommended_rejuvenation_step == 2


def test_no_crossing():
    est = estimate_exhaustion(Stub(1, lambda w: 5.0), TimeSeries([5.0]), UNIT, 10, RISING, 50)
    assert est == ExhaustionEstimate(10.0, RISING, None, None, None)
    assert est.csv_row() == "10,rising_crossing,,,"
    assert "no crossing" in est.describe()


def test_safety_margin_rules():
    stub = Stub(1, lambda w: w[-1] + 1)
    recent = TimeSeries([0.0])
    assert estimate_exhaustion(stub, recent, UNIT, 10, RISING, 100, 4).recommended_rejuvenation_step == 6
    assert estimate_exhaustion(stub, recent, UNIT, 10, RISING, 100).recommended_rejuvenation_step == 9
    assert estimate_exhaustion(stub, recent, UNIT, 30, RISING, 100).recommended_rejuvenation_step == 27
    assert estimate_exhaustion(stub, recent, UNIT, 3, RISING, 100, 50).recommended_rejuvenation_step == 1


def test_falling_direction_and_scaling():
    # free memory draining 10 units per step in raw kB, scaler maps [1000, 2000]
    sc = ScalerParams(1000.0, 2000.0)
    stub = Stub(2, lambda w: w[-1] - 10 / 1000)
    recent = TimeSeries([1600.0, 1500.0])
    est = estimate_exhaustion(stub, recent, sc, 1205.0, FALLING, 100)
    assert est.steps_to_crossing == 30


def test_exhaustion_window_too_short():
    with pytest.raises(SeriesTooShortError):
        estimate_exhaustion(init_model(MlpTopology(4, 2), 0), TimeSeries([1.0, 2.0]), UNIT, 1.0)


@settings(max_examples=200)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.floats(-1e3, 1e3),
       st.floats(0, 100))
def test_first_crossing_minimal_and_monotone(path, threshold, bump):
    k = first_crossing(path, threshold, RISING)
    scan = next((i + 1 for i, v in enumerate(path) if v >= threshold), None)
    assert k == scan
    k2 = first_crossing(path, threshold + bump, RISING)
    if k2 is not None:
        assert k is not None and k2 >= k
