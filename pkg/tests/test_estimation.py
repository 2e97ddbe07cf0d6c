import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dalis.channel import PathLossEnvironment, received_rss
from dalis.errors import DegenerateGeometryError, InvalidParameterError, NoDataError
from dalis.estimation import (INF, MovingAverageWindow, aggregate_ple, estimate_distance, estimate_ple,
                              window_push_and_mean)


def _means(capacity, samples):
    win = MovingAverageWindow(capacity)
    return [window_push_and_mean(win, s) for s in samples]


def test_window_examples():
    assert _means(3, [5, 5, 5, 5]) == [5, 5, 5, 5]
    assert _means(2, [1, 3, 5]) == [1, 2, 4]
    assert _means(INF, [1, 2, 3, 4]) == [1, 1.5, 2, 2.5]


def test_window_eviction_and_state():
    win = MovingAverageWindow(3)
    assert win.empty and not win.full
    for s in (1, 2, 3, 4):
        win.push(s)
    assert win.samples() == [2, 3, 4]
    assert len(win) == 3 and win.full


def test_empty_window_mean_raises():
    with pytest.raises(NoDataError):
        MovingAverageWindow(4).mean()


@pytest.mark.parametrize("cap", [0, -1, 2.5, math.nan])
def test_bad_capacity(cap):
    with pytest.raises(ValueError):
        MovingAverageWindow(cap)


@given(st.integers(1, 20), st.lists(st.floats(-100, 100), min_size=1, max_size=60))
def test_window_is_mean_of_last_w(cap, xs):
    win = MovingAverageWindow(cap)
    for k, x in enumerate(xs):
        m = win.push_and_mean(x)
        tail = xs[max(0, k + 1 - cap):k + 1]
        assert len(win) == len(tail) <= cap
        assert m == pytest.approx(sum(tail) / len(tail), abs=1e-9)


def test_estimate_ple_examples():
    assert estimate_ple(20, 40, 1, -40, 10) == pytest.approx(2.0)
    assert estimate_ple(20, 40, 1, -60, 10) == pytest.approx(4.0)


@pytest.mark.parametrize("d", [1.0, 0.5, 0.0])
def test_estimate_ple_degenerate(d):
    with pytest.raises(DegenerateGeometryError):
        estimate_ple(20, 40, 1, -40, d)


def test_aggregate_ple():
    assert aggregate_ple([2.0]) == 2.0
    assert aggregate_ple([2.0, 4.0, 3.0]) == 3.0
    assert aggregate_ple([2.5, 2.5, 2.5]) == 2.5
    with pytest.raises(NoDataError):
        aggregate_ple([])


def test_estimate_distance_examples():
    assert estimate_distance(20, 40, 1, -20, 2) == pytest.approx(1.0)
    assert estimate_distance(20, 40, 1, -40, 2) == pytest.approx(10.0)
    assert estimate_distance(20, 40, 1, -40, 4) == pytest.approx(3.1623, abs=1e-4)


def test_estimate_distance_clamped_at_d0():
    assert estimate_distance(20, 40, 1, -5, 3) == 1.0


@pytest.mark.parametrize("n", [0.0, -1.5])
def test_estimate_distance_rejects_nonpositive_ple(n):
    with pytest.raises(InvalidParameterError):
        estimate_distance(20, 40, 1, -40, n)


@given(st.floats(1.001, 300.0), st.floats(0.5, 6.0), st.floats(10, 25))
def test_round_trip_ple(d, n, tx):
    env = PathLossEnvironment(n_true=n)
    rss = received_rss(env, tx, d, 0.0)
    assert estimate_ple(tx, env.pl_d0, env.d0, rss, d) == pytest.approx(n, rel=1e-9)


@given(st.floats(1.0, 300.0), st.floats(0.5, 6.0), st.floats(10, 25))
def test_round_trip_distance(d, n, tx):
    env = PathLossEnvironment(n_true=n)
    rss = received_rss(env, tx, d, 0.0)
    assert estimate_distance(tx, env.pl_d0, env.d0, rss, n) == pytest.approx(d, rel=1e-9)


@given(st.floats(-100, -21), st.floats(0.01, 5), st.floats(0.5, 6))
def test_distance_decreasing_in_rss(rss, delta, n):
    assert estimate_distance(20, 40, 1, rss + delta, n) < estimate_distance(20, 40, 1, rss, n)


def test_noise_suppression_scales_as_one_over_k():
    env = PathLossEnvironment(sigma=4, n_true=3)
    d, reps = 20.0, 4000
    rng = np.random.default_rng(2024)
    base = None
    for k in (1, 4, 16, 64):
        rss = received_rss(env, 20, d, 0.0) + env.sigma * rng.standard_normal((reps, k))
        ples = [estimate_ple(20, env.pl_d0, env.d0, float(r.mean()), d) for r in rss]
        v = np.var(ples) * k
        base = v if base is None else base
        assert v == pytest.approx(base, rel=0.2)
    # and the absolute level follows from the inversion's linearity
    expected = env.sigma ** 2 / (10 * math.log10(d)) ** 2
    assert base == pytest.approx(expected, rel=0.1)
