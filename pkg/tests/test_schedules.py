import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from effssl.schedules import (
    ScheduleConfig,
    ScheduleError,
    ScheduleKind,
    StepRangeError,
    cosine_annealing,
    cosine_warmup,
    fixed_one_cycle,
    noise_scale,
    one_cycle,
    schedule_point,
    schedule_trace,
)

K = ScheduleKind


def cfg(kind, L=200, lr=0.1, tw=0, **kw):
    return ScheduleConfig(kind, L, lr, warmup_steps=tw, **kw)


class TestCosine:
    def test_values(self):
        c = cfg(K.COSINE_ANNEALING, 200, 0.1)
        assert cosine_annealing(0, c) == 0.1
        assert cosine_annealing(100, c) == pytest.approx(0.05, abs=1e-15)
        assert cosine_annealing(200, c) == 0.0

    def test_out_of_range(self):
        c = cfg(K.COSINE_ANNEALING, 10)
        for t in (-1, 11):
            with pytest.raises(StepRangeError):
                cosine_annealing(t, c)

    def test_fixed_momentum_reported(self):
        assert schedule_point(3, cfg(K.COSINE_ANNEALING, 10)).momentum == 0.9


class TestWarmup:
    def test_midpoint_and_boundary(self):
        c = cfg(K.COSINE_WARMUP, 100, 0.16, tw=10)
        assert cosine_warmup(5, c) == pytest.approx(0.08)
        assert cosine_warmup(10, c) == 0.16
        assert cosine_warmup(0, c) == 0.0
        assert cosine_warmup(100, c) == 0.0

    def test_warmup_must_be_shorter_than_run(self):
        with pytest.raises(ScheduleError):
            cfg(K.COSINE_WARMUP, 10, tw=10)
        with pytest.raises(ScheduleError):
            cfg(K.COSINE_WARMUP, 10, tw=0)


class TestOneCycle:
    def test_landmarks(self):
        c = cfg(K.ONE_CYCLE, 100, 0.3, phase_fraction=0.3)
        p0, pk, pl = one_cycle(0, c), one_cycle(30, c), one_cycle(100, c)
        assert (p0.lr, p0.momentum) == (0.0, 0.95)
        assert (pk.lr, pk.momentum) == (0.3, 0.85)
        assert (pl.lr, pl.momentum) == (0.0, 0.95)

    @pytest.mark.parametrize("rho", [0.0, 1.0, -0.2])
    def test_bad_phase_fraction(self, rho):
        with pytest.raises(ScheduleError):
            cfg(K.ONE_CYCLE, 100, phase_fraction=rho)


class TestFixedOneCycle:
    def test_midpoint(self):
        c = cfg(K.FIXED_ONE_CYCLE, 100, 0.2, tw=10)
        assert fixed_one_cycle(5, c).lr == pytest.approx(0.1, abs=1e-15)

    def test_peak(self):
        p = fixed_one_cycle(10, cfg(K.FIXED_ONE_CYCLE, 100, 0.2, tw=10))
        assert p.lr == 0.2 and p.momentum == 0.85

    def test_warmup_independent_of_length(self):
        a = cfg(K.FIXED_ONE_CYCLE, 160, 0.2, tw=80)
        b = cfg(K.FIXED_ONE_CYCLE, 400, 0.2, tw=80)
        for t in range(81):
            assert fixed_one_cycle(t, a) == fixed_one_cycle(t, b)

    def test_rejects_no_warmup(self):
        with pytest.raises(ScheduleError):
            cfg(K.FIXED_ONE_CYCLE, 100, tw=0)


@st.composite
def cyclic_configs(draw):
    L = draw(st.integers(2, 3000))
    kind = draw(st.sampled_from([K.ONE_CYCLE, K.FIXED_ONE_CYCLE]))
    lo = draw(st.floats(0.0, 0.98))
    hi = draw(st.floats(lo, 0.99))
    lr = draw(st.floats(1e-4, 10.0))
    if kind is K.ONE_CYCLE:
        rho = draw(st.floats(1.0 / L, 0.99).filter(lambda r: r < 1 and r * L >= 1))
        return ScheduleConfig(kind, L, lr, phase_fraction=rho, beta_low=lo, beta_high=hi)
    tw = draw(st.integers(1, L - 1))
    return ScheduleConfig(kind, L, lr, warmup_steps=tw, beta_low=lo, beta_high=hi)


@given(cyclic_configs())
def test_cyclic_bounds_and_endpoints(c):
    trace = schedule_trace(c)
    assert trace[0].lr == 0.0 and trace[-1].lr == 0.0
    assert trace[0].momentum == c.beta_high == trace[-1].momentum
    for p in trace:
        assert 0.0 <= p.lr <= c.lr_max
        assert c.beta_low <= p.momentum <= c.beta_high


@given(cyclic_configs())
def test_cyclic_anti_phase(c):
    trace = schedule_trace(c)
    for a, b in zip(trace, trace[1:]):
        rising = b.step <= c.peak_step
        if rising:
            assert b.lr >= a.lr and b.momentum <= a.momentum
        elif a.step >= c.peak_step:
            assert b.lr <= a.lr and b.momentum >= a.momentum


def test_noise_scale_values():
    assert noise_scale(0.1, 10000, 128, 0.9).noise_scale == pytest.approx(78.125)
    assert noise_scale(0.1, 10000, 128).noise_scale == pytest.approx(0.1 * 10000 / 128)


@given(st.floats(1e-4, 1.0), st.integers(1, 10**6), st.integers(1, 4096), st.floats(0.0, 0.99))
def test_noise_scale_proportionality(lr, d, b, m):
    g = noise_scale(lr, d, b, m).noise_scale
    assert g > 0
    assert math.isclose(noise_scale(2 * lr, d, b, m).noise_scale, 2 * g, rel_tol=1e-12)
    assert math.isclose(noise_scale(lr, d, 2 * b, m).noise_scale, g / 2, rel_tol=1e-12)


def test_noise_scale_singular():
    with pytest.raises(ZeroDivisionError):
        noise_scale(0.1, 100, 10, 1.0)
