from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effssl.progressive import (
    PlanError,
    ProgressivePlan,
    cost_ratio,
    magnitude_at,
    progressive_speedup,
    resolution_at,
    resolution_sequence,
    round_to_quantum,
    stage_resolutions,
)
from effssl.schedules import StepRangeError


def staircase_120():
    return ProgressivePlan(120, 10, 96, 224, 32)


def test_default_stages():
    assert stage_resolutions(staircase_120()) == [96, 128, 160, 192, 224]


def test_warmup_is_full_resolution():
    p = staircase_120()
    assert all(resolution_at(t, p) == 224 for t in range(10))
    assert resolution_at(10, p) == 96
    assert resolution_at(120, p) == 224


def test_speedup_against_hand_sum():
    # 10 warm-up epochs at 224, then 22 epochs at each of the five stages
    seq = [224] * 10 + [r for r in (96, 128, 160, 192, 224) for _ in range(22)]
    want = sum(Fraction(224, r) ** 2 for r in seq) / 120
    assert list(resolution_sequence(staircase_120())) == seq
    assert progressive_speedup(staircase_120()) == pytest.approx(float(want), rel=1e-12)
    assert float(want) == pytest.approx(2.4352, abs=1e-4)


def test_constant_plans():
    assert progressive_speedup(ProgressivePlan.constant(50, 224)) == 1.0
    assert cost_ratio(ProgressivePlan.constant(50, 224)) == 1.0
    half = ProgressivePlan(50, 0, 112, 112, 112, 1)
    # constant r_max/2 against a nominal r_max of 224
    r = resolution_sequence(half)
    assert np.all(r == 112)
    assert float(np.mean((224 / r) ** 2)) == 4.0


def test_magnitude_ramp():
    p = ProgressivePlan(100, 10, 16, 32, 4, mag_min=4, mag_max=6)
    assert magnitude_at(0, p) == 4 and magnitude_at(100, p) == 6
    assert magnitude_at(50, p) == 5.0


def test_degenerate_plan():
    p = ProgressivePlan(30, 5, 32, 32, 4)
    assert {resolution_at(t, p) for t in range(31)} == {32}


def test_round_to_quantum_ties_up():
    assert round_to_quantum(16, 32) == 32
    assert round_to_quantum(Fraction(47, 1), 32) == 32
    assert round_to_quantum(48, 32) == 64


@pytest.mark.parametrize("kw", [
    dict(res_min=100, res_max=224),
    dict(res_min=256, res_max=224),
    dict(warmup_steps=120),
    dict(num_stages=0),
])
def test_invalid_plans(kw):
    base = dict(total_steps=120, warmup_steps=10, res_min=96, res_max=224, quantum=32)
    with pytest.raises(PlanError):
        ProgressivePlan(**{**base, **kw})


def test_step_range():
    with pytest.raises(StepRangeError):
        resolution_at(121, staircase_120())


@st.composite
def plans(draw):
    q = draw(st.sampled_from([4, 8, 16, 32]))
    lo = q * draw(st.integers(1, 8))
    hi = lo + q * draw(st.integers(0, 8))
    L = draw(st.integers(1, 400))
    tw = draw(st.integers(0, L - 1))
    k = draw(st.one_of(st.none(), st.integers(1, 12)))
    return ProgressivePlan(L, tw, lo, hi, q, k)


@given(plans())
def test_staircase_properties(p):
    seq = [resolution_at(t, p) for t in range(p.total_steps + 1)]
    assert all(r % p.quantum == 0 and p.res_min <= r <= p.res_max for r in seq)
    assert all(r == p.res_max for r in seq[: p.warmup_steps])
    after = seq[p.warmup_steps:]
    assert all(a <= b for a, b in zip(after, after[1:]))
    assert seq[-1] == p.res_max
    m, c = progressive_speedup(p), cost_ratio(p)
    assert m >= 1.0 - 1e-12
    assert m >= c - 1e-12
