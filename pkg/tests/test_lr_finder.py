import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effssl.lr_finder import RangeTestConfig, ema, lr_sweep, quadratic_trainer, run_range_test


def test_sweep_endpoints_and_midpoint():
    c = RangeTestConfig(1e-3, 1.0, 201)
    assert lr_sweep(0, c) == 1e-3 and lr_sweep(200, c) == 1.0
    assert lr_sweep(100, c) == pytest.approx(math.sqrt(1e-3), rel=1e-12)
    with pytest.raises(ValueError):
        lr_sweep(201, c)


def test_sweep_log_linear():
    c = RangeTestConfig(1e-3, 1.0, 200)
    lrs = np.array([lr_sweep(t, c) for t in range(200)])
    # geometric oracle: constant ratio between consecutive steps
    line = 1e-3 * np.exp(np.arange(200) / 199 * np.log(1e3))
    assert np.max(np.abs(lrs - line) / line) <= 1e-12
    assert np.all(np.diff(lrs) > 0)


def test_ema_bias_correction():
    assert ema([2.0, 2.0, 2.0], 0.05) == pytest.approx([2.0, 2.0, 2.0])


# any curvature whose stability bound 2/lam lies inside the sweep
@given(st.floats(0.01, 2 / 1e-4))
def test_quadratic_max_lr_stable(lam):
    r = run_range_test(quadratic_trainer(lam), RangeTestConfig(1e-4, 10.0, 200))
    assert r.max_lr <= 2 / lam
    assert r.min_lr <= r.max_lr
    assert 1e-4 <= r.min_lr and r.max_lr <= 10.0


def test_diverging_trainer_flags_min():
    r = run_range_test(lambda lr: (math.exp(lr), math.exp(lr)), RangeTestConfig())
    assert not r.min_detected and r.min_lr == 1e-3
    assert r.min_lr <= r.max_lr


def test_nan_stops_sweep():
    calls = []

    def trainer(lr):
        calls.append(lr)
        return (1.0, 1.0) if lr < 0.1 else (math.nan, math.nan)

    r = run_range_test(trainer, RangeTestConfig())
    assert r.diverged and r.max_lr < 0.1
    assert len(r.trace) == len(calls) - 1


def test_csv(tmp_path):
    r = run_range_test(quadratic_trainer(4.0), RangeTestConfig(sweep_steps=20))
    r.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "step,lr,train_loss,val_loss" and len(lines) == 1 + len(r.trace)


@pytest.mark.parametrize("kw", [dict(lr_lo=1.0, lr_hi=0.1), dict(sweep_steps=5),
                                dict(smoothing=0.0), dict(divergence_factor=1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        RangeTestConfig(**kw)


def test_negative_losses_with_floor():
    # a bounded loss in [-1, 1] that improves, then blows up past lr 0.3
    def trainer(lr):
        v = -0.9 + 0.5 * lr if lr < 0.3 else 0.9
        return v, v

    r = run_range_test(trainer, RangeTestConfig(loss_floor=-1.0))
    assert r.diverged and r.max_lr < 0.3
