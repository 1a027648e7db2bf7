import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qoesim.channel import (ChannelConfig, bits_per_prb, channel_state, sample_snr, snr_to_cqi)
from qoesim.errors import ConfigError, DomainError

CFG = ChannelConfig()


def test_snr_without_fading():
    cfg = ChannelConfig(fading=False)
    # 46 - 128.1 - (-101)
    assert sample_snr(cfg, 1.0, np.random.default_rng(0)) == pytest.approx(18.9)


def test_snr_deterministic_under_seed():
    a = [sample_snr(CFG, 0.4, r) for r in [np.random.default_rng(5)] for _ in range(10)]
    b = [sample_snr(CFG, 0.4, r) for r in [np.random.default_rng(5)] for _ in range(10)]
    assert a == b


def test_deep_fade_goes_to_minus_infinity():
    class ZeroRng:
        def exponential(self, scale):
            return 0.0

    assert sample_snr(CFG, 1.0, ZeroRng()) == -math.inf
    assert snr_to_cqi(CFG, -math.inf) == 0


@pytest.mark.parametrize("d", [0, -0.5])
def test_distance_domain(d):
    with pytest.raises(DomainError):
        sample_snr(CFG, d, np.random.default_rng(0))


def test_fading_power_unit_mean():
    rng = np.random.default_rng(11)
    cfg = ChannelConfig()
    base = sample_snr(ChannelConfig(fading=False), 0.5, rng)
    x = [10 ** ((sample_snr(cfg, 0.5, rng) - base) / 10) for _ in range(100_000)]
    assert abs(np.mean(x) - 1.0) < 0.02


def test_cqi_edges():
    th = CFG.cqi_thresholds
    assert snr_to_cqi(CFG, th[0] - 0.01) == 0
    assert snr_to_cqi(CFG, th[-1] + 50) == 15
    for k in range(1, 16):
        assert snr_to_cqi(CFG, th[k - 1]) == k


@given(st.floats(-50, 60), st.floats(-50, 60))
def test_cqi_monotone(a, b):
    lo, hi = sorted((a, b))
    assert snr_to_cqi(CFG, lo) <= snr_to_cqi(CFG, hi)


def test_bits_per_prb():
    assert bits_per_prb(CFG, 0) == 0
    # 5.5547 * 168 and 0.1523 * 168 rounded
    assert bits_per_prb(CFG, 15) == 933
    assert bits_per_prb(CFG, 1) == 26
    bits = [bits_per_prb(CFG, c) for c in range(1, 16)]
    assert all(b > a for a, b in zip(bits, bits[1:]))


@pytest.mark.parametrize("cqi", [-1, 16])
def test_bits_domain(cqi):
    with pytest.raises(DomainError):
        bits_per_prb(CFG, cqi)


def test_state_consistency():
    rng = np.random.default_rng(3)
    for _ in range(500):
        s = channel_state(CFG, float(rng.uniform(0.05, 3.0)), rng)
        assert (s.cqi == 0) == (s.bits_per_prb == 0)
        if s.cqi:
            assert s.bits_per_prb == round(CFG.cqi_efficiency[s.cqi - 1] * CFG.res_per_prb)


@pytest.mark.parametrize("kw", [
    dict(cqi_thresholds=tuple(range(15, 0, -1))),
    dict(cqi_efficiency=(1.0,) * 15),
    dict(res_per_prb=0),
    dict(cqi_thresholds=(1.0, 2.0)),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ChannelConfig(**kw)


def test_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        ChannelConfig.from_dict({"bogus": 1})
    assert ChannelConfig.from_dict({"tx_power": 40}).tx_power == 40
