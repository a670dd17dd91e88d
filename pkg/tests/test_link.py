"""Per-hop channel model: derived constants, sampling, outage formulas."""

import math

import numpy as np
import pytest
from scipy import stats

from relaylink import (
    DomainError,
    Exactness,
    NetworkConfig,
    ValidationError,
    derive,
    derive_all,
    marcum_q1,
    outage_ff,
    outage_ff_approx_raw,
    outage_sf,
    outage_sf_approx_raw,
    outage_type1,
    sample_channel_gain,
    sample_channel_gains,
)

from oracles import (
    OUTAGE_FF_C03_Q3,
    OUTAGE_FF_C03_Q3_BAND,
    OUTAGE_FF_RAYLEIGH_Q2,
    OUTAGE_SF_RAYLEIGH_Q4,
    marcum_q_oracle,
)

RAYLEIGH = NetworkConfig(los=(0.0,), rate=1.0, snr=10.0)


def test_derive_rayleigh_constants():
    link = derive(RAYLEIGH, 1)
    assert link.marcum_a == 0.0
    assert math.isclose(link.marcum_b, math.sqrt(0.2), rel_tol=1e-15)
    assert math.isclose(link.phi, 0.1, rel_tol=1e-15)
    assert math.isclose(link.sf_coeff, 0.1, rel_tol=1e-15)


def test_derive_half_los_constants():
    net = NetworkConfig(los=(0.5,), rate=1.0, snr=10.0)
    link = derive(net, 1)
    assert math.isclose(link.marcum_a, math.sqrt(2.0), rel_tol=1e-15)
    assert math.isclose(link.phi, 0.1, rel_tol=1e-15)
    assert math.isclose(link.sf_coeff, 0.2 * math.exp(-1.0), rel_tol=1e-14)


def test_derive_near_deterministic_stays_finite():
    net = NetworkConfig(los=(0.999,), rate=1.0, snr=10.0)
    link = derive(net, 1)
    for v in (link.marcum_a, link.marcum_b, link.sf_coeff, link.ff_coeff):
        assert math.isfinite(v)


def test_slow_and_fast_coefficients_identical_bitwise():
    for c in (0.0, 0.2, 0.5, 0.85, 0.99):
        for rate in (0.5, 1.0, 2.0):
            for snr in (1.0, 10.0, 316.0):
                link = derive(NetworkConfig(los=(c,), rate=rate, snr=snr), 1)
                assert link.sf_coeff == link.ff_coeff


def test_derive_hop_index_bounds():
    net = NetworkConfig(los=(0.1, 0.2), rate=1.0, snr=10.0)
    with pytest.raises(DomainError):
        derive(net, 0)
    with pytest.raises(DomainError):
        derive(net, 3)
    assert len(derive_all(net)) == 2


def test_network_validation_reports_every_field():
    with pytest.raises(ValidationError) as info:
        NetworkConfig(los=(1.5, -0.1), rate=0.0, snr=-5.0)
    text = str(info.value)
    assert "los[1]" in text
    assert "los[2]" in text
    assert "rate" in text
    assert "snr" in text
    assert len(info.value.problems) == 4


def test_network_edge_cases():
    with pytest.raises(ValidationError):
        NetworkConfig(los=(), rate=1.0, snr=10.0)
    with pytest.raises(ValidationError):
        NetworkConfig(los=(1.0,), rate=1.0, snr=10.0)  # c = 1 is the limit
    assert NetworkConfig(los=(0.9999,), rate=1.0, snr=10.0).hop_count == 1


def test_sample_mean_is_unit_for_rayleigh():
    rng = np.random.Generator(np.random.PCG64(5150))
    mean = float(sample_channel_gains(0.0, rng, 10**6).mean())
    assert 0.99 <= mean <= 1.01


def test_sample_mean_is_unit_for_strong_los():
    rng = np.random.Generator(np.random.PCG64(5151))
    mean = float(sample_channel_gains(0.99, rng, 10**6).mean())
    assert 0.99 <= mean <= 1.01


def test_sampled_distribution_matches_noncentral_chi_square():
    # |h|^2 * 2/(1-c) is noncentral chi-square with df=2, nc=2c/(1-c).
    c = 0.5
    rng = np.random.Generator(np.random.PCG64(9))
    scaled = sample_channel_gains(c, rng, 200_000) * 2.0 / (1.0 - c)
    result = stats.kstest(scaled, lambda x: stats.ncx2.cdf(x, 2, 2 * c / (1 - c)))
    assert result.pvalue > 0.01


def test_sampling_shapes_and_support():
    rng = np.random.Generator(np.random.PCG64(1))
    block = sample_channel_gains(0.3, rng, (100, 4))
    assert block.shape == (100, 4)
    assert np.all(block >= 0.0)
    scalar = sample_channel_gain(0.3, rng)
    assert isinstance(scalar, float) and scalar >= 0.0


def test_outage_sf_rayleigh_examples():
    link = derive(RAYLEIGH, 1)
    assert math.isclose(outage_sf(link, 1), 1.0 - math.exp(-0.1), rel_tol=1e-12)
    assert math.isclose(outage_sf(link, 4), 1.0 - math.exp(-0.025), rel_tol=1e-12)
    # The anchor is printed rounded at the 1e-12 place, so compare absolutely.
    assert abs(outage_sf(link, 4) - OUTAGE_SF_RAYLEIGH_Q4) <= 1e-12
    assert outage_sf(link, 1, Exactness.APPROX) == pytest.approx(0.1, rel=1e-15)


def test_outage_ff_rayleigh_examples():
    link = derive(RAYLEIGH, 1)
    # Two combined Rayleigh draws: 1 - e^-phi (1 + phi).
    closed = 1.0 - math.exp(-0.1) * 1.1
    assert math.isclose(outage_ff(link, 2), closed, rel_tol=1e-11)
    assert abs(outage_ff(link, 2) - OUTAGE_FF_RAYLEIGH_Q2) <= 1e-12
    assert outage_ff(link, 2, Exactness.APPROX) == pytest.approx(0.005, rel=1e-14)


def test_outage_ff_rician_frozen_value():
    net = NetworkConfig(los=(0.3,), rate=1.0, snr=10**1.5)
    value = outage_ff(derive(net, 1), 3)
    assert math.isclose(value, OUTAGE_FF_C03_Q3, rel_tol=1e-9)
    lo, hi = OUTAGE_FF_C03_Q3_BAND
    assert lo <= value <= hi


def test_outage_type1_examples():
    link = derive(RAYLEIGH, 1)
    single = 1.0 - math.exp(-0.1)
    assert math.isclose(outage_type1(link, 2), single**2, rel_tol=1e-12)
    assert outage_type1(link, 1) == outage_sf(link, 1)
    net = NetworkConfig(los=(0.5,), rate=1.0, snr=10.0)
    link5 = derive(net, 1)
    assert math.isclose(outage_type1(link5, 3), outage_type1(link5, 1) ** 3,
                        rel_tol=1e-12)


def test_outage_strictly_decreasing_in_attempts():
    # Fast-fading outage falls off factorially, so the full q = 1..20 sweep
    # is run at an SNR low enough that every value is still representable
    # above the 1 - Q cancellation floor of double precision.
    for c in (0.0, 0.4):
        link_low = derive(NetworkConfig(los=(c,), rate=1.0, snr=0.5), 1)
        for fn in (outage_sf, outage_ff, outage_type1):
            values = [fn(link_low, q) for q in range(1, 21)]
            assert all(x > y for x, y in zip(values, values[1:])), (c, fn)
            assert all(0.0 < v <= 1.0 for v in values)
        link_mid = derive(NetworkConfig(los=(c,), rate=1.0, snr=10.0), 1)
        for fn in (outage_sf, outage_type1):
            values = [fn(link_mid, q) for q in range(1, 21)]
            assert all(x > y for x, y in zip(values, values[1:])), (c, fn)


def test_exact_outage_within_monte_carlo_band():
    # Slow fading: one gain draw, chase combining multiplies it by q.
    net = NetworkConfig(los=(0.3,), rate=1.0, snr=10.0)
    link = derive(net, 1)
    rng = np.random.Generator(np.random.PCG64(314159))
    gains = sample_channel_gains(0.3, rng, 10**6)
    p_hat = float(np.count_nonzero(gains * 3 < link.phi)) / 10**6
    sigma = math.sqrt(p_hat * (1.0 - p_hat) / 10**6)
    assert abs(outage_sf(link, 3) - p_hat) <= 3.0 * sigma

    # Fast fading: independent draws accumulate.
    net2 = NetworkConfig(los=(0.2,), rate=1.0, snr=10.0)
    link2 = derive(net2, 1)
    rng2 = np.random.Generator(np.random.PCG64(271828))
    pairs = sample_channel_gains(0.2, rng2, (10**6, 2))
    p_hat2 = float(np.count_nonzero(pairs.sum(axis=1) < link2.phi)) / 10**6
    sigma2 = math.sqrt(p_hat2 * (1.0 - p_hat2) / 10**6)
    assert abs(outage_ff(link2, 2) - p_hat2) <= 3.0 * sigma2


def test_approximations_close_at_high_snr():
    for c in (0.0, 0.3, 0.7):
        net = NetworkConfig(los=(c,), rate=1.0, snr=100.0)
        link = derive(net, 1)
        for q in range(1, 5):
            exact_s = outage_sf(link, q)
            assert abs(outage_sf_approx_raw(link, q) - exact_s) <= 0.1 * exact_s
            exact_f = outage_ff(link, q)
            assert abs(outage_ff_approx_raw(link, q) - exact_f) <= 0.1 * exact_f


def test_ff_exact_consistent_with_oracle_form():
    # 1 - Q_q(sqrt(q) a, b) against scipy for a couple of Rician hops.
    for c, q in ((0.2, 2), (0.5, 4)):
        net = NetworkConfig(los=(c,), rate=1.0, snr=31.6)
        link = derive(net, 1)
        expected = 1.0 - marcum_q_oracle(q, math.sqrt(q) * link.marcum_a,
                                         link.marcum_b)
        assert abs(outage_ff(link, q) - expected) <= 1e-9


def test_sf_exact_consistent_with_oracle_form():
    for c, q in ((0.0, 3), (0.6, 5)):
        net = NetworkConfig(los=(c,), rate=1.0, snr=31.6)
        link = derive(net, 1)
        expected = 1.0 - marcum_q_oracle(1, link.marcum_a,
                                         link.marcum_b / math.sqrt(q))
        assert abs(outage_sf(link, q) - expected) <= 1e-9
        assert outage_sf(link, q) == 1.0 - marcum_q1(link.marcum_a,
                                                     link.marcum_b / math.sqrt(q))


@pytest.mark.parametrize("q", [0, -2, 1.5, True])
def test_bad_attempt_count_rejected(q):
    link = derive(RAYLEIGH, 1)
    for fn in (outage_sf, outage_ff, outage_type1,
               outage_sf_approx_raw, outage_ff_approx_raw):
        with pytest.raises(DomainError):
            fn(link, q)
